#!/usr/bin/env python3
# Copyright 2026 The fedkd Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Converts the digit JSON files shipped in the `mnist` npm package to IDX.

The package stores 10,000 MNIST digits as one JSON file per class, each a flat
list of pixel/255 values (784 per image). Bytes are recovered exactly with
round(v * 255). The images are shuffled with a fixed seed and split into a
train and a test file pair.

    npm pack mnist@1.1.0 && tar xf mnist-1.1.0.tgz
    python3 scripts/make_mnist_idx.py --src package/src/digits --out data/mnist
"""

import argparse
import json
import pathlib
import random
import struct

PIXELS = 28 * 28


def load_digits(src):
    images, labels = [], []
    for digit in range(10):
        with open(src / f"{digit}.json") as f:
            flat = json.load(f)["data"]
        if len(flat) % PIXELS:
            raise SystemExit(f"{digit}.json: {len(flat)} values is not a multiple of {PIXELS}")
        raw = bytes(round(v * 255) for v in flat)
        for i in range(len(flat) // PIXELS):
            images.append(raw[i * PIXELS:(i + 1) * PIXELS])
            labels.append(digit)
    return images, labels


def write_idx(path, images, labels):
    with open(str(path) + "-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(images), 28, 28))
        for img in images:
            f.write(img)
    with open(str(path) + "-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(bytes(labels))


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--src", type=pathlib.Path, required=True)
    ap.add_argument("--out", type=pathlib.Path, default=pathlib.Path("data/mnist"))
    ap.add_argument("--test", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=20260101)
    args = ap.parse_args()

    images, labels = load_digits(args.src)
    order = list(range(len(images)))
    random.Random(args.seed).shuffle(order)
    test, train = order[:args.test], order[args.test:]

    args.out.mkdir(parents=True, exist_ok=True)
    write_idx(args.out / "train", [images[i] for i in train], [labels[i] for i in train])
    write_idx(args.out / "t10k", [images[i] for i in test], [labels[i] for i in test])
    print(f"wrote {len(train)} train / {len(test)} test images to {args.out}")


if __name__ == "__main__":
    main()
