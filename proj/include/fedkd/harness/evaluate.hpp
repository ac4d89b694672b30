// Copyright 2026 The fedkd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <span>

#include "fedkd/data/dataset.hpp"
#include "fedkd/models/classifier.hpp"
#include "fedkd/protocols/round.hpp"

namespace fedkd {

/// Fraction of rows whose argmax (lowest index on ties) equals the label.
double accuracy(const Tensor& scores, std::span<const int> labels);

double evaluate(const Classifier& model, const Dataset& test);
/// Accuracy of the probability-averaged ensemble.
double evaluate_ensemble(std::span<const Classifier* const> models, const Dataset& test);

/// Test accuracy of whatever the algorithm deploys: the global model; the
/// ensemble of latest client models (FedEnsemble); or, when clients keep
/// their own models (FedDistill, predictor-only sharing), the mean accuracy
/// of every client's model on the full test set.
double evaluate_federation(const Federation& fed, const Dataset& test);

}  // namespace fedkd
