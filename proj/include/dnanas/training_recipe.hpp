// Copyright 2026 The dnanas Authors
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

/**
 * @file training_recipe.hpp
 * @brief Learning-rate schedule, early-stop thresholds and optimizer settings
 * shared by the orchestrator and the evaluator protocol.
 */
#pragma once

#include <optional>
#include <span>
#include <vector>

namespace dnanas {

/// Step schedule. Epochs are 1-indexed; a milestone (e, r) sets the rate to r
/// from epoch e onward.
struct LrSchedule {
  struct Milestone {
    int epoch = 0;
    double rate = 0.0;
    friend bool operator==(const Milestone&, const Milestone&) = default;
  };

  double initial = 0.1;
  std::vector<Milestone> milestones{{10, 0.01}, {30, 0.001}};

  /// Throws std::out_of_range for epoch < 1.
  double rate(int epoch) const;
  /// Throws std::invalid_argument unless rates are positive and milestone
  /// epochs are >= 2 and strictly increasing.
  void check() const;

  friend bool operator==(const LrSchedule&, const LrSchedule&) = default;
};

/// The default schedule: 0.1, then 0.01 from epoch 10, then 0.001 from epoch 30.
double lr_schedule(int epoch);

struct EarlyStopThreshold {
  int epoch = 0;
  double min_accuracy = 0.0;
  friend bool operator==(const EarlyStopThreshold&, const EarlyStopThreshold&) = default;
};

/// 80% at epoch 10, 85% at epoch 20, 90% at epoch 45.
std::vector<EarlyStopThreshold> default_thresholds();

/// Throws std::invalid_argument unless epochs and accuracies are strictly
/// increasing, epochs >= 1 and accuracies in [0, 1].
void check_thresholds(std::span<const EarlyStopThreshold> thresholds);

enum class StopDecision { Keep, Kill };

struct StopCheck {
  StopDecision decision = StopDecision::Keep;
  std::optional<EarlyStopThreshold> threshold;  // the threshold that killed
};

/// Single-epoch form: kills iff a threshold sits at `epoch` and val_accuracy
/// is below it. Accuracy equal to the threshold keeps the model.
StopCheck early_stop_check(int epoch, double val_accuracy,
                           std::span<const EarlyStopThreshold> thresholds);

/// History form: history[e-1] is the validation accuracy after epoch e.
/// Kills iff some threshold epoch has been reached and the accuracy recorded
/// at that epoch is below it; the earliest such threshold is reported.
StopCheck early_stop_check(std::span<const double> history,
                           std::span<const EarlyStopThreshold> thresholds);

struct OptimizerSpec {
  double momentum = 0.9;
  double weight_decay = 1e-4;
  friend bool operator==(const OptimizerSpec&, const OptimizerSpec&) = default;
};

struct Augmentation {
  bool flip = true;
  bool crop = true;
  bool normalize = true;
  friend bool operator==(const Augmentation&, const Augmentation&) = default;
};

}  // namespace dnanas
