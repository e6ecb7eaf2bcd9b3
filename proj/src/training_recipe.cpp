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

#include "dnanas/training_recipe.hpp"

#include <stdexcept>
#include <string>

namespace dnanas {

double LrSchedule::rate(int epoch) const {
  if (epoch < 1) throw std::out_of_range("epoch " + std::to_string(epoch) + " is not >= 1");
  double r = initial;
  for (const auto& m : milestones) {
    if (epoch >= m.epoch) r = m.rate;
  }
  return r;
}

void LrSchedule::check() const {
  if (!(initial > 0.0)) throw std::invalid_argument("initial learning rate must be positive");
  int previous = 1;
  for (const auto& m : milestones) {
    if (m.epoch <= previous) {
      throw std::invalid_argument("lr milestones must be strictly increasing epochs >= 2");
    }
    if (!(m.rate > 0.0)) throw std::invalid_argument("lr milestone rates must be positive");
    previous = m.epoch;
  }
}

double lr_schedule(int epoch) {
  static const LrSchedule kDefault;
  return kDefault.rate(epoch);
}

std::vector<EarlyStopThreshold> default_thresholds() {
  return {{10, 0.80}, {20, 0.85}, {45, 0.90}};
}

void check_thresholds(std::span<const EarlyStopThreshold> thresholds) {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const auto& t = thresholds[i];
    if (t.epoch < 1) throw std::invalid_argument("threshold epochs must be >= 1");
    if (!(t.min_accuracy >= 0.0 && t.min_accuracy <= 1.0)) {
      throw std::invalid_argument("threshold accuracies must lie in [0, 1]");
    }
    if (i > 0 && t.epoch <= thresholds[i - 1].epoch) {
      throw std::invalid_argument("threshold epochs must be strictly increasing");
    }
    if (i > 0 && t.min_accuracy <= thresholds[i - 1].min_accuracy) {
      throw std::invalid_argument("threshold accuracies must be strictly increasing");
    }
  }
}

StopCheck early_stop_check(int epoch, double val_accuracy,
                           std::span<const EarlyStopThreshold> thresholds) {
  for (const auto& t : thresholds) {
    if (t.epoch == epoch && val_accuracy < t.min_accuracy) return {StopDecision::Kill, t};
  }
  return {};
}

StopCheck early_stop_check(std::span<const double> history,
                           std::span<const EarlyStopThreshold> thresholds) {
  for (const auto& t : thresholds) {
    if (t.epoch >= 1 && static_cast<std::size_t>(t.epoch) <= history.size() &&
        history[t.epoch - 1] < t.min_accuracy) {
      return {StopDecision::Kill, t};
    }
  }
  return {};
}

}  // namespace dnanas
