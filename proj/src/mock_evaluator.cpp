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

#include <algorithm>
#include <cmath>
#include <random>

#include "dnanas/seed.hpp"
#include "dnanas/trainer_bridge.hpp"

namespace dnanas {

namespace {

enum : std::uint64_t { kCurveStream = 11, kMixStream = 12 };

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Saturating curve start + (plateau - start) * (1 - exp(-(e-1)/tau)).
/// Good models clear 80% by epoch 10 and 90% by epoch 45; poor ones plateau
/// between 30% and 70%.
double synthetic_accuracy(std::uint64_t seed, int model_id, bool good, int epoch) {
  std::mt19937_64 rng(derive_seed(seed, {kCurveStream, static_cast<std::uint64_t>(model_id)}));
  const double plateau = good ? 0.91 + 0.05 * unit(rng) : 0.30 + 0.40 * unit(rng);
  const double start = (good ? 0.45 : 0.15) + 0.15 * unit(rng);
  const double tau = 2.0 + 3.0 * unit(rng);
  return plateau - (plateau - start) * std::exp(-(epoch - 1) / tau);
}

double synthetic_loss(double accuracy) { return 2.302585 * (1.0 - accuracy) + 0.02; }

}  // namespace

class MockSession : public EvalSession {
public:
  MockSession(MockEvaluator& owner, const EvalRequest& req, MockProfile profile)
      : owner_(owner),
        model_id_(req.model_id),
        phase_(req.phase),
        budget_(req.epochs),
        profile_(std::move(profile)) {
    limit_ = budget_;
    if (profile_.kind == MockProfile::Kind::Scripted) {
      limit_ = std::min<int>(budget_, static_cast<int>(profile_.script.size()));
    }
  }

  EvalMessage next() override {
    if (done_) return *done_;
    if (killed_) return *(done_ = EvalOutcome{EvalStatus::EarlyStopped, {}, std::nullopt});
    if (profile_.kind == MockProfile::Kind::Failing && epoch_ >= profile_.fail_after) {
      return *(done_ = EvalOutcome{EvalStatus::Failed,
                                   "mock failure after " + std::to_string(epoch_) + " epochs",
                                   std::nullopt});
    }
    if (epoch_ >= limit_) {
      EvalOutcome outcome{EvalStatus::Completed, {}, std::nullopt};
      if (phase_ == EvalPhase::Final && epoch_ > 0) outcome.test_accuracy = last_accuracy_;
      return *(done_ = outcome);
    }
    ++epoch_;
    owner_.record(phase_, model_id_, epoch_);
    last_accuracy_ = owner_.accuracy(model_id_, epoch_);
    return EvalEvent{model_id_, epoch_, last_accuracy_, synthetic_loss(last_accuracy_)};
  }

  void kill() override { killed_ = true; }

private:
  MockEvaluator& owner_;
  int model_id_;
  EvalPhase phase_;
  int budget_;
  int limit_;
  MockProfile profile_;
  int epoch_ = 0;
  double last_accuracy_ = 0.0;
  bool killed_ = false;
  std::optional<EvalOutcome> done_;
};

MockEvaluator::MockEvaluator(std::uint64_t seed, MockProfile profile)
    : seed_(seed), profile_for_([profile = std::move(profile)](int) { return profile; }) {}

MockEvaluator::MockEvaluator(std::uint64_t seed, ProfileFn profile_for)
    : seed_(seed), profile_for_(std::move(profile_for)) {}

MockEvaluator::ProfileFn MockEvaluator::mixed_profiles(std::uint64_t seed, double good_fraction) {
  return [seed, good_fraction](int model_id) {
    std::mt19937_64 rng(derive_seed(seed, {kMixStream, static_cast<std::uint64_t>(model_id)}));
    return unit(rng) < good_fraction ? MockProfile::good() : MockProfile::poor();
  };
}

std::unique_ptr<EvalSession> MockEvaluator::submit(const EvalRequest& req) {
  {
    std::lock_guard lock(mu_);
    ++submissions_;
  }
  return std::make_unique<MockSession>(*this, req, profile_for_(req.model_id));
}

double MockEvaluator::accuracy(int model_id, int epoch) const {
  const MockProfile profile = profile_for_(model_id);
  switch (profile.kind) {
    case MockProfile::Kind::Scripted: {
      if (profile.script.empty()) return 0.0;
      const auto at = std::clamp<std::size_t>(epoch, 1, profile.script.size()) - 1;
      return profile.script[at];
    }
    case MockProfile::Kind::Poor:
      return synthetic_accuracy(seed_, model_id, false, epoch);
    default:
      return synthetic_accuracy(seed_, model_id, true, epoch);
  }
}

void MockEvaluator::record(EvalPhase phase, int model_id, int epoch) {
  std::lock_guard lock(mu_);
  int& served = served_[{phase, model_id}];
  served = std::max(served, epoch);
}

std::map<std::pair<EvalPhase, int>, int> MockEvaluator::epochs_served() const {
  std::lock_guard lock(mu_);
  return served_;
}

int MockEvaluator::submissions() const {
  std::lock_guard lock(mu_);
  return submissions_;
}

}  // namespace dnanas
