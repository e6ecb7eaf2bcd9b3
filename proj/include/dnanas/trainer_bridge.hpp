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
 * @file trainer_bridge.hpp
 * @brief Evaluator contract between the search loop and any trainer.
 *
 * An evaluation is a session: the caller submits an EvalRequest and pulls
 * messages until a terminal EvalOutcome arrives. Every pulled EvalEvent is
 * one completed epoch. kill() asks the trainer to stop; the session then
 * reports early_stopped and delivers no further epochs.
 *
 * Subprocess wire protocol (newline-delimited JSON, one object per line):
 *   stdin  <- {"type":"request", ...}      once, see to_wire()
 *   stdin  <- {"type":"kill"}              at most once
 *   stdout -> {"type":"epoch","model_id":m,"epoch":e,"val_acc":a,"loss":l}
 *   stdout -> {"type":"done","status":"completed"|"early_stopped"|"failed",
 *              "diagnostics":"...","test_acc":t}   (diagnostics/test_acc optional)
 */
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "dnanas/training_recipe.hpp"

namespace dnanas {

enum class EvalPhase { Search, Final };

struct EvalRequest {
  int model_id = 0;
  nlohmann::ordered_json architecture;  // arch_decoder export_json document
  std::string dataset = "cifar10";
  EvalPhase phase = EvalPhase::Search;  // Final trains on train+validation
  int epochs = 60;
  LrSchedule lr;
  OptimizerSpec optimizer;
  Augmentation augmentation;
  std::uint64_t seed = 0;
};

nlohmann::ordered_json to_wire(const EvalRequest& req);
EvalRequest request_from_wire(const nlohmann::json& doc);

struct EvalEvent {
  int model_id = 0;
  int epoch = 0;
  double val_accuracy = 0.0;
  double loss = 0.0;
  friend bool operator==(const EvalEvent&, const EvalEvent&) = default;
};

enum class EvalStatus { Completed, EarlyStopped, Failed };

const char* to_string(EvalStatus s) noexcept;
std::optional<EvalStatus> status_from_string(const std::string& s) noexcept;

struct EvalOutcome {
  EvalStatus status = EvalStatus::Completed;
  std::string diagnostics;
  std::optional<double> test_accuracy;  // final phase only
};

using EvalMessage = std::variant<EvalEvent, EvalOutcome>;

class EvalSession {
public:
  virtual ~EvalSession() = default;
  /// Blocks for the next message. Once an EvalOutcome has been returned,
  /// later calls return it again.
  virtual EvalMessage next() = 0;
  virtual void kill() = 0;
};

class Evaluator {
public:
  virtual ~Evaluator() = default;
  /// Raw session with no contract checks; use open_session().
  virtual std::unique_ptr<EvalSession> submit(const EvalRequest& req) = 0;
};

/// Validates the request's architecture, then submits it. The returned
/// session enforces the contract: epochs arrive as 1, 2, 3, ... up to the
/// budget, accuracies lie in [0, 1], and nothing but early_stopped follows a
/// kill. Violations and submit() exceptions become a failed outcome. Rejected
/// requests yield a failed outcome with zero events.
std::unique_ptr<EvalSession> open_session(Evaluator& evaluator, const EvalRequest& req);

/// Deterministic in-process evaluator producing synthetic learning curves.
struct MockProfile {
  enum class Kind { Good, Poor, Scripted, Failing };
  Kind kind = Kind::Good;
  std::vector<double> script;  // Scripted: accuracy per epoch
  int fail_after = 0;          // Failing: epochs emitted before the failure

  static MockProfile good() { return {Kind::Good, {}, 0}; }
  static MockProfile poor() { return {Kind::Poor, {}, 0}; }
  static MockProfile scripted(std::vector<double> accuracies) {
    return {Kind::Scripted, std::move(accuracies), 0};
  }
  static MockProfile failing(int after_epochs) { return {Kind::Failing, {}, after_epochs}; }
};

class MockEvaluator : public Evaluator {
public:
  using ProfileFn = std::function<MockProfile(int model_id)>;

  MockEvaluator(std::uint64_t seed, MockProfile profile);
  MockEvaluator(std::uint64_t seed, ProfileFn profile_for);
  /// Mixed population: each model is good with probability good_fraction.
  static ProfileFn mixed_profiles(std::uint64_t seed, double good_fraction = 0.85);

  std::unique_ptr<EvalSession> submit(const EvalRequest& req) override;

  /// Accuracy the curve reaches after `epoch` (1-indexed) for a model.
  double accuracy(int model_id, int epoch) const;

  /// Highest epoch served per (phase, model) so far; for contract tests.
  std::map<std::pair<EvalPhase, int>, int> epochs_served() const;
  int submissions() const;

private:
  friend class MockSession;
  void record(EvalPhase phase, int model_id, int epoch);

  std::uint64_t seed_;
  ProfileFn profile_for_;
  mutable std::mutex mu_;
  std::map<std::pair<EvalPhase, int>, int> served_;
  int submissions_ = 0;
};

/// Spawns `/bin/sh -c command` per evaluation and speaks the wire protocol
/// over its stdin/stdout. stderr is captured for failure diagnostics.
/// Constructing one ignores SIGPIPE process-wide so a dead trainer surfaces
/// as a failed write rather than a signal.
class SubprocessEvaluator : public Evaluator {
public:
  explicit SubprocessEvaluator(std::string command);
  std::unique_ptr<EvalSession> submit(const EvalRequest& req) override;
  const std::string& command() const noexcept { return command_; }

private:
  std::string command_;
};

/// "mock", "mock:good", "mock:poor", "mock:mixed" or "subprocess:<command>".
std::unique_ptr<Evaluator> make_evaluator(const std::string& spec, std::uint64_t seed);

}  // namespace dnanas
