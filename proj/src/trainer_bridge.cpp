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

#include "dnanas/trainer_bridge.hpp"

#include <cmath>
#include <stdexcept>

#include "dnanas/arch_decoder.hpp"

namespace dnanas {

const char* to_string(EvalStatus s) noexcept {
  switch (s) {
    case EvalStatus::Completed: return "completed";
    case EvalStatus::EarlyStopped: return "early_stopped";
    case EvalStatus::Failed: return "failed";
  }
  return "failed";
}

std::optional<EvalStatus> status_from_string(const std::string& s) noexcept {
  if (s == "completed") return EvalStatus::Completed;
  if (s == "early_stopped") return EvalStatus::EarlyStopped;
  if (s == "failed") return EvalStatus::Failed;
  return std::nullopt;
}

nlohmann::ordered_json to_wire(const EvalRequest& req) {
  nlohmann::ordered_json doc;
  doc["type"] = "request";
  doc["model_id"] = req.model_id;
  doc["phase"] = req.phase == EvalPhase::Final ? "final" : "search";
  doc["dataset"] = req.dataset;
  doc["epochs"] = req.epochs;
  auto milestones = nlohmann::ordered_json::array();
  for (const auto& m : req.lr.milestones) milestones.push_back({m.epoch, m.rate});
  doc["lr_schedule"] = {{"initial", req.lr.initial}, {"milestones", std::move(milestones)}};
  doc["optimizer"] = {{"name", "momentum"},
                      {"momentum", req.optimizer.momentum},
                      {"weight_decay", req.optimizer.weight_decay}};
  doc["augmentation"] = {{"flip", req.augmentation.flip},
                         {"crop", req.augmentation.crop},
                         {"normalize", req.augmentation.normalize}};
  doc["seed"] = req.seed;
  doc["architecture"] = req.architecture;
  return doc;
}

EvalRequest request_from_wire(const nlohmann::json& doc) {
  try {
    if (doc.at("type") != "request") throw std::invalid_argument("not a request message");
    EvalRequest req;
    req.model_id = doc.at("model_id").get<int>();
    const auto phase = doc.at("phase").get<std::string>();
    if (phase != "search" && phase != "final") throw std::invalid_argument("unknown phase");
    req.phase = phase == "final" ? EvalPhase::Final : EvalPhase::Search;
    req.dataset = doc.at("dataset").get<std::string>();
    req.epochs = doc.at("epochs").get<int>();
    const auto& lr = doc.at("lr_schedule");
    req.lr.initial = lr.at("initial").get<double>();
    req.lr.milestones.clear();
    for (const auto& m : lr.at("milestones")) {
      req.lr.milestones.push_back({m.at(0).get<int>(), m.at(1).get<double>()});
    }
    req.optimizer.momentum = doc.at("optimizer").at("momentum").get<double>();
    req.optimizer.weight_decay = doc.at("optimizer").at("weight_decay").get<double>();
    const auto& aug = doc.at("augmentation");
    req.augmentation = {aug.at("flip").get<bool>(), aug.at("crop").get<bool>(),
                        aug.at("normalize").get<bool>()};
    req.seed = doc.at("seed").get<std::uint64_t>();
    req.architecture = doc.at("architecture");
    return req;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed request: ") + e.what());
  }
}

namespace {

class FixedSession : public EvalSession {
public:
  explicit FixedSession(EvalOutcome outcome) : outcome_(std::move(outcome)) {}
  EvalMessage next() override { return outcome_; }
  void kill() override {}

private:
  EvalOutcome outcome_;
};

class CheckedSession : public EvalSession {
public:
  CheckedSession(std::unique_ptr<EvalSession> inner, int model_id, int budget)
      : inner_(std::move(inner)), model_id_(model_id), budget_(budget) {}

  EvalMessage next() override {
    if (outcome_) return *outcome_;
    if (killed_) return finish_killed();
    EvalMessage msg;
    try {
      msg = inner_->next();
    } catch (const std::exception& e) {
      return fail(std::string("evaluator error: ") + e.what());
    }
    if (auto* outcome = std::get_if<EvalOutcome>(&msg)) {
      outcome_ = *outcome;
      return *outcome_;
    }
    const auto& ev = std::get<EvalEvent>(msg);
    if (ev.model_id != model_id_) {
      return violation("event for model " + std::to_string(ev.model_id));
    }
    if (ev.epoch != last_epoch_ + 1) {
      return violation("epoch " + std::to_string(ev.epoch) + " after " +
                       std::to_string(last_epoch_));
    }
    if (ev.epoch > budget_) return violation("epoch beyond the budget");
    if (!(ev.val_accuracy >= 0.0 && ev.val_accuracy <= 1.0)) {
      return violation("validation accuracy outside [0, 1]");
    }
    if (!std::isfinite(ev.loss)) return fail("non-finite loss at epoch " + std::to_string(ev.epoch));
    last_epoch_ = ev.epoch;
    return ev;
  }

  void kill() override {
    if (killed_ || outcome_) return;
    killed_ = true;
    try {
      inner_->kill();
    } catch (const std::exception&) {
      // The trainer is gone; finish_killed() reports the stop regardless.
    }
  }

private:
  EvalMessage finish_killed() {
    // Epochs the trainer finished before it saw the kill are dropped.
    std::string diagnostics;
    try {
      for (int guard = 0; guard <= budget_ + 1; ++guard) {
        auto msg = inner_->next();
        if (auto* outcome = std::get_if<EvalOutcome>(&msg)) {
          diagnostics = outcome->diagnostics;
          break;
        }
      }
    } catch (const std::exception& e) {
      diagnostics = e.what();
    }
    outcome_ = EvalOutcome{EvalStatus::EarlyStopped, std::move(diagnostics), std::nullopt};
    return *outcome_;
  }

  EvalMessage violation(const std::string& what) {
    try {
      inner_->kill();
    } catch (const std::exception&) {
    }
    return fail("protocol violation: " + what);
  }

  EvalMessage fail(std::string diagnostics) {
    outcome_ = EvalOutcome{EvalStatus::Failed, std::move(diagnostics), std::nullopt};
    return *outcome_;
  }

  std::unique_ptr<EvalSession> inner_;
  int model_id_;
  int budget_;
  int last_epoch_ = 0;
  bool killed_ = false;
  std::optional<EvalOutcome> outcome_;
};

}  // namespace

std::unique_ptr<EvalSession> open_session(Evaluator& evaluator, const EvalRequest& req) {
  auto reject = [](const std::string& why) {
    return std::make_unique<FixedSession>(
        EvalOutcome{EvalStatus::Failed, "rejected: " + why, std::nullopt});
  };
  if (req.epochs < 1) return reject("epoch budget must be >= 1");
  try {
    (void)import_json(req.architecture);
  } catch (const std::exception& e) {
    return reject(e.what());
  }
  std::unique_ptr<EvalSession> inner;
  try {
    inner = evaluator.submit(req);
  } catch (const std::exception& e) {
    return std::make_unique<FixedSession>(EvalOutcome{
        EvalStatus::Failed, std::string("evaluator error: ") + e.what(), std::nullopt});
  }
  return std::make_unique<CheckedSession>(std::move(inner), req.model_id, req.epochs);
}

std::unique_ptr<Evaluator> make_evaluator(const std::string& spec, std::uint64_t seed) {
  const std::string kSubprocess = "subprocess:";
  if (spec.rfind(kSubprocess, 0) == 0) {
    auto command = spec.substr(kSubprocess.size());
    if (command.empty()) throw std::invalid_argument("subprocess evaluator needs a command");
    return std::make_unique<SubprocessEvaluator>(std::move(command));
  }
  if (spec == "mock" || spec == "mock:mixed") {
    return std::make_unique<MockEvaluator>(seed, MockEvaluator::mixed_profiles(seed));
  }
  if (spec == "mock:good") return std::make_unique<MockEvaluator>(seed, MockProfile::good());
  if (spec == "mock:poor") return std::make_unique<MockEvaluator>(seed, MockProfile::poor());
  throw std::invalid_argument("unknown evaluator '" + spec +
                              "' (expected mock[:good|:poor|:mixed] or subprocess:<command>)");
}

}  // namespace dnanas
