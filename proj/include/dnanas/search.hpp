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
 * @file search.hpp
 * @brief The end-to-end search loop: pool, soup, filter, sample, evaluate
 * with early stopping, select the best model and retrain it.
 *
 * Run directory layout:
 *   config.json         effective configuration
 *   strands.txt         sampled architecture strands, line k is model k
 *   models/<id>.json    architecture document per model
 *   reports/<id>.jsonl  one {"epoch","val_acc","loss"} object per epoch
 *   reports/final.jsonl epochs of the final retrain
 *   state.json          per-model terminal status, for resuming
 *   result.json         selection and final accuracy
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dnanas/arch_decoder.hpp"
#include "dnanas/soup_sim.hpp"
#include "dnanas/trainer_bridge.hpp"
#include "dnanas/training_recipe.hpp"

namespace dnanas {

struct SearchConfig {
  int max_depth = 24;
  int copies_per_layer = 300;
  int sample_count = 100;
  SoupParams soup;
  std::string dataset = "cifar10";
  Shape input_shape{32, 32, 3};
  int class_count = 10;
  int epoch_budget = 60;
  std::vector<EarlyStopThreshold> thresholds = default_thresholds();
  LrSchedule lr;
  OptimizerSpec optimizer;
  Augmentation augmentation;
  int parallelism = 1;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument naming the first broken invariant.
  void check() const;

  friend bool operator==(const SearchConfig&, const SearchConfig&) = default;
};

/// Dataset recipe: "cifar10" (32x32x3, 60 epochs, three thresholds, full
/// augmentation) or "mnist" (28x28x1, 10 epochs, no thresholds, normalization
/// only).
SearchConfig preset_config(const std::string& dataset);

/// Depths of the published depth sweep.
std::vector<int> depth_presets();

/// Reads a TOML config. Missing keys fall back to the preset named by
/// `dataset` (default cifar10). Throws std::invalid_argument on bad input.
SearchConfig load_config_toml(const std::string& text);
SearchConfig load_config_file(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const SearchConfig& cfg);

/// Applies the DNANAS_PARALLELISM environment override, if set.
int effective_parallelism(const SearchConfig& cfg);

struct EpochRecord {
  int epoch = 0;
  double val_accuracy = 0.0;
  double loss = 0.0;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct EvalReport {
  int model_id = 0;
  std::vector<EpochRecord> epochs;
  EvalStatus status = EvalStatus::Failed;
  std::optional<EarlyStopThreshold> killed_by;
  std::string diagnostics;
  std::optional<double> test_accuracy;  // final retrain only

  /// Validation accuracy after the last recorded epoch.
  std::optional<double> final_val_accuracy() const;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

class SelectionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argmax of final validation accuracy over completed reports; ties go to the
/// lower model id. Throws SelectionError with a per-model summary when no
/// report completed.
int select_best(std::span<const EvalReport> reports);

/// Runs one model under the early-stop rule: kills it at the first threshold
/// it misses and records nothing past that epoch.
EvalReport evaluate_model(Evaluator& evaluator, const EvalRequest& req,
                          std::span<const EarlyStopThreshold> thresholds);

struct SearchResult {
  int best_model = -1;
  NetworkGraph best_graph;
  double val_accuracy = 0.0;
  EvalStatus final_status = EvalStatus::Failed;
  std::optional<double> test_accuracy;
  std::size_t composite_count = 0;
  std::size_t architecture_count = 0;
  std::vector<EvalReport> reports;
};

struct RunOptions {
  std::filesystem::path out_dir;
  /// Reuse finished models recorded in out_dir/state.json.
  bool resume = false;
  /// Testing hook: stop after this many model evaluations in this call and
  /// throw SearchInterrupted, leaving a resumable run directory.
  std::optional<int> stop_after;
};

class SearchInterrupted : public std::runtime_error {
public:
  SearchInterrupted() : std::runtime_error("search interrupted; resume to continue") {}
};

/// Throws NoArchitecturesError when nothing survives filtering and
/// SelectionError when every model was eliminated.
SearchResult run_search(const SearchConfig& cfg, Evaluator& evaluator, const RunOptions& options);

}  // namespace dnanas
