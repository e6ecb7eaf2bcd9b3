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

#include "dnanas/search.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

namespace dnanas {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) files[fs::relative(entry.path(), dir).string()] = slurp(entry.path());
  }
  return files;
}

class TempDir {
public:
  explicit TempDir(const std::string& name)
      : path_(fs::temp_directory_path() / ("dnanas_" + name + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

private:
  fs::path path_;
};

SearchConfig small_config() {
  SearchConfig cfg;
  cfg.max_depth = 8;
  cfg.copies_per_layer = 20;
  cfg.sample_count = 10;
  cfg.seed = 42;
  return cfg;
}

EvalReport report(int id, std::vector<double> accs, EvalStatus status = EvalStatus::Completed) {
  EvalReport r;
  r.model_id = id;
  for (std::size_t i = 0; i < accs.size(); ++i) r.epochs.push_back({static_cast<int>(i) + 1, accs[i], 1.0});
  r.status = status;
  return r;
}

TEST(ConfigTest, DefaultsAndPresets) {
  const SearchConfig cfg;
  EXPECT_EQ(cfg.max_depth, 24);
  EXPECT_EQ(cfg.epoch_budget, 60);
  EXPECT_EQ(cfg.thresholds, default_thresholds());
  EXPECT_NO_THROW(cfg.check());
  EXPECT_EQ(preset_config("cifar10"), cfg);
  const auto mnist = preset_config("mnist");
  EXPECT_EQ(mnist.input_shape, (Shape{28, 28, 1}));
  EXPECT_NO_THROW(mnist.check());
  EXPECT_THROW(preset_config("imagenet"), std::invalid_argument);
  EXPECT_EQ(depth_presets(), (std::vector<int>{13, 17, 21, 25, 49}));
}

TEST(ConfigTest, LoadsToml) {
  const auto cfg = load_config_toml(R"(
dataset = "cifar10"
seed = 7
max_depth = 13
copies_per_layer = 50
sample_count = 20
epoch_budget = 30
parallelism = 4

[soup]
rounds = 3
join_probability = 0.5

[early_stop]
thresholds = [[5, 0.5], [15, 0.7]]

[lr_schedule]
initial = 0.2
milestones = [[10, 0.02]]
)");
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.max_depth, 13);
  EXPECT_EQ(cfg.copies_per_layer, 50);
  EXPECT_EQ(cfg.sample_count, 20);
  EXPECT_EQ(cfg.epoch_budget, 30);
  EXPECT_EQ(cfg.parallelism, 4);
  EXPECT_EQ(cfg.soup.rounds, 3);
  EXPECT_EQ(cfg.soup.join_probability, 0.5);
  EXPECT_EQ(cfg.thresholds, (std::vector<EarlyStopThreshold>{{5, 0.5}, {15, 0.7}}));
  EXPECT_EQ(cfg.lr.initial, 0.2);
  EXPECT_EQ(cfg.lr.rate(12), 0.02);
}

TEST(ConfigTest, MnistDatasetStartsFromPreset) {
  const auto cfg = load_config_toml("dataset = \"mnist\"\n");
  EXPECT_EQ(cfg.input_shape, (Shape{28, 28, 1}));
}

TEST(ConfigTest, RejectsBadToml) {
  EXPECT_THROW(load_config_toml("max_depth = 2000\n"), std::invalid_argument);
  EXPECT_THROW(load_config_toml("unknown_key = 1\n"), std::invalid_argument);
  EXPECT_THROW(load_config_toml("[soup]\nspeed = 1\n"), std::invalid_argument);
  EXPECT_THROW(load_config_toml("max_depth = \"deep\"\n"), std::invalid_argument);
  EXPECT_THROW(load_config_toml("max_depth = \n"), std::invalid_argument);
  EXPECT_THROW(load_config_toml("[early_stop]\nthresholds = [[20, 0.9], [10, 0.8]]\n"),
               std::invalid_argument);
  EXPECT_THROW(load_config_file("/nonexistent/config.toml"), std::invalid_argument);
}

TEST(ConfigTest, ParallelismEnvOverride) {
  SearchConfig cfg;
  cfg.parallelism = 3;
  ::unsetenv("DNANAS_PARALLELISM");
  EXPECT_EQ(effective_parallelism(cfg), 3);
  ::setenv("DNANAS_PARALLELISM", "5", 1);
  EXPECT_EQ(effective_parallelism(cfg), 5);
  ::setenv("DNANAS_PARALLELISM", "zero", 1);
  EXPECT_THROW(effective_parallelism(cfg), std::invalid_argument);
  ::unsetenv("DNANAS_PARALLELISM");
}

TEST(SelectBestTest, Argmax) {
  const std::vector<EvalReport> r{report(0, {0.91}), report(1, {0.94}), report(2, {0.93})};
  EXPECT_EQ(select_best(r), 1);
}

TEST(SelectBestTest, TieGoesToLowerId) {
  const std::vector<EvalReport> r{report(3, {0.92}), report(0, {0.92}), report(1, {0.90})};
  EXPECT_EQ(select_best(r), 0);
}

TEST(SelectBestTest, IgnoresKilledAndFailed) {
  const std::vector<EvalReport> r{report(0, {0.99}, EvalStatus::EarlyStopped),
                                  report(1, {0.99}, EvalStatus::Failed), report(2, {0.5})};
  EXPECT_EQ(select_best(r), 2);
}

TEST(SelectBestTest, NoSurvivorsIsAnError) {
  const std::vector<EvalReport> r{report(0, {0.3}, EvalStatus::EarlyStopped),
                                  report(1, {}, EvalStatus::Failed)};
  try {
    select_best(r);
    FAIL();
  } catch (const SelectionError& e) {
    EXPECT_NE(std::string(e.what()).find("model 1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(select_best({}), SelectionError);
}

TEST(SelectBestTest, OrderInvariant) {
  std::vector<EvalReport> r;
  for (int i = 0; i < 8; ++i) r.push_back(report(i, {0.9 + (i % 3) * 0.01}));
  const int expected = select_best(r);
  EXPECT_EQ(expected, 2);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    std::shuffle(r.begin(), r.end(), rng);
    EXPECT_EQ(select_best(r), expected);
  }
}

MockEvaluator::ProfileFn three_of_ten_low() {
  return [](int model) {
    if (model == 2 || model == 5 || model == 7) return MockProfile::scripted(std::vector<double>(60, 0.3));
    return MockProfile::good();
  };
}

TEST(RunSearchTest, LowModelsAreEarlyStopped) {
  TempDir dir("low");
  MockEvaluator mock(1, three_of_ten_low());
  const auto result = run_search(small_config(), mock, {dir.path()});
  ASSERT_EQ(result.reports.size(), 10u);
  for (const auto& r : result.reports) {
    const bool low = r.model_id == 2 || r.model_id == 5 || r.model_id == 7;
    EXPECT_EQ(r.status, low ? EvalStatus::EarlyStopped : EvalStatus::Completed) << r.model_id;
    EXPECT_EQ(r.epochs.size(), low ? 10u : 60u);
    EXPECT_EQ((mock.epochs_served().at({EvalPhase::Search, r.model_id})), low ? 10 : 60);
  }
  EXPECT_EQ(result.final_status, EvalStatus::Completed);
  ASSERT_TRUE(result.test_accuracy.has_value());
  EXPECT_NE(result.best_model, 2);

  double best = -1;
  int best_id = -1;
  for (const auto& r : result.reports) {
    if (r.status == EvalStatus::Completed && *r.final_val_accuracy() > best) {
      best = *r.final_val_accuracy();
      best_id = r.model_id;
    }
  }
  EXPECT_EQ(result.best_model, best_id);
  EXPECT_EQ(result.val_accuracy, best);

  const auto doc = nlohmann::json::parse(slurp(dir.path() / "result.json"));
  EXPECT_EQ(doc["status"], "ok");
  EXPECT_EQ(doc["best_model"], best_id);
  EXPECT_TRUE(fs::exists(dir.path() / "reports" / "final.jsonl"));
  EXPECT_TRUE(fs::exists(dir.path() / "models" / "0.json"));
  std::istringstream strands(slurp(dir.path() / "strands.txt"));
  std::string line;
  int lines = 0;
  while (std::getline(strands, line)) ++lines;
  EXPECT_EQ(lines, 10);
}

TEST(RunSearchTest, RerunIsByteIdentical) {
  TempDir a("rerun_a"), b("rerun_b");
  MockEvaluator m1(1, MockEvaluator::mixed_profiles(1)), m2(1, MockEvaluator::mixed_profiles(1));
  run_search(small_config(), m1, {a.path()});
  run_search(small_config(), m2, {b.path()});
  EXPECT_EQ(snapshot(a.path()), snapshot(b.path()));
}

TEST(RunSearchTest, ParallelismDoesNotChangeResult) {
  TempDir a("par_a"), b("par_b");
  auto cfg = small_config();
  MockEvaluator m1(1, MockEvaluator::mixed_profiles(1)), m2(1, MockEvaluator::mixed_profiles(1));
  run_search(cfg, m1, {a.path()});
  cfg.parallelism = 4;
  run_search(cfg, m2, {b.path()});
  auto sa = snapshot(a.path()), sb = snapshot(b.path());
  sa.erase("config.json");
  sb.erase("config.json");
  EXPECT_EQ(sa, sb);
}

TEST(RunSearchTest, ResumeMatchesUninterruptedRun) {
  TempDir full("resume_full"), part("resume_part");
  MockEvaluator m1(1, MockEvaluator::mixed_profiles(1));
  run_search(small_config(), m1, {full.path()});

  MockEvaluator m2(1, MockEvaluator::mixed_profiles(1));
  EXPECT_THROW(run_search(small_config(), m2, {part.path(), false, 4}), SearchInterrupted);
  EXPECT_FALSE(fs::exists(part.path() / "result.json"));
  MockEvaluator m3(1, MockEvaluator::mixed_profiles(1));
  run_search(small_config(), m3, {part.path(), true});
  EXPECT_EQ(snapshot(full.path()), snapshot(part.path()));
  EXPECT_LE(m3.submissions(), 10 - 4 + 1);
}

TEST(RunSearchTest, ResumeRejectsDifferentConfig) {
  TempDir dir("resume_cfg");
  MockEvaluator m1(1, MockProfile::good());
  EXPECT_THROW(run_search(small_config(), m1, {dir.path(), false, 2}), SearchInterrupted);
  auto cfg = small_config();
  cfg.seed = 43;
  MockEvaluator m2(1, MockProfile::good());
  EXPECT_THROW(run_search(cfg, m2, {dir.path(), true}), std::runtime_error);
}

TEST(RunSearchTest, FailedModelDoesNotAbortSearch) {
  TempDir dir("failed");
  MockEvaluator mock(1, [](int model) {
    return model == 0 ? MockProfile::failing(3) : MockProfile::good();
  });
  const auto result = run_search(small_config(), mock, {dir.path()});
  EXPECT_EQ(result.reports[0].status, EvalStatus::Failed);
  EXPECT_NE(result.best_model, 0);
  EXPECT_EQ(result.final_status, EvalStatus::Completed);
}

TEST(RunSearchTest, AllKilledReportsNoSurvivors) {
  TempDir dir("all_killed");
  MockEvaluator mock(1, MockProfile::poor());
  EXPECT_THROW(run_search(small_config(), mock, {dir.path()}), SelectionError);
  const auto doc = nlohmann::json::parse(slurp(dir.path() / "result.json"));
  EXPECT_EQ(doc["status"], "no_survivors");
}

TEST(RunSearchTest, NoLigationLeavesSingleLayerModels) {
  TempDir dir("singletons");
  auto cfg = small_config();
  cfg.soup.join_probability = 0.0;
  MockEvaluator mock(1, MockProfile::good());
  const auto result = run_search(cfg, mock, {dir.path()});
  EXPECT_EQ(result.architecture_count, 20u);
  EXPECT_EQ(result.best_graph.layers().size(), 1u);
}

}  // namespace
}  // namespace dnanas
