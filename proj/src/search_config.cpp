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

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

#include <toml++/toml.hpp>

#include "dnanas/search.hpp"

namespace dnanas {

void SearchConfig::check() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
  if (max_depth < 1 || max_depth > kMaxDepthLimit) fail("max_depth must lie in [1, 1023]");
  if (copies_per_layer < 1) fail("copies_per_layer must be >= 1");
  if (sample_count < 1) fail("sample_count must be >= 1");
  check_soup_params(soup);
  if (dataset.empty()) fail("dataset must be set");
  if (input_shape.height < 1 || input_shape.width < 1 || input_shape.channels < 1) {
    fail("input_shape dims must be >= 1");
  }
  if (class_count < 1) fail("classes must be >= 1");
  if (epoch_budget < 1) fail("epoch_budget must be >= 1");
  check_thresholds(thresholds);
  if (!thresholds.empty() && epoch_budget < thresholds.back().epoch) {
    fail("epoch_budget is below the last early-stop threshold epoch");
  }
  lr.check();
  if (parallelism < 1) fail("parallelism must be >= 1");
}

SearchConfig preset_config(const std::string& dataset) {
  SearchConfig cfg;
  if (dataset == "cifar10") return cfg;
  if (dataset == "mnist") {
    cfg.dataset = "mnist";
    cfg.input_shape = {28, 28, 1};
    cfg.epoch_budget = 10;
    cfg.thresholds.clear();
    cfg.augmentation = {false, false, true};
    return cfg;
  }
  throw std::invalid_argument("config: unknown dataset preset '" + dataset + "'");
}

std::vector<int> depth_presets() { return {13, 17, 21, 25, 49}; }

namespace {

using Keys = std::set<std::string_view>;

void reject_unknown(const toml::table& tbl, const Keys& known, const std::string& where) {
  for (const auto& [key, node] : tbl) {
    if (!known.contains(key.str())) {
      throw std::invalid_argument("config: unknown key '" + where + std::string(key.str()) + "'");
    }
  }
}

template <typename T>
void read(const toml::table& tbl, std::string_view key, T& out, const std::string& where) {
  const toml::node* node = tbl.get(key);
  if (!node) return;
  std::optional<T> v;
  if constexpr (std::is_same_v<T, double>) {
    if (node->is_integer() || node->is_floating_point()) v = node->value<double>();
  } else if constexpr (std::is_same_v<T, bool>) {
    v = node->value_exact<bool>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    v = node->value_exact<std::string>();
  } else {
    if (auto i = node->value_exact<std::int64_t>()) v = static_cast<T>(*i);
  }
  if (!v) throw std::invalid_argument("config: '" + where + std::string(key) + "' has the wrong type");
  out = *v;
}

/// [[int, float], ...] pairs.
std::vector<std::pair<int, double>> read_pairs(const toml::table& tbl, std::string_view key,
                                               const std::string& where) {
  const auto* arr = tbl.get_as<toml::array>(key);
  if (!arr) throw std::invalid_argument("config: '" + where + std::string(key) + "' must be an array");
  std::vector<std::pair<int, double>> out;
  for (const auto& item : *arr) {
    const auto* pair = item.as_array();
    if (!pair || pair->size() != 2 || !(*pair)[0].is_integer() ||
        !((*pair)[1].is_floating_point() || (*pair)[1].is_integer())) {
      throw std::invalid_argument("config: '" + where + std::string(key) +
                                  "' entries must be [epoch, value]");
    }
    out.emplace_back(static_cast<int>(*(*pair)[0].value<std::int64_t>()),
                     *(*pair)[1].value<double>());
  }
  return out;
}

const toml::table* section(const toml::table& root, std::string_view name) {
  const toml::node* node = root.get(name);
  if (!node) return nullptr;
  if (!node->is_table()) throw std::invalid_argument("config: '" + std::string(name) + "' must be a table");
  return node->as_table();
}

}  // namespace

SearchConfig load_config_toml(const std::string& text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config: " << e.description() << " at line " << e.source().begin.line;
    throw std::invalid_argument(msg.str());
  }
  reject_unknown(root,
                 {"dataset", "seed", "max_depth", "copies_per_layer", "sample_count",
                  "epoch_budget", "input_shape", "classes", "parallelism", "soup", "early_stop",
                  "lr_schedule", "optimizer", "augmentation"},
                 "");

  std::string dataset = "cifar10";
  read(root, "dataset", dataset, "");
  SearchConfig cfg = preset_config(dataset);

  std::int64_t seed = 0;
  if (root.contains("seed")) {
    read(root, "seed", seed, "");
    if (seed < 0) throw std::invalid_argument("config: seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }
  read(root, "max_depth", cfg.max_depth, "");
  read(root, "copies_per_layer", cfg.copies_per_layer, "");
  read(root, "sample_count", cfg.sample_count, "");
  read(root, "epoch_budget", cfg.epoch_budget, "");
  read(root, "classes", cfg.class_count, "");
  read(root, "parallelism", cfg.parallelism, "");
  if (const auto* shape = root.get_as<toml::array>("input_shape")) {
    if (shape->size() != 3 || !shape->is_homogeneous<std::int64_t>()) {
      throw std::invalid_argument("config: input_shape must be [height, width, channels]");
    }
    cfg.input_shape = {static_cast<int>(*(*shape)[0].value<std::int64_t>()),
                       static_cast<int>(*(*shape)[1].value<std::int64_t>()),
                       static_cast<int>(*(*shape)[2].value<std::int64_t>())};
  } else if (root.contains("input_shape")) {
    throw std::invalid_argument("config: input_shape must be an array");
  }

  if (const auto* soup = section(root, "soup")) {
    reject_unknown(*soup, {"rounds", "join_probability", "threads"}, "soup.");
    read(*soup, "rounds", cfg.soup.rounds, "soup.");
    read(*soup, "join_probability", cfg.soup.join_probability, "soup.");
    read(*soup, "threads", cfg.soup.threads, "soup.");
  }
  if (const auto* stop = section(root, "early_stop")) {
    reject_unknown(*stop, {"thresholds"}, "early_stop.");
    if (stop->contains("thresholds")) {
      cfg.thresholds.clear();
      for (auto [epoch, acc] : read_pairs(*stop, "thresholds", "early_stop.")) {
        cfg.thresholds.push_back({epoch, acc});
      }
    }
  }
  if (const auto* lr = section(root, "lr_schedule")) {
    reject_unknown(*lr, {"initial", "milestones"}, "lr_schedule.");
    read(*lr, "initial", cfg.lr.initial, "lr_schedule.");
    if (lr->contains("milestones")) {
      cfg.lr.milestones.clear();
      for (auto [epoch, rate] : read_pairs(*lr, "milestones", "lr_schedule.")) {
        cfg.lr.milestones.push_back({epoch, rate});
      }
    }
  }
  if (const auto* opt = section(root, "optimizer")) {
    reject_unknown(*opt, {"momentum", "weight_decay"}, "optimizer.");
    read(*opt, "momentum", cfg.optimizer.momentum, "optimizer.");
    read(*opt, "weight_decay", cfg.optimizer.weight_decay, "optimizer.");
  }
  if (const auto* aug = section(root, "augmentation")) {
    reject_unknown(*aug, {"flip", "crop", "normalize"}, "augmentation.");
    read(*aug, "flip", cfg.augmentation.flip, "augmentation.");
    read(*aug, "crop", cfg.augmentation.crop, "augmentation.");
    read(*aug, "normalize", cfg.augmentation.normalize, "augmentation.");
  }
  cfg.check();
  return cfg;
}

SearchConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return load_config_toml(text.str());
}

nlohmann::ordered_json to_json(const SearchConfig& cfg) {
  nlohmann::ordered_json doc;
  doc["dataset"] = cfg.dataset;
  doc["seed"] = cfg.seed;
  doc["max_depth"] = cfg.max_depth;
  doc["copies_per_layer"] = cfg.copies_per_layer;
  doc["sample_count"] = cfg.sample_count;
  doc["epoch_budget"] = cfg.epoch_budget;
  doc["input_shape"] = {cfg.input_shape.height, cfg.input_shape.width, cfg.input_shape.channels};
  doc["classes"] = cfg.class_count;
  doc["parallelism"] = cfg.parallelism;
  doc["soup"] = {{"rounds", cfg.soup.rounds}, {"join_probability", cfg.soup.join_probability}};
  auto thresholds = nlohmann::ordered_json::array();
  for (const auto& t : cfg.thresholds) thresholds.push_back({t.epoch, t.min_accuracy});
  doc["early_stop"] = {{"thresholds", std::move(thresholds)}};
  auto milestones = nlohmann::ordered_json::array();
  for (const auto& m : cfg.lr.milestones) milestones.push_back({m.epoch, m.rate});
  doc["lr_schedule"] = {{"initial", cfg.lr.initial}, {"milestones", std::move(milestones)}};
  doc["optimizer"] = {{"momentum", cfg.optimizer.momentum},
                      {"weight_decay", cfg.optimizer.weight_decay}};
  doc["augmentation"] = {{"flip", cfg.augmentation.flip},
                         {"crop", cfg.augmentation.crop},
                         {"normalize", cfg.augmentation.normalize}};
  return doc;
}

int effective_parallelism(const SearchConfig& cfg) {
  if (const char* env = std::getenv("DNANAS_PARALLELISM"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) {
      throw std::invalid_argument("DNANAS_PARALLELISM must be a positive integer");
    }
    return static_cast<int>(v);
  }
  return cfg.parallelism;
}

}  // namespace dnanas
