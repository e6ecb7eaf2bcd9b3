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

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <utility>

#include "dnanas/seed.hpp"

namespace dnanas {

namespace fs = std::filesystem;

namespace {

enum StreamTag : std::uint64_t {
  kPoolTag = 101,
  kSoupTag = 102,
  kSampleTag = 103,
  kEvalTag = 104,
  kFinalTag = 105,
};

void write_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::string epochs_jsonl(const std::vector<EpochRecord>& epochs) {
  std::string out;
  for (const auto& e : epochs) {
    nlohmann::ordered_json line;
    line["epoch"] = e.epoch;
    line["val_acc"] = e.val_accuracy;
    line["loss"] = e.loss;
    out += line.dump() + "\n";
  }
  return out;
}

std::vector<EpochRecord> parse_jsonl(const std::string& text) {
  std::vector<EpochRecord> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    out.push_back({j.at("epoch").get<int>(), j.at("val_acc").get<double>(),
                   j.at("loss").get<double>()});
  }
  return out;
}

nlohmann::ordered_json status_entry(const EvalReport& r) {
  nlohmann::ordered_json entry;
  entry["id"] = r.model_id;
  entry["status"] = to_string(r.status);
  entry["epochs"] = r.epochs.size();
  if (auto acc = r.final_val_accuracy()) {
    entry["final_val_acc"] = *acc;
  } else {
    entry["final_val_acc"] = nullptr;
  }
  if (r.killed_by) {
    entry["killed_at"] = {{"epoch", r.killed_by->epoch},
                          {"min_accuracy", r.killed_by->min_accuracy}};
  }
  if (!r.diagnostics.empty()) entry["diagnostics"] = r.diagnostics;
  return entry;
}

nlohmann::ordered_json models_summary(const std::map<int, EvalReport>& finished) {
  auto models = nlohmann::ordered_json::array();
  for (const auto& [id, report] : finished) models.push_back(status_entry(report));
  return models;
}

EvalRequest make_request(const SearchConfig& cfg, int model_id,
                         const nlohmann::ordered_json& architecture, EvalPhase phase) {
  EvalRequest req;
  req.model_id = model_id;
  req.architecture = architecture;
  req.dataset = cfg.dataset;
  req.phase = phase;
  req.epochs = cfg.epoch_budget;
  req.lr = cfg.lr;
  req.optimizer = cfg.optimizer;
  req.augmentation = cfg.augmentation;
  req.seed = derive_seed(cfg.seed, {phase == EvalPhase::Final ? kFinalTag : kEvalTag,
                                    static_cast<std::uint64_t>(model_id)});
  return req;
}

std::map<int, EvalReport> load_state(const fs::path& dir) {
  std::map<int, EvalReport> finished;
  const fs::path state_path = dir / "state.json";
  if (!fs::exists(state_path)) return finished;
  const auto state = nlohmann::json::parse(read_file(state_path));
  for (const auto& entry : state.at("models")) {
    EvalReport r;
    r.model_id = entry.at("id").get<int>();
    auto status = status_from_string(entry.at("status").get<std::string>());
    if (!status) throw std::runtime_error("state.json: unknown status for model " +
                                          std::to_string(r.model_id));
    r.status = *status;
    if (entry.contains("killed_at")) {
      r.killed_by = EarlyStopThreshold{entry["killed_at"].at("epoch").get<int>(),
                                       entry["killed_at"].at("min_accuracy").get<double>()};
    }
    r.diagnostics = entry.value("diagnostics", std::string{});
    r.epochs = parse_jsonl(read_file(dir / "reports" / (std::to_string(r.model_id) + ".jsonl")));
    finished.emplace(r.model_id, std::move(r));
  }
  return finished;
}

}  // namespace

std::optional<double> EvalReport::final_val_accuracy() const {
  if (epochs.empty()) return std::nullopt;
  return epochs.back().val_accuracy;
}

int select_best(std::span<const EvalReport> reports) {
  const EvalReport* best = nullptr;
  for (const auto& r : reports) {
    if (r.status != EvalStatus::Completed || r.epochs.empty()) continue;
    const double acc = *r.final_val_accuracy();
    if (!best || acc > *best->final_val_accuracy() ||
        (acc == *best->final_val_accuracy() && r.model_id < best->model_id)) {
      best = &r;
    }
  }
  if (best) return best->model_id;

  std::ostringstream msg;
  msg << "all " << reports.size() << " models were eliminated:";
  std::vector<const EvalReport*> sorted;
  for (const auto& r : reports) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](auto* a, auto* b) { return a->model_id < b->model_id; });
  for (const auto* r : sorted) {
    msg << "\n  model " << r->model_id << ": " << to_string(r->status);
    if (r->killed_by) {
      msg << " at epoch " << r->killed_by->epoch << " (below " << r->killed_by->min_accuracy
          << ")";
    }
    if (!r->diagnostics.empty()) msg << " - " << r->diagnostics.substr(0, 120);
  }
  throw SelectionError(msg.str());
}

EvalReport evaluate_model(Evaluator& evaluator, const EvalRequest& req,
                          std::span<const EarlyStopThreshold> thresholds) {
  EvalReport report;
  report.model_id = req.model_id;
  auto session = open_session(evaluator, req);
  std::vector<double> history;
  for (;;) {
    auto msg = session->next();
    if (auto* outcome = std::get_if<EvalOutcome>(&msg)) {
      report.status = outcome->status;
      report.diagnostics = outcome->diagnostics;
      report.test_accuracy = outcome->test_accuracy;
      return report;
    }
    const auto& ev = std::get<EvalEvent>(msg);
    report.epochs.push_back({ev.epoch, ev.val_accuracy, ev.loss});
    history.push_back(ev.val_accuracy);
    if (auto check = early_stop_check(history, thresholds); check.decision == StopDecision::Kill) {
      session->kill();
      auto final_msg = session->next();
      report.status = EvalStatus::EarlyStopped;
      report.killed_by = check.threshold;
      if (auto* outcome = std::get_if<EvalOutcome>(&final_msg)) {
        report.diagnostics = outcome->diagnostics;
      }
      return report;
    }
  }
}

SearchResult run_search(const SearchConfig& cfg, Evaluator& evaluator, const RunOptions& options) {
  cfg.check();
  const int parallelism = effective_parallelism(cfg);
  const fs::path& dir = options.out_dir;
  if (dir.empty()) throw std::invalid_argument("run_search needs an output directory");
  fs::create_directories(dir / "models");
  fs::create_directories(dir / "reports");

  SearchResult result;
  const auto pool = generate_pool(cfg.max_depth, cfg.copies_per_layer,
                                  derive_seed(cfg.seed, {kPoolTag}));
  const auto composites = run_soup(pool, cfg.soup, derive_seed(cfg.seed, {kSoupTag}));
  const auto archs = filter_architecture_strands(composites);
  result.composite_count = composites.size();
  result.architecture_count = archs.size();
  const auto sampled =
      sample_models(archs, cfg.sample_count, derive_seed(cfg.seed, {kSampleTag}));

  std::string strands_text;
  for (const auto& a : sampled) strands_text += serialize_strand_line(a.strand()) + "\n";
  const std::string config_text = to_json(cfg).dump(2) + "\n";
  if (options.resume) {
    for (const auto& [name, expected] : {std::pair{"strands.txt", &std::as_const(strands_text)},
                                         std::pair{"config.json", &config_text}}) {
      if (fs::exists(dir / name) && read_file(dir / name) != *expected) {
        throw std::runtime_error(std::string("cannot resume: ") + name +
                                 " was produced by a different configuration");
      }
    }
  }
  write_file(dir / "config.json", config_text);
  write_file(dir / "strands.txt", strands_text);

  const int model_count = static_cast<int>(sampled.size());
  std::vector<NetworkGraph> graphs;
  std::vector<nlohmann::ordered_json> docs;
  graphs.reserve(model_count);
  docs.reserve(model_count);
  for (int id = 0; id < model_count; ++id) {
    graphs.push_back(decode_model(sampled[id], cfg.max_depth, cfg.input_shape, cfg.class_count));
    docs.push_back(export_json(graphs.back()));
    write_file(dir / "models" / (std::to_string(id) + ".json"), docs.back().dump(2) + "\n");
  }

  std::map<int, EvalReport> finished;
  if (options.resume) {
    finished = load_state(dir);
    std::erase_if(finished, [&](const auto& kv) { return kv.first >= model_count; });
  }
  std::vector<int> pending;
  for (int id = 0; id < model_count; ++id) {
    if (!finished.contains(id)) pending.push_back(id);
  }

  // Workers only evaluate; all bookkeeping and file writes go through mu.
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::atomic<int> started{0};
  auto worker = [&] {
    for (;;) {
      if (options.stop_after && started.fetch_add(1) >= *options.stop_after) return;
      const std::size_t slot = next.fetch_add(1);
      if (slot >= pending.size()) return;
      const int id = pending[slot];
      EvalReport report = evaluate_model(
          evaluator, make_request(cfg, id, docs[id], EvalPhase::Search), cfg.thresholds);
      std::lock_guard lock(mu);
      write_file(dir / "reports" / (std::to_string(id) + ".jsonl"), epochs_jsonl(report.epochs));
      finished[id] = std::move(report);
      nlohmann::ordered_json state;
      state["models"] = models_summary(finished);
      write_file(dir / "state.json", state.dump(2) + "\n");
    }
  };
  const int threads = std::clamp<int>(parallelism, 1, std::max<int>(1, pending.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool_threads;
    for (int t = 0; t < threads; ++t) pool_threads.emplace_back(worker);
  }
  if (static_cast<int>(finished.size()) < model_count) throw SearchInterrupted();

  for (auto& [id, report] : finished) result.reports.push_back(report);

  nlohmann::ordered_json out;
  nlohmann::ordered_json counts;
  counts["layer_strands"] = pool.size();
  counts["composites"] = result.composite_count;
  counts["architectures"] = result.architecture_count;
  counts["sampled"] = model_count;

  try {
    result.best_model = select_best(result.reports);
  } catch (const SelectionError& e) {
    out["status"] = "no_survivors";
    out["error"] = e.what();
    out["counts"] = counts;
    out["models"] = models_summary(finished);
    write_file(dir / "result.json", out.dump(2) + "\n");
    throw;
  }
  const int best = result.best_model;
  result.best_graph = graphs[best];
  result.val_accuracy = *finished[best].final_val_accuracy();

  // Final retrain on train+validation: full budget, no early stop.
  EvalReport final_report = evaluate_model(
      evaluator, make_request(cfg, best, docs[best], EvalPhase::Final), {});
  result.final_status = final_report.status;
  write_file(dir / "reports" / "final.jsonl", epochs_jsonl(final_report.epochs));
  result.test_accuracy = final_report.test_accuracy;

  out["status"] = "ok";
  out["best_model"] = best;
  out["val_acc"] = result.val_accuracy;
  nlohmann::ordered_json final_entry;
  final_entry["status"] = to_string(final_report.status);
  final_entry["epochs"] = final_report.epochs.size();
  if (final_report.test_accuracy) {
    final_entry["test_acc"] = *final_report.test_accuracy;
  } else {
    final_entry["test_acc"] = nullptr;
  }
  if (!final_report.diagnostics.empty()) final_entry["diagnostics"] = final_report.diagnostics;
  out["final"] = final_entry;
  out["counts"] = counts;
  out["models"] = models_summary(finished);
  out["architecture"] = docs[best];
  out["parameters"] = count_params(result.best_graph);
  write_file(dir / "result.json", out.dump(2) + "\n");
  return result;
}

}  // namespace dnanas
