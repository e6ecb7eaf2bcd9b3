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

// Command-line front end: strand codec, soup simulation, decoding, search.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dnanas/arch_decoder.hpp"
#include "dnanas/search.hpp"
#include "dnanas/soup_sim.hpp"
#include "dnanas/strand_codec.hpp"
#include "dnanas/trainer_bridge.hpp"

namespace fs = std::filesystem;
using namespace dnanas;

namespace {

std::string read_all(std::istream& in) {
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string describe(const LayerSpec& spec) {
  std::ostringstream out;
  out << "layer " << spec.index << ": ";
  if (spec.kind == LayerKind::Convolution) {
    out << "conv " << spec.kernel_size << "x" << spec.kernel_size << " " << *spec.channels << "ch";
  } else {
    out << "pool " << spec.kernel_size << "x" << spec.kernel_size;
  }
  if (spec.skip_source) out << " skip_from=" << *spec.skip_source;
  return out.str();
}

int cmd_decode_strand(const std::vector<std::string>& strands, int max_depth) {
  std::string text;
  if (strands.empty()) {
    text = read_all(std::cin);
  } else {
    for (const auto& s : strands) text += s + " ";
  }
  const auto strand = parse_strand(text);
  for (const auto& layer : strand.layers) {
    std::cout << describe(decode_layer_strand(layer, max_depth)) << "\n";
  }
  return 0;
}

struct EncodeArgs {
  int index = 0;
  int max_depth = 24;
  std::uint64_t seed = 0;
  std::optional<int> type, kernel, channel, skip;
};

int cmd_encode_layer(const EncodeArgs& a) {
  LayerStrand strand;
  if (a.type || a.kernel || a.channel || a.skip) {
    strand = make_layer_strand(a.index, a.max_depth,
                               FragmentValues{a.type.value_or(0), a.kernel.value_or(0),
                                              a.channel.value_or(0), a.skip.value_or(0)});
  } else {
    std::mt19937_64 rng(a.seed);
    strand = make_layer_strand(a.index, a.max_depth, rng);
  }
  std::cout << serialize_layer_strand(strand) << "\n";
  return 0;
}

struct SoupArgs {
  int max_depth = 24;
  int copies = 300;
  SoupParams params;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_soup(const SoupArgs& a) {
  const auto pool = generate_pool(a.max_depth, a.copies, a.seed);
  const auto composites = run_soup(pool, a.params, a.seed);
  const auto archs = filter_architecture_strands(composites);
  std::ofstream out(a.out);
  if (!out) throw std::runtime_error("cannot write " + a.out);
  for (const auto& arch : archs) out << serialize_strand_line(arch.strand()) << "\n";
  std::cout << "layer strands: " << pool.size() << "\ncomposites: " << composites.size()
            << "\narchitecture strands: " << archs.size() << "\n";
  return 0;
}

struct DecodeArgs {
  std::string in;
  std::string out_dir;
  std::string input_shape = "32x32x3";
  int classes = 10;
  int max_depth = 24;
  std::string format = "json";
};

int cmd_decode(const DecodeArgs& a) {
  std::ifstream in(a.in);
  if (!in) throw std::runtime_error("cannot read " + a.in);
  const Shape shape = parse_shape(a.input_shape);
  fs::create_directories(a.out_dir);
  int id = 0;
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    NetworkGraph g;
    try {
      g = decode_model(ArchitectureStrand(parse_strand(line)), a.max_depth, shape, a.classes);
    } catch (const std::exception& e) {
      throw std::runtime_error(a.in + ":" + std::to_string(line_no) + ": " + e.what());
    }
    const fs::path path = fs::path(a.out_dir) / (std::to_string(id) + "." + a.format);
    std::ofstream out(path);
    if (a.format == "json") {
      out << export_json(g).dump(2) << "\n";
    } else {
      out << export_dot(g);
    }
    ++id;
  }
  std::cout << "decoded " << id << " architectures into " << a.out_dir << "\n";
  return 0;
}

struct SearchArgs {
  std::string config;
  std::string evaluator = "mock";
  std::string out_dir;
  bool resume = false;
};

int cmd_search(const SearchArgs& a) {
  const SearchConfig cfg = load_config_file(a.config);
  auto evaluator = make_evaluator(a.evaluator, cfg.seed);
  RunOptions options;
  options.out_dir = a.out_dir;
  options.resume = a.resume;
  try {
    const auto result = run_search(cfg, *evaluator, options);
    std::cout << "architecture strands: " << result.architecture_count << "\n"
              << "models evaluated: " << result.reports.size() << "\n"
              << "best model: " << result.best_model << " (val_acc " << result.val_accuracy
              << ")\nfinal retrain: " << to_string(result.final_status);
    if (result.test_accuracy) std::cout << " (test_acc " << *result.test_accuracy << ")";
    std::cout << "\n";
  } catch (const NoArchitecturesError& e) {
    std::cerr << "search failed: " << e.what() << "\n";
    return 2;
  } catch (const SelectionError& e) {
    std::cerr << "search failed: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DNA-computing architecture search"};
  app.require_subcommand(1);

  auto* decode_strand = app.add_subcommand("decode-strand", "Decode strand text into layer specs");
  std::vector<std::string> strand_args;
  int decode_strand_depth = 24;
  decode_strand->add_option("strand", strand_args, "Strand text (reads stdin when omitted)");
  decode_strand->add_option("--max-depth", decode_strand_depth, "Maximum depth N")
      ->check(CLI::Range(1, kMaxDepthLimit));

  auto* encode_layer = app.add_subcommand("encode-layer", "Build one Layer Strand");
  EncodeArgs encode;
  encode_layer->add_option("--index", encode.index, "Layer index")->required();
  encode_layer->add_option("--max-depth", encode.max_depth, "Maximum depth N")
      ->check(CLI::Range(1, kMaxDepthLimit));
  encode_layer->add_option("--seed", encode.seed, "Seed for the free fragments");
  encode_layer->add_option("--type", encode.type, "Layer type value")->check(CLI::Range(0, 1023));
  encode_layer->add_option("--kernel", encode.kernel, "Kernel value")->check(CLI::Range(0, 1023));
  encode_layer->add_option("--channel", encode.channel, "Channel value")->check(CLI::Range(0, 1023));
  encode_layer->add_option("--skip", encode.skip, "Skip value")->check(CLI::Range(0, 1023));

  auto* soup = app.add_subcommand("soup", "Ligate a strand pool and write architecture strands");
  SoupArgs soup_args;
  soup->add_option("--max-depth", soup_args.max_depth, "Maximum depth N")
      ->check(CLI::Range(1, kMaxDepthLimit));
  soup->add_option("--copies-per-layer", soup_args.copies, "Copies P of each Layer Strand")
      ->check(CLI::PositiveNumber);
  soup->add_option("--rounds", soup_args.params.rounds, "Ligation rounds")
      ->check(CLI::PositiveNumber);
  soup->add_option("--join-prob", soup_args.params.join_probability, "Junction success probability")
      ->check(CLI::Range(0.0, 1.0));
  soup->add_option("--threads", soup_args.params.threads, "Matching threads")
      ->check(CLI::PositiveNumber);
  soup->add_option("--seed", soup_args.seed, "Seed");
  soup->add_option("--out", soup_args.out, "Output strand file")->required();

  auto* decode = app.add_subcommand("decode", "Decode architecture strands into model files");
  DecodeArgs decode_args;
  decode->add_option("--in", decode_args.in, "Strand file, one architecture per line")->required();
  decode->add_option("--out-dir", decode_args.out_dir, "Output directory")->required();
  decode->add_option("--input-shape", decode_args.input_shape, "HxWxC");
  decode->add_option("--classes", decode_args.classes, "Class count")->check(CLI::PositiveNumber);
  decode->add_option("--max-depth", decode_args.max_depth, "Maximum depth N")
      ->check(CLI::Range(1, kMaxDepthLimit));
  decode->add_option("--format", decode_args.format, "json or dot")
      ->check(CLI::IsMember({"json", "dot"}));

  auto* search = app.add_subcommand("search", "Run the full search loop");
  SearchArgs search_args;
  search->add_option("--config", search_args.config, "TOML config")->required();
  search->add_option("--evaluator", search_args.evaluator,
                     "mock, mock:good, mock:poor or subprocess:<command>");
  search->add_option("--out-dir", search_args.out_dir, "Run directory")->required();
  search->add_flag("--resume", search_args.resume, "Continue a partially finished run");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*decode_strand) return cmd_decode_strand(strand_args, decode_strand_depth);
    if (*encode_layer) return cmd_encode_layer(encode);
    if (*soup) return cmd_soup(soup_args);
    if (*decode) return cmd_decode(decode_args);
    if (*search) return cmd_search(search_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
