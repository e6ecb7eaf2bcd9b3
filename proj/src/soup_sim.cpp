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

#include "dnanas/soup_sim.hpp"

#include <algorithm>
#include <iterator>
#include <random>
#include <string>
#include <thread>
#include <utility>

#include "dnanas/seed.hpp"

namespace dnanas {

namespace {

enum StreamTag : std::uint64_t { kPoolStream = 1, kSoupStream = 2, kSampleStream = 3 };

constexpr int kKeySpace = kMaxFragmentValue + 1;

/// Head value a composite's free tail end would pair with.
int tail_key(const CompositeStrand& c) { return decode_fragment(complement(c.layers.back().tail)); }
int head_key(const CompositeStrand& c) { return decode_fragment(c.layers.front().head); }

bool bernoulli(std::mt19937_64& rng, double p) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53 < p;
}

using Joins = std::vector<std::pair<std::size_t, std::size_t>>;

/// Matches free tails against free heads that share a pairing key.
Joins match_junction(std::vector<std::size_t> tails, std::vector<std::size_t> heads,
                     double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::shuffle(tails.begin(), tails.end(), rng);
  std::shuffle(heads.begin(), heads.end(), rng);
  Joins joins;
  const std::size_t m = std::min(tails.size(), heads.size());
  for (std::size_t k = 0; k < m; ++k) {
    if (bernoulli(rng, p)) joins.emplace_back(tails[k], heads[k]);
  }
  return joins;
}

}  // namespace

std::size_t StrandPool::size() const noexcept {
  std::size_t n = 0;
  for (const auto& b : buckets) n += b.size();
  return n;
}

void check_soup_params(const SoupParams& params) {
  if (params.rounds < 1) throw std::invalid_argument("soup rounds must be >= 1");
  if (!(params.join_probability >= 0.0 && params.join_probability <= 1.0)) {
    throw std::invalid_argument("join probability must lie in [0, 1]");
  }
  if (params.threads < 1) throw std::invalid_argument("soup threads must be >= 1");
}

ArchitectureStrand::ArchitectureStrand(CompositeStrand strand) : strand_(std::move(strand)) {
  const auto& layers = strand_.layers;
  if (layers.empty()) throw std::invalid_argument("architecture strand is empty");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (layers[k].index() != static_cast<int>(k)) {
      throw std::invalid_argument("layer " + std::to_string(k) + " has head index " +
                                  std::to_string(layers[k].index()));
    }
    if (k + 1 < layers.size() && !layers[k].pairs_with(layers[k + 1])) {
      throw std::invalid_argument("junction after layer " + std::to_string(k) +
                                  " does not base-pair");
    }
  }
}

StrandPool generate_pool(int max_depth, int copies_per_layer, std::uint64_t seed) {
  if (max_depth < 1 || max_depth > kMaxDepthLimit) {
    throw std::invalid_argument("max depth must lie in [1, 1023]");
  }
  if (copies_per_layer < 1) throw std::invalid_argument("copies per layer must be >= 1");

  StrandPool pool{max_depth, copies_per_layer, seed, {}};
  pool.buckets.resize(max_depth);
  for (int i = 0; i < max_depth; ++i) {
    std::mt19937_64 rng(derive_seed(seed, {kPoolStream, static_cast<std::uint64_t>(i)}));
    auto& bucket = pool.buckets[i];
    bucket.reserve(copies_per_layer);
    for (int j = 0; j < copies_per_layer; ++j) {
      bucket.push_back(make_layer_strand(i, max_depth, rng));
    }
  }
  return pool;
}

std::vector<CompositeStrand> run_soup(const StrandPool& pool, const SoupParams& params,
                                      std::uint64_t seed) {
  check_soup_params(params);

  std::vector<CompositeStrand> strands;
  strands.reserve(pool.size());
  for (const auto& bucket : pool.buckets) {
    for (const auto& layer : bucket) strands.push_back(CompositeStrand{{layer}});
  }

  for (int round = 0; round < params.rounds; ++round) {
    std::vector<std::vector<std::size_t>> tails(kKeySpace), heads(kKeySpace);
    for (std::size_t id = 0; id < strands.size(); ++id) {
      const int tk = tail_key(strands[id]);
      if (tk < kKeySpace) tails[tk].push_back(id);
      heads[head_key(strands[id])].push_back(id);
    }
    std::vector<int> junctions;
    for (int key = 0; key < kKeySpace; ++key) {
      if (!tails[key].empty() && !heads[key].empty()) junctions.push_back(key);
    }
    if (junctions.empty()) break;  // fixpoint

    std::vector<Joins> joins(junctions.size());
    auto work = [&](std::size_t begin, std::size_t stride) {
      for (std::size_t j = begin; j < junctions.size(); j += stride) {
        const int key = junctions[j];
        joins[j] = match_junction(tails[key], heads[key], params.join_probability,
                                  derive_seed(seed, {kSoupStream, static_cast<std::uint64_t>(round),
                                                     static_cast<std::uint64_t>(key)}));
      }
    };
    const auto threads = std::min<std::size_t>(params.threads, junctions.size());
    if (threads <= 1) {
      work(0, 1);
    } else {
      std::vector<std::jthread> workers;
      for (std::size_t t = 0; t < threads; ++t) workers.emplace_back(work, t, threads);
    }

    // Each free end takes part in at most one join per round, so the joins
    // form disjoint chains.
    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    std::vector<std::size_t> next(strands.size(), kNone);
    std::vector<bool> has_prev(strands.size(), false);
    for (const auto& junction : joins) {
      for (auto [left, right] : junction) {
        next[left] = right;
        has_prev[right] = true;
      }
    }
    std::vector<CompositeStrand> merged;
    merged.reserve(strands.size());
    std::vector<bool> used(strands.size(), false);
    auto emit_chain = [&](std::size_t start) {
      CompositeStrand chain = std::move(strands[start]);
      used[start] = true;
      for (std::size_t at = next[start]; at != kNone && !used[at]; at = next[at]) {
        used[at] = true;
        auto& tail_part = strands[at].layers;
        chain.layers.insert(chain.layers.end(), std::make_move_iterator(tail_part.begin()),
                            std::make_move_iterator(tail_part.end()));
      }
      merged.push_back(std::move(chain));
    };
    for (std::size_t id = 0; id < strands.size(); ++id) {
      if (!has_prev[id]) emit_chain(id);
    }
    // Hand-built pools with non-forced tails can close a ring; it is cut at
    // its lowest id.
    for (std::size_t id = 0; id < strands.size(); ++id) {
      if (!used[id]) emit_chain(id);
    }
    strands = std::move(merged);
  }
  return strands;
}

std::vector<ArchitectureStrand> filter_architecture_strands(
    std::span<const CompositeStrand> strands) {
  std::vector<ArchitectureStrand> out;
  for (const auto& s : strands) {
    if (!s.layers.empty() && s.layers.front().index() == 0) out.emplace_back(s);
  }
  return out;
}

std::vector<ArchitectureStrand> sample_models(std::span<const ArchitectureStrand> archs, int k,
                                              std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("sample count must be >= 1");
  if (archs.empty()) throw NoArchitecturesError();
  std::vector<ArchitectureStrand> out;
  out.reserve(std::min<std::size_t>(k, archs.size()));
  std::mt19937_64 rng(derive_seed(seed, {kSampleStream}));
  std::sample(archs.begin(), archs.end(), std::back_inserter(out), k, rng);
  return out;
}

}  // namespace dnanas
