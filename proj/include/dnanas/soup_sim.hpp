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
 * @file soup_sim.hpp
 * @brief Layer Strand pool generation and ligation in a simulated DNA soup.
 *
 * The soup runs in rounds. In each round every free tail end at index i is
 * randomly matched against the free head ends at index i+1, and each matched
 * pair ligates with probability join_probability. Junction decisions use an
 * RNG stream derived from (seed, round, junction), so the outcome does not
 * depend on how many threads evaluate the junctions.
 */
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "dnanas/strand_codec.hpp"

namespace dnanas {

struct StrandPool {
  int max_depth = 0;
  int copies_per_layer = 0;
  std::uint64_t seed = 0;
  /// buckets[i] holds the copies of Layer Strand i.
  std::vector<std::vector<LayerStrand>> buckets;

  std::size_t size() const noexcept;
};

struct SoupParams {
  int rounds = 8;
  double join_probability = 0.9;
  /// Worker threads for junction matching; results do not depend on it.
  int threads = 1;

  friend bool operator==(const SoupParams&, const SoupParams&) = default;
};

/// Throws std::invalid_argument for rounds < 1 or join_probability outside [0, 1].
void check_soup_params(const SoupParams& params);

/// A composite strand that starts at Layer Strand 0, has consecutive indices,
/// and base-pairs at every junction. Construction validates these.
class ArchitectureStrand {
public:
  explicit ArchitectureStrand(CompositeStrand strand);

  const std::vector<LayerStrand>& layers() const noexcept { return strand_.layers; }
  const CompositeStrand& strand() const noexcept { return strand_; }
  std::size_t depth() const noexcept { return strand_.layers.size(); }

  friend bool operator==(const ArchitectureStrand&, const ArchitectureStrand&) = default;

private:
  CompositeStrand strand_;
};

/// Raised when nothing survives filtering.
class NoArchitecturesError : public std::runtime_error {
public:
  NoArchitecturesError() : std::runtime_error("no architecture strands survived") {}
};

/// P copies of each Layer Strand 0..N-1. Bucket i uses its own derived seed.
/// Throws std::invalid_argument when N or P is below 1 (or N above 1023).
StrandPool generate_pool(int max_depth, int copies_per_layer, std::uint64_t seed);

/// Ligates the pool. Returns every composite strand, of any start index and
/// length; the multiset of constituent Layer Strands equals the pool.
std::vector<CompositeStrand> run_soup(const StrandPool& pool, const SoupParams& params,
                                      std::uint64_t seed);

/// Keeps the composites whose first Layer Strand is index 0, in input order.
std::vector<ArchitectureStrand> filter_architecture_strands(
    std::span<const CompositeStrand> strands);

/// Uniform sample without replacement of min(k, |archs|) strands, preserving
/// input order. Throws NoArchitecturesError on empty input and
/// std::invalid_argument for k < 1.
std::vector<ArchitectureStrand> sample_models(std::span<const ArchitectureStrand> archs,
                                              int k, std::uint64_t seed);

}  // namespace dnanas
