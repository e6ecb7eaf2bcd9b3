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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <string>

#include "oracles.hpp"

namespace dnanas {
namespace {

std::vector<std::string> constituents(const StrandPool& pool) {
  std::vector<std::string> out;
  for (const auto& b : pool.buckets)
    for (const auto& s : b) out.push_back(serialize_layer_strand(s));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> constituents(const std::vector<CompositeStrand>& strands) {
  std::vector<std::string> out;
  for (const auto& c : strands)
    for (const auto& s : c.layers) out.push_back(serialize_layer_strand(s));
  std::sort(out.begin(), out.end());
  return out;
}

bool junctions_pair(const CompositeStrand& c) {
  for (std::size_t k = 0; k + 1 < c.layers.size(); ++k) {
    if (!c.layers[k].pairs_with(c.layers[k + 1])) return false;
  }
  return true;
}

TEST(GeneratePoolTest, SizeIsPTimesN) {
  const auto pool = generate_pool(24, 300, 1);
  EXPECT_EQ(pool.size(), 7200u);
  ASSERT_EQ(pool.buckets.size(), 24u);
  for (int i = 0; i < 24; ++i) {
    ASSERT_EQ(pool.buckets[i].size(), 300u);
    for (const auto& s : pool.buckets[i]) {
      ASSERT_EQ(s.index(), i);
      ASSERT_EQ(s.tail, complement(encode_fragment(i + 1)));
    }
  }
}

TEST(GeneratePoolTest, SingleStrand) {
  const auto pool = generate_pool(1, 1, 9);
  ASSERT_EQ(pool.size(), 1u);
  EXPECT_EQ(pool.buckets[0][0].index(), 0);
}

TEST(GeneratePoolTest, DeterministicPerSeed) {
  EXPECT_EQ(constituents(generate_pool(10, 20, 42)), constituents(generate_pool(10, 20, 42)));
  EXPECT_NE(constituents(generate_pool(10, 20, 42)), constituents(generate_pool(10, 20, 43)));
}

TEST(GeneratePoolTest, RejectsBadArguments) {
  EXPECT_THROW(generate_pool(0, 5, 1), std::invalid_argument);
  EXPECT_THROW(generate_pool(5, 0, 1), std::invalid_argument);
  EXPECT_THROW(generate_pool(1024, 1, 1), std::invalid_argument);
}

TEST(RunSoupTest, TotalLigationWithOneCopy) {
  const auto pool = generate_pool(12, 1, 3);
  const auto strands = run_soup(pool, {.rounds = 1, .join_probability = 1.0}, 3);
  ASSERT_EQ(strands.size(), 1u);
  EXPECT_EQ(strands[0].layers.size(), 12u);
  EXPECT_TRUE(junctions_pair(strands[0]));
}

TEST(RunSoupTest, NoLigationAtZeroProbability) {
  const auto pool = generate_pool(6, 4, 3);
  const auto strands = run_soup(pool, {.rounds = 5, .join_probability = 0.0}, 3);
  EXPECT_EQ(strands.size(), 24u);
  for (const auto& s : strands) EXPECT_EQ(s.layers.size(), 1u);
}

TEST(RunSoupTest, ConservesSmallPool) {
  const auto pool = generate_pool(3, 2, 11);
  const auto strands = run_soup(pool, SoupParams{}, 11);
  std::size_t total = 0;
  for (const auto& s : strands) total += s.layers.size();
  EXPECT_EQ(total, 6u);
  EXPECT_EQ(constituents(strands), constituents(pool));
}

TEST(RunSoupTest, ConservationAndPairingProperty) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 60; ++trial) {
    const int depth = 1 + static_cast<int>(rng() % 20);
    const int copies = 1 + static_cast<int>(rng() % 15);
    SoupParams params{.rounds = 1 + static_cast<int>(rng() % 10),
                      .join_probability = static_cast<double>(rng() % 101) / 100.0};
    const auto pool = generate_pool(depth, copies, rng());
    const auto strands = run_soup(pool, params, rng());
    ASSERT_EQ(constituents(strands), constituents(pool));
    for (const auto& s : strands) {
      ASSERT_TRUE(junctions_pair(s));
      for (std::size_t k = 0; k + 1 < s.layers.size(); ++k) {
        ASSERT_EQ(s.layers[k + 1].index(), s.layers[k].index() + 1);
      }
    }
  }
}

TEST(RunSoupTest, FullJoinGivesPArchitectures) {
  for (int copies : {1, 2, 7, 50}) {
    const auto pool = generate_pool(9, copies, copies);
    const auto strands = run_soup(pool, {.rounds = 1, .join_probability = 1.0}, 5);
    const auto archs = filter_architecture_strands(strands);
    EXPECT_EQ(archs.size(), static_cast<std::size_t>(copies));
    for (const auto& a : archs) EXPECT_EQ(a.depth(), 9u);
  }
}

TEST(RunSoupTest, ThreadCountDoesNotChangeResult) {
  const auto pool = generate_pool(20, 40, 17);
  SoupParams one{.rounds = 6, .join_probability = 0.7, .threads = 1};
  SoupParams many = one;
  many.threads = 4;
  EXPECT_EQ(run_soup(pool, one, 99), run_soup(pool, many, 99));
}

TEST(RunSoupTest, StopsAtFixpoint) {
  const auto pool = generate_pool(8, 5, 2);
  EXPECT_EQ(run_soup(pool, {.rounds = 1, .join_probability = 1.0}, 4),
            run_soup(pool, {.rounds = 50, .join_probability = 1.0}, 4));
}

TEST(RunSoupTest, RejectsBadParams) {
  const auto pool = generate_pool(2, 2, 2);
  EXPECT_THROW(run_soup(pool, {.rounds = 0}, 1), std::invalid_argument);
  EXPECT_THROW(run_soup(pool, {.rounds = 1, .join_probability = 1.5}, 1), std::invalid_argument);
}

TEST(RunSoupTest, RingFromHandBuiltPoolIsConserved) {
  StrandPool pool{.max_depth = 8, .copies_per_layer = 1, .seed = 0, .buckets = {}};
  LayerStrand a = make_layer_strand(5, 8, FragmentValues{.type = 9});
  LayerStrand b = make_layer_strand(6, 8, FragmentValues{.type = 9});
  b.tail = complement(encode_fragment(5));
  pool.buckets = {{a}, {b}};
  const auto strands = run_soup(pool, {.rounds = 3, .join_probability = 1.0}, 1);
  EXPECT_EQ(constituents(strands), constituents(pool));
}

TEST(FilterTest, KeepsOnlyIndexZeroStarts) {
  std::mt19937_64 rng(1);
  CompositeStrand from_three{{make_layer_strand(3, 8, rng), make_layer_strand(4, 8, rng)}};
  CompositeStrand just_zero{{make_layer_strand(0, 8, rng)}};
  CompositeStrand zero_one{{make_layer_strand(0, 8, rng), make_layer_strand(1, 8, rng)}};
  const std::vector<CompositeStrand> input{from_three, just_zero, zero_one};
  const auto archs = filter_architecture_strands(input);
  ASSERT_EQ(archs.size(), 2u);
  EXPECT_EQ(archs[0].strand(), just_zero);
  EXPECT_EQ(archs[1].strand(), zero_one);
}

TEST(FilterTest, SubsetWithConsecutiveIndices) {
  const auto pool = generate_pool(10, 30, 6);
  const auto strands = run_soup(pool, SoupParams{}, 6);
  const auto archs = filter_architecture_strands(strands);
  std::size_t starting_at_zero = 0;
  for (const auto& s : strands) starting_at_zero += s.layers.front().index() == 0;
  EXPECT_EQ(archs.size(), starting_at_zero);
  for (const auto& a : archs) {
    EXPECT_NE(std::find(strands.begin(), strands.end(), a.strand()), strands.end());
    for (std::size_t k = 0; k < a.depth(); ++k) EXPECT_EQ(a.layers()[k].index(), static_cast<int>(k));
  }
}

TEST(ArchitectureStrandTest, RejectsInvalidChains) {
  std::mt19937_64 rng(1);
  EXPECT_THROW(ArchitectureStrand(CompositeStrand{}), std::invalid_argument);
  EXPECT_THROW(ArchitectureStrand(CompositeStrand{{make_layer_strand(1, 8, rng)}}),
               std::invalid_argument);
  EXPECT_THROW(ArchitectureStrand(CompositeStrand{
                   {make_layer_strand(0, 8, rng), make_layer_strand(2, 8, rng)}}),
               std::invalid_argument);
  auto broken = make_layer_strand(0, 8, rng);
  broken.tail = encode_fragment(1);
  EXPECT_THROW(ArchitectureStrand(CompositeStrand{{broken, make_layer_strand(1, 8, rng)}}),
               std::invalid_argument);
}

std::vector<ArchitectureStrand> chains(int count) {
  std::vector<ArchitectureStrand> out;
  std::mt19937_64 rng(4);
  for (int i = 0; i < count; ++i) {
    out.emplace_back(CompositeStrand{{make_layer_strand(0, 4, rng)}});
  }
  return out;
}

TEST(SampleModelsTest, ClampsAndSamples) {
  const auto hundred = chains(100);
  EXPECT_EQ(sample_models(hundred, 100, 1), hundred);
  const auto forty = chains(40);
  EXPECT_EQ(sample_models(forty, 100, 1), forty);
  const auto picked = sample_models(hundred, 10, 3);
  EXPECT_EQ(picked.size(), 10u);
  EXPECT_EQ(picked, sample_models(hundred, 10, 3));
  std::set<std::string> distinct;
  for (const auto& p : picked) distinct.insert(serialize_strand(p.strand()));
  EXPECT_EQ(distinct.size(), 10u);
}

TEST(SampleModelsTest, IsRoughlyUniform) {
  const auto pool = chains(10);
  std::vector<int> hits(10, 0);
  for (std::uint64_t seed = 0; seed < 4000; ++seed) {
    for (const auto& p : sample_models(pool, 3, seed)) {
      hits[std::find(pool.begin(), pool.end(), p) - pool.begin()]++;
    }
  }
  // Expected 1200 each; 5 sigma is about 145.
  for (int h : hits) EXPECT_NEAR(h, 1200, 150);
}

TEST(SampleModelsTest, Errors) {
  EXPECT_THROW(sample_models({}, 5, 1), NoArchitecturesError);
  EXPECT_THROW(sample_models(chains(3), 0, 1), std::invalid_argument);
}

TEST(PoolingFractionTest, MatchesResidueCount) {
  const auto pool = generate_pool(24, 2000, 123);
  std::size_t pooling = 0;
  for (const auto& b : pool.buckets)
    for (const auto& s : b) pooling += decode_layer_strand(s, 24).kind == LayerKind::Pooling;
  const double fraction = static_cast<double>(pooling) / static_cast<double>(pool.size());
  EXPECT_NEAR(fraction, oracle::pooling_type_count(24) / 1024.0, 0.02);
}

}  // namespace
}  // namespace dnanas
