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
 * @file strand_codec.hpp
 * @brief Quaternary fragment arithmetic and Layer Strand construction.
 *
 * A fragment is five nucleotides read most-significant first as a base-4
 * integer (A=0, G=1, C=2, T=3), so every fragment names a value in [0, 1023].
 * A Layer Strand is six fragments: head, type, kernel, channel, skip, tail.
 * The head carries the layer index and the tail is the complement of the
 * next layer's head, which is what lets strands ligate in the soup.
 */
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dnanas {

enum class Nucleotide : std::uint8_t { A = 0, G = 1, C = 2, T = 3 };

constexpr int kFragmentLength = 5;
constexpr int kFragmentsPerLayer = 6;
constexpr int kLayerStrandLength = kFragmentLength * kFragmentsPerLayer;
constexpr int kMaxFragmentValue = 1023;
/// Largest N for which the tail of layer N-1 (complement of encode(N)) exists.
constexpr int kMaxDepthLimit = kMaxFragmentValue;

/// Raised on malformed strand text. offset() is the byte offset into the input.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

constexpr Nucleotide complement(Nucleotide n) noexcept {
  return static_cast<Nucleotide>(3 - static_cast<std::uint8_t>(n));
}

char to_char(Nucleotide n) noexcept;
std::optional<Nucleotide> nucleotide_from_char(char c) noexcept;

/// Five nucleotides, most-significant first.
class Fragment {
public:
  Fragment() = default;
  explicit constexpr Fragment(const std::array<Nucleotide, kFragmentLength>& bases)
      : bases_(bases) {}

  const std::array<Nucleotide, kFragmentLength>& bases() const noexcept { return bases_; }
  std::string to_string() const;

  friend bool operator==(const Fragment&, const Fragment&) = default;

private:
  std::array<Nucleotide, kFragmentLength> bases_{};
};

int decode_fragment(const Fragment& f) noexcept;
/// Throws std::out_of_range unless 0 <= n <= 1023.
Fragment encode_fragment(int n);
Fragment complement(const Fragment& f) noexcept;
/// Exactly five symbols from {A,G,C,T}; anything else is a ParseError.
Fragment parse_fragment(std::string_view text);

struct LayerStrand {
  Fragment head;
  Fragment type;
  Fragment kernel;
  Fragment channel;
  Fragment skip;
  Fragment tail;

  int index() const noexcept { return decode_fragment(head); }
  /// True when this strand's tail pairs with the head of `next`.
  bool pairs_with(const LayerStrand& next) const noexcept;

  friend bool operator==(const LayerStrand&, const LayerStrand&) = default;
};

/// Values for the four free fragments of a Layer Strand.
struct FragmentValues {
  int type = 0;
  int kernel = 0;
  int channel = 0;
  int skip = 0;
};

/// Builds Layer Strand `index` with its free fragments drawn uniformly from
/// [0, 1023]. Throws std::out_of_range unless 0 <= index < max_depth <= 1023.
LayerStrand make_layer_strand(int index, int max_depth, std::mt19937_64& rng);
LayerStrand make_layer_strand(int index, int max_depth, const FragmentValues& values);

enum class LayerKind { Convolution, Pooling };

struct LayerSpec {
  int index = 0;
  LayerKind kind = LayerKind::Convolution;
  int kernel_size = 1;
  std::optional<int> channels;     // convolution only
  std::optional<int> skip_source;  // earlier layer index, < index - 1

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

inline constexpr std::array<int, 4> kConvKernels{1, 3, 5, 7};
inline constexpr std::array<int, 2> kPoolKernels{2, 3};
inline constexpr std::array<int, 6> kChannelChoices{32, 64, 96, 128, 160, 192};
/// n_t mod N below this value decodes to a pooling layer.
constexpr int kPoolingResidueBound = 4;

/// Applies the mod rules. Throws std::out_of_range if the head index is not
/// below max_depth.
LayerSpec decode_layer_strand(const LayerStrand& s, int max_depth);

/// Checks the LayerSpec invariants; returns a description of the first
/// violation, or nullopt.
std::optional<std::string> check_layer_spec(const LayerSpec& spec);

/// Any ligated run of Layer Strands, in ligation order. No start or pairing
/// constraint; see ArchitectureStrand for the validated form.
struct CompositeStrand {
  std::vector<LayerStrand> layers;

  friend bool operator==(const CompositeStrand&, const CompositeStrand&) = default;
};

/// Parses ACGT text. Whitespace is allowed only between fragments; the symbol
/// count must be a positive multiple of 30.
CompositeStrand parse_strand(std::string_view text);
LayerStrand parse_layer_strand(std::string_view text);

/// Six space-separated fragments.
std::string serialize_layer_strand(const LayerStrand& s);
/// Canonical form: one layer per line, no trailing newline.
std::string serialize_strand(const CompositeStrand& s);
/// Single-line form used by strand files: every fragment space-separated.
std::string serialize_strand_line(const CompositeStrand& s);

}  // namespace dnanas
