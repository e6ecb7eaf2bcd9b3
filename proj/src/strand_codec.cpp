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

#include "dnanas/strand_codec.hpp"

#include <cctype>
#include <string>

namespace dnanas {

ParseError::ParseError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

char to_char(Nucleotide n) noexcept {
  static constexpr char kSymbols[] = {'A', 'G', 'C', 'T'};
  return kSymbols[static_cast<std::uint8_t>(n)];
}

std::optional<Nucleotide> nucleotide_from_char(char c) noexcept {
  switch (c) {
    case 'A': return Nucleotide::A;
    case 'G': return Nucleotide::G;
    case 'C': return Nucleotide::C;
    case 'T': return Nucleotide::T;
    default: return std::nullopt;
  }
}

std::string Fragment::to_string() const {
  std::string out(kFragmentLength, ' ');
  for (int i = 0; i < kFragmentLength; ++i) out[i] = to_char(bases_[i]);
  return out;
}

int decode_fragment(const Fragment& f) noexcept {
  int value = 0;
  for (Nucleotide n : f.bases()) value = value * 4 + static_cast<int>(n);
  return value;
}

Fragment encode_fragment(int n) {
  if (n < 0 || n > kMaxFragmentValue) {
    throw std::out_of_range("fragment value " + std::to_string(n) + " outside [0, 1023]");
  }
  std::array<Nucleotide, kFragmentLength> bases{};
  for (int i = kFragmentLength - 1; i >= 0; --i) {
    bases[i] = static_cast<Nucleotide>(n % 4);
    n /= 4;
  }
  return Fragment(bases);
}

Fragment complement(const Fragment& f) noexcept {
  auto bases = f.bases();
  for (auto& b : bases) b = complement(b);
  return Fragment(bases);
}

Fragment parse_fragment(std::string_view text) {
  if (text.size() != kFragmentLength) {
    throw ParseError("fragment must have 5 symbols, got " + std::to_string(text.size()),
                     text.size() < kFragmentLength ? text.size() : kFragmentLength);
  }
  std::array<Nucleotide, kFragmentLength> bases{};
  for (int i = 0; i < kFragmentLength; ++i) {
    auto n = nucleotide_from_char(text[i]);
    if (!n) throw ParseError(std::string("invalid nucleotide '") + text[i] + "'", i);
    bases[i] = *n;
  }
  return Fragment(bases);
}

bool LayerStrand::pairs_with(const LayerStrand& next) const noexcept {
  return tail == complement(next.head);
}

namespace {

void check_index(int index, int max_depth) {
  if (max_depth < 1 || max_depth > kMaxDepthLimit) {
    throw std::out_of_range("max depth " + std::to_string(max_depth) + " outside [1, 1023]");
  }
  if (index < 0 || index >= max_depth) {
    throw std::out_of_range("layer index " + std::to_string(index) + " outside [0, " +
                            std::to_string(max_depth - 1) + "]");
  }
}

}  // namespace

LayerStrand make_layer_strand(int index, int max_depth, std::mt19937_64& rng) {
  check_index(index, max_depth);
  // 2^64 is a multiple of 1024, so masking is exactly uniform.
  auto draw = [&rng] { return static_cast<int>(rng() & kMaxFragmentValue); };
  FragmentValues values;
  values.type = draw();
  values.kernel = draw();
  values.channel = draw();
  values.skip = draw();
  return make_layer_strand(index, max_depth, values);
}

LayerStrand make_layer_strand(int index, int max_depth, const FragmentValues& values) {
  check_index(index, max_depth);
  return LayerStrand{
      .head = encode_fragment(index),
      .type = encode_fragment(values.type),
      .kernel = encode_fragment(values.kernel),
      .channel = encode_fragment(values.channel),
      .skip = encode_fragment(values.skip),
      .tail = complement(encode_fragment(index + 1)),
  };
}

LayerSpec decode_layer_strand(const LayerStrand& s, int max_depth) {
  const int layer = s.index();
  check_index(layer, max_depth);

  LayerSpec spec;
  spec.index = layer;
  const int n_type = decode_fragment(s.type);
  const int n_kernel = decode_fragment(s.kernel);
  if (n_type % max_depth < kPoolingResidueBound) {
    spec.kind = LayerKind::Pooling;
    spec.kernel_size = kPoolKernels[n_kernel % kPoolKernels.size()];
  } else {
    spec.kind = LayerKind::Convolution;
    spec.kernel_size = kConvKernels[n_kernel % kConvKernels.size()];
    spec.channels = kChannelChoices[decode_fragment(s.channel) % kChannelChoices.size()];
  }
  // Layers 0 and 1 cannot skip: mod 0 is undefined and mod 1 gives 0, which
  // is not below L-1.
  if (layer >= 2) {
    const int source = decode_fragment(s.skip) % layer;
    if (source < layer - 1) spec.skip_source = source;
  }
  return spec;
}

std::optional<std::string> check_layer_spec(const LayerSpec& spec) {
  auto contains = [](const auto& set, int v) {
    for (int x : set)
      if (x == v) return true;
    return false;
  };
  if (spec.index < 0) return "negative layer index";
  if (spec.kind == LayerKind::Convolution) {
    if (!contains(kConvKernels, spec.kernel_size)) return "convolution kernel not in {1,3,5,7}";
    if (!spec.channels || !contains(kChannelChoices, *spec.channels)) {
      return "convolution channels not in {32,...,192}";
    }
  } else {
    if (!contains(kPoolKernels, spec.kernel_size)) return "pooling kernel not in {2,3}";
    if (spec.channels) return "pooling layer carries a channel count";
  }
  if (spec.skip_source && (*spec.skip_source < 0 || *spec.skip_source >= spec.index - 1)) {
    return "skip source must satisfy 0 <= source < index - 1";
  }
  return std::nullopt;
}

CompositeStrand parse_strand(std::string_view text) {
  CompositeStrand out;
  std::array<Fragment, kFragmentsPerLayer> pending{};
  std::array<Nucleotide, kFragmentLength> bases{};
  int in_fragment = 0;  // symbols read into the current fragment
  int fragments = 0;    // complete fragments in the current layer
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (in_fragment != 0) throw ParseError("whitespace inside a fragment", i);
      continue;
    }
    auto n = nucleotide_from_char(c);
    if (!n) throw ParseError(std::string("invalid nucleotide '") + c + "'", i);
    bases[in_fragment++] = *n;
    if (in_fragment == kFragmentLength) {
      in_fragment = 0;
      pending[fragments++] = Fragment(bases);
      if (fragments == kFragmentsPerLayer) {
        fragments = 0;
        out.layers.push_back(
            {pending[0], pending[1], pending[2], pending[3], pending[4], pending[5]});
      }
    }
  }
  if (in_fragment != 0 || fragments != 0) {
    throw ParseError("strand length is not a multiple of 30", text.size());
  }
  if (out.layers.empty()) throw ParseError("empty strand", 0);
  return out;
}

LayerStrand parse_layer_strand(std::string_view text) {
  auto strand = parse_strand(text);
  if (strand.layers.size() != 1) {
    throw ParseError("expected exactly one layer strand, got " +
                         std::to_string(strand.layers.size()),
                     0);
  }
  return strand.layers.front();
}

std::string serialize_layer_strand(const LayerStrand& s) {
  std::string out;
  out.reserve(kLayerStrandLength + kFragmentsPerLayer - 1);
  for (const Fragment* f : {&s.head, &s.type, &s.kernel, &s.channel, &s.skip, &s.tail}) {
    if (!out.empty()) out += ' ';
    out += f->to_string();
  }
  return out;
}

namespace {

std::string join_layers(const CompositeStrand& s, char separator) {
  std::string out;
  for (const auto& layer : s.layers) {
    if (!out.empty()) out += separator;
    out += serialize_layer_strand(layer);
  }
  return out;
}

}  // namespace

std::string serialize_strand(const CompositeStrand& s) { return join_layers(s, '\n'); }

std::string serialize_strand_line(const CompositeStrand& s) { return join_layers(s, ' '); }

}  // namespace dnanas
