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

// Independent reference computations for the test suites. Nothing here calls
// into the library's arithmetic.
#pragma once

#include <optional>
#include <string>

namespace dnanas::oracle {

/// Reads ACGT text through std::stoi in base 4 (A=0, G=1, C=2, T=3).
inline int fragment_value(const std::string& text) {
  std::string digits;
  for (char c : text) {
    switch (c) {
      case 'A': digits += '0'; break;
      case 'G': digits += '1'; break;
      case 'C': digits += '2'; break;
      case 'T': digits += '3'; break;
      default: return -1;
    }
  }
  return std::stoi(digits, nullptr, 4);
}

/// Builds the five-letter text by repeated division, least-significant last.
inline std::string fragment_text(int value) {
  static const char kSymbols[] = "AGCT";
  std::string out(5, 'A');
  for (int pos = 4; pos >= 0; --pos) {
    out[pos] = kSymbols[value % 4];
    value /= 4;
  }
  return out;
}

inline std::string complement_text(const std::string& text) {
  std::string out = text;
  for (char& c : out) {
    c = c == 'A' ? 'T' : c == 'T' ? 'A' : c == 'G' ? 'C' : 'G';
  }
  return out;
}

/// Skip source by repeated subtraction: l = n_s reduced below L, kept only
/// when l < L - 1.
inline std::optional<int> skip_source(int n_skip, int layer) {
  if (layer < 1) return std::nullopt;
  int l = n_skip;
  while (l >= layer) l -= layer;
  if (l < layer - 1) return l;
  return std::nullopt;
}

/// Number of type values in [0, 1023] that decode to pooling for depth N.
inline int pooling_type_count(int max_depth) {
  int count = 0;
  for (int n = 0; n < 1024; ++n) {
    int r = n;
    while (r >= max_depth) r -= max_depth;
    if (r < 4) ++count;
  }
  return count;
}

}  // namespace dnanas::oracle
