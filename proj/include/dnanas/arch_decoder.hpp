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
 * @file arch_decoder.hpp
 * @brief Architecture Strand -> computation graph.
 *
 * Graph semantics:
 *  - every convolution is a pre-activated unit (normalize, ReLU, convolve),
 *    stride 1, same padding;
 *  - pooling has stride 2 and output spatial size ceil(s / 2), so pooling a
 *    1x1 map is the identity;
 *  - a skip from layer i into layer j adds i's output to j's output, and the
 *    sum becomes j's output;
 *  - the final feature map is flattened into one fully-connected layer.
 *
 * Nodes are stored in topological order and reference their inputs by id
 * (the node's position). For Add nodes inputs[0] is the main path and
 * inputs[1] the skip branch.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dnanas/soup_sim.hpp"
#include "dnanas/strand_codec.hpp"

namespace dnanas {

struct Shape {
  int height = 0;
  int width = 0;
  int channels = 0;

  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);  // "HxWxC"
/// Parses "HxWxC" with positive dimensions; throws std::invalid_argument.
Shape parse_shape(const std::string& text);

enum class OpKind { Input, Convolution, Pooling, Projection, Add, Flatten, FullyConnected };

const char* to_string(OpKind op) noexcept;

struct Node {
  OpKind op = OpKind::Input;
  int kernel = 0;                  // conv, pool, projection
  int stride = 1;                  // conv, pool, projection
  std::optional<int> channels;     // output channels of conv, projection and FC
  std::optional<int> layer_index;  // strand layer this node realizes (conv, pool, add)
  std::optional<int> skip_from;    // conv/pool: decoded skip source of the layer
  std::vector<int> inputs;

  friend bool operator==(const Node&, const Node&) = default;
};

struct NetworkGraph {
  Shape input_shape;
  int class_count = 0;
  std::vector<Node> nodes;

  /// LayerSpecs recovered from the conv/pool nodes, in layer order.
  std::vector<LayerSpec> layers() const;

  friend bool operator==(const NetworkGraph&, const NetworkGraph&) = default;
};

struct ShapeAnnotation {
  std::vector<Shape> shapes;             // output shape per node
  std::vector<std::int64_t> parameters;  // trainable parameters per node
};

struct Violation {
  int node = -1;  // -1 for graph-level violations
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

std::string to_string(const Violation& v);

class InvalidGraphError : public std::runtime_error {
public:
  explicit InvalidGraphError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
  std::vector<Violation> violations_;
};

/// Raised by infer_shapes when an Add node's inputs disagree.
class ShapeError : public std::runtime_error {
public:
  ShapeError(int node, const std::string& what) : std::runtime_error(what), node_(node) {}
  int node() const noexcept { return node_; }

private:
  int node_;
};

/// Raised by import_json for documents that do not match the trainer schema.
class SchemaError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Chain of layers with raw skip Adds and the FC head; no projections yet.
/// Throws std::invalid_argument on an empty layer list or an invalid spec.
NetworkGraph build_graph(std::span<const LayerSpec> layers, Shape input_shape, int class_count);

NetworkGraph decode_architecture(const ArchitectureStrand& arch, int max_depth,
                                 Shape input_shape, int class_count);

/// Inserts 1x1 projections on skip branches: stride-2 ones until the spatial
/// size matches, then a stride-1 one if the channel counts differ.
NetworkGraph apply_skip_projections(const NetworkGraph& g);

/// decode_architecture followed by apply_skip_projections.
NetworkGraph decode_model(const ArchitectureStrand& arch, int max_depth, Shape input_shape,
                          int class_count);

/// Throws ShapeError if an Add node's inputs have different shapes.
ShapeAnnotation infer_shapes(const NetworkGraph& g);

/// Convolutions count k*k*c_in*c_out weights plus 2*c_out normalization
/// affine terms; projections c_in*c_out; the FC in*classes + classes.
std::int64_t count_params(const NetworkGraph& g);

/// Empty iff every graph invariant holds.
std::vector<Violation> validate(const NetworkGraph& g);

/// Trainer wire format. Throws InvalidGraphError for invalid graphs.
nlohmann::ordered_json export_json(const NetworkGraph& g);
/// Rebuilds the projected graph; throws SchemaError on malformed documents.
NetworkGraph import_json(const nlohmann::json& doc);
/// Graphviz digraph. Throws InvalidGraphError for invalid graphs.
std::string export_dot(const NetworkGraph& g);

}  // namespace dnanas
