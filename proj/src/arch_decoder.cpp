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

#include "dnanas/arch_decoder.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace dnanas {

namespace {

int ceil_half(int d) { return (d + 1) / 2; }

bool is_layer_op(OpKind op) { return op == OpKind::Convolution || op == OpKind::Pooling; }

std::size_t expected_arity(OpKind op) {
  switch (op) {
    case OpKind::Input: return 0;
    case OpKind::Add: return 2;
    default: return 1;
  }
}

/// Output shape of node `id` given the shapes of all earlier nodes. Inputs
/// must already be in range.
Shape node_shape(const NetworkGraph& g, int id, std::span<const Shape> shapes) {
  const Node& n = g.nodes[id];
  auto in = [&](std::size_t k) { return shapes[n.inputs[k]]; };
  switch (n.op) {
    case OpKind::Input:
      return g.input_shape;
    case OpKind::Convolution:
      return {in(0).height, in(0).width, n.channels.value_or(0)};
    case OpKind::Pooling:
      return {ceil_half(in(0).height), ceil_half(in(0).width), in(0).channels};
    case OpKind::Projection: {
      const Shape s = in(0);
      const int stride = std::max(n.stride, 1);
      return {(s.height + stride - 1) / stride, (s.width + stride - 1) / stride,
              n.channels.value_or(0)};
    }
    case OpKind::Add:
      return in(0);
    case OpKind::Flatten:
      return {1, 1, in(0).height * in(0).width * in(0).channels};
    case OpKind::FullyConnected:
      return {1, 1, g.class_count};
  }
  return {};
}

std::int64_t node_params(const Node& n, std::span<const Shape> shapes, const Shape& out) {
  const auto c_out = static_cast<std::int64_t>(out.channels);
  switch (n.op) {
    case OpKind::Convolution: {
      const auto c_in = static_cast<std::int64_t>(shapes[n.inputs[0]].channels);
      const auto k = static_cast<std::int64_t>(n.kernel);
      return k * k * c_in * c_out + 2 * c_out;
    }
    case OpKind::Projection:
      return static_cast<std::int64_t>(shapes[n.inputs[0]].channels) * c_out;
    case OpKind::FullyConnected:
      return static_cast<std::int64_t>(shapes[n.inputs[0]].channels) * c_out + c_out;
    default:
      return 0;
  }
}

std::string node_name(const NetworkGraph& g, int id) {
  const Node& n = g.nodes[id];
  std::string name = std::string(to_string(n.op)) + "#" + std::to_string(id);
  if (n.layer_index) name += " (layer " + std::to_string(*n.layer_index) + ")";
  return name;
}

}  // namespace

std::string to_string(const Shape& s) {
  return std::to_string(s.height) + "x" + std::to_string(s.width) + "x" +
         std::to_string(s.channels);
}

Shape parse_shape(const std::string& text) {
  int dims[3] = {0, 0, 0};
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int k = 0; k < 3; ++k) {
    auto [next, ec] = std::from_chars(p, end, dims[k]);
    if (ec != std::errc{} || dims[k] < 1) {
      throw std::invalid_argument("shape must look like HxWxC with positive dims: " + text);
    }
    p = next;
    if (k < 2) {
      if (p == end || *p != 'x') throw std::invalid_argument("shape must look like HxWxC: " + text);
      ++p;
    }
  }
  if (p != end) throw std::invalid_argument("trailing characters in shape: " + text);
  return {dims[0], dims[1], dims[2]};
}

const char* to_string(OpKind op) noexcept {
  switch (op) {
    case OpKind::Input: return "input";
    case OpKind::Convolution: return "conv";
    case OpKind::Pooling: return "pool";
    case OpKind::Projection: return "proj";
    case OpKind::Add: return "add";
    case OpKind::Flatten: return "flatten";
    case OpKind::FullyConnected: return "fc";
  }
  return "?";
}

std::string to_string(const Violation& v) {
  return v.node < 0 ? v.message : "node " + std::to_string(v.node) + ": " + v.message;
}

InvalidGraphError::InvalidGraphError(std::vector<Violation> violations)
    : std::runtime_error([&] {
        std::string msg = "invalid network graph";
        for (const auto& v : violations) msg += "\n  " + to_string(v);
        return msg;
      }()),
      violations_(std::move(violations)) {}

std::vector<LayerSpec> NetworkGraph::layers() const {
  std::vector<LayerSpec> out;
  for (const auto& n : nodes) {
    if (!is_layer_op(n.op)) continue;
    LayerSpec spec;
    spec.index = n.layer_index.value_or(static_cast<int>(out.size()));
    spec.kind = n.op == OpKind::Pooling ? LayerKind::Pooling : LayerKind::Convolution;
    spec.kernel_size = n.kernel;
    if (n.op == OpKind::Convolution) spec.channels = n.channels;
    spec.skip_source = n.skip_from;
    out.push_back(spec);
  }
  return out;
}

NetworkGraph build_graph(std::span<const LayerSpec> layers, Shape input_shape, int class_count) {
  if (layers.empty()) throw std::invalid_argument("cannot build a network from zero layers");
  if (input_shape.height < 1 || input_shape.width < 1 || input_shape.channels < 1) {
    throw std::invalid_argument("input shape dims must be >= 1");
  }
  if (class_count < 1) throw std::invalid_argument("class count must be >= 1");

  NetworkGraph g{input_shape, class_count, {}};
  g.nodes.push_back(Node{.op = OpKind::Input});
  std::vector<int> layer_output;  // node id carrying each layer's output
  int current = 0;
  for (std::size_t pos = 0; pos < layers.size(); ++pos) {
    const LayerSpec& spec = layers[pos];
    if (spec.index != static_cast<int>(pos)) {
      throw std::invalid_argument("layer at position " + std::to_string(pos) + " has index " +
                                  std::to_string(spec.index));
    }
    if (auto problem = check_layer_spec(spec)) {
      throw std::invalid_argument("layer " + std::to_string(pos) + ": " + *problem);
    }
    const bool conv = spec.kind == LayerKind::Convolution;
    Node layer{.op = conv ? OpKind::Convolution : OpKind::Pooling,
               .kernel = spec.kernel_size,
               .stride = conv ? 1 : 2,
               .channels = conv ? spec.channels : std::nullopt,
               .layer_index = spec.index,
               .skip_from = spec.skip_source,
               .inputs = {current}};
    g.nodes.push_back(std::move(layer));
    current = static_cast<int>(g.nodes.size()) - 1;
    if (spec.skip_source) {
      g.nodes.push_back(Node{.op = OpKind::Add,
                             .layer_index = spec.index,
                             .inputs = {current, layer_output[*spec.skip_source]}});
      current = static_cast<int>(g.nodes.size()) - 1;
    }
    layer_output.push_back(current);
  }
  g.nodes.push_back(Node{.op = OpKind::Flatten, .inputs = {current}});
  g.nodes.push_back(Node{.op = OpKind::FullyConnected,
                         .channels = class_count,
                         .inputs = {static_cast<int>(g.nodes.size()) - 1}});
  return g;
}

NetworkGraph decode_architecture(const ArchitectureStrand& arch, int max_depth,
                                 Shape input_shape, int class_count) {
  std::vector<LayerSpec> specs;
  specs.reserve(arch.depth());
  for (const auto& layer : arch.layers()) specs.push_back(decode_layer_strand(layer, max_depth));
  return build_graph(specs, input_shape, class_count);
}

NetworkGraph apply_skip_projections(const NetworkGraph& g) {
  NetworkGraph out{g.input_shape, g.class_count, {}};
  out.nodes.reserve(g.nodes.size());
  std::vector<int> remap(g.nodes.size(), -1);
  std::vector<Shape> shapes;
  shapes.reserve(g.nodes.size());

  auto push = [&](Node n) {
    out.nodes.push_back(std::move(n));
    const int id = static_cast<int>(out.nodes.size()) - 1;
    shapes.push_back(node_shape(out, id, shapes));
    return id;
  };

  for (std::size_t id = 0; id < g.nodes.size(); ++id) {
    Node n = g.nodes[id];
    for (int& in : n.inputs) {
      if (in < 0 || in >= static_cast<int>(id)) {
        throw std::invalid_argument("node " + std::to_string(id) + " has an out-of-order input");
      }
      in = remap[in];
    }
    if (n.op == OpKind::Add && n.inputs.size() == 2) {
      const Shape target = shapes[n.inputs[0]];
      int branch = n.inputs[1];
      Shape s = shapes[branch];
      while (s.height != target.height || s.width != target.width) {
        const Shape halved{ceil_half(s.height), ceil_half(s.width), s.channels};
        if (s.height < target.height || s.width < target.width || halved == s) {
          throw std::logic_error("skip branch " + to_string(s) + " cannot be downsampled to " +
                                 to_string(target));
        }
        branch = push(Node{.op = OpKind::Projection,
                           .kernel = 1,
                           .stride = 2,
                           .channels = s.channels,
                           .inputs = {branch}});
        s = shapes[branch];
      }
      if (s.channels != target.channels) {
        branch = push(Node{.op = OpKind::Projection,
                           .kernel = 1,
                           .stride = 1,
                           .channels = target.channels,
                           .inputs = {branch}});
      }
      n.inputs[1] = branch;
    }
    remap[id] = push(std::move(n));
  }
  return out;
}

NetworkGraph decode_model(const ArchitectureStrand& arch, int max_depth, Shape input_shape,
                          int class_count) {
  return apply_skip_projections(decode_architecture(arch, max_depth, input_shape, class_count));
}

ShapeAnnotation infer_shapes(const NetworkGraph& g) {
  ShapeAnnotation ann;
  ann.shapes.reserve(g.nodes.size());
  ann.parameters.reserve(g.nodes.size());
  for (std::size_t id = 0; id < g.nodes.size(); ++id) {
    const Node& n = g.nodes[id];
    if (n.inputs.size() != expected_arity(n.op)) {
      throw ShapeError(static_cast<int>(id), node_name(g, static_cast<int>(id)) +
                                                 " has the wrong number of inputs");
    }
    for (int in : n.inputs) {
      if (in < 0 || in >= static_cast<int>(id)) {
        throw ShapeError(static_cast<int>(id),
                         node_name(g, static_cast<int>(id)) + " has an out-of-order input");
      }
    }
    if (n.op == OpKind::Add && ann.shapes[n.inputs[0]] != ann.shapes[n.inputs[1]]) {
      throw ShapeError(static_cast<int>(id),
                       node_name(g, static_cast<int>(id)) + " adds " +
                           to_string(ann.shapes[n.inputs[0]]) + " and " +
                           to_string(ann.shapes[n.inputs[1]]));
    }
    const Shape s = node_shape(g, static_cast<int>(id), ann.shapes);
    ann.shapes.push_back(s);
    ann.parameters.push_back(node_params(n, ann.shapes, s));
  }
  return ann;
}

std::int64_t count_params(const NetworkGraph& g) {
  const auto ann = infer_shapes(g);
  std::int64_t total = 0;
  for (auto p : ann.parameters) total += p;
  return total;
}

std::vector<Violation> validate(const NetworkGraph& g) {
  std::vector<Violation> out;
  auto report = [&](int node, std::string msg) { out.push_back({node, std::move(msg)}); };

  if (g.nodes.empty()) {
    report(-1, "graph has no nodes");
    return out;
  }
  if (g.input_shape.height < 1 || g.input_shape.width < 1 || g.input_shape.channels < 1) {
    report(-1, "input shape " + to_string(g.input_shape) + " has a zero dimension");
  }
  if (g.class_count < 1) report(-1, "class count must be >= 1");
  if (g.nodes.front().op != OpKind::Input) report(0, "first node is not the input");

  const int count = static_cast<int>(g.nodes.size());
  std::vector<int> consumers(count, 0);
  std::vector<Shape> shapes;
  shapes.reserve(count);
  int fc_nodes = 0;
  bool wiring_ok = true;
  for (int id = 0; id < count; ++id) {
    const Node& n = g.nodes[id];
    const std::string name = node_name(g, id);
    if (n.op == OpKind::Input && id != 0) report(id, "extra input node");
    if (n.op == OpKind::FullyConnected) {
      ++fc_nodes;
      if (id != count - 1) report(id, name + " is not the last node");
    }
    if (n.inputs.size() != expected_arity(n.op)) {
      report(id, name + " expects " + std::to_string(expected_arity(n.op)) + " inputs, has " +
                     std::to_string(n.inputs.size()));
      wiring_ok = false;
    }
    for (int in : n.inputs) {
      if (in < 0 || in >= id) {
        report(id, name + " input " + std::to_string(in) + " is not an earlier node");
        wiring_ok = false;
      } else {
        ++consumers[in];
      }
    }
    switch (n.op) {
      case OpKind::Convolution:
        if (n.stride != 1) report(id, name + " has stride " + std::to_string(n.stride) + ", not 1");
        if (std::find(kConvKernels.begin(), kConvKernels.end(), n.kernel) == kConvKernels.end()) {
          report(id, name + " kernel " + std::to_string(n.kernel) + " not in {1,3,5,7}");
        }
        if (!n.channels || *n.channels < 1) report(id, name + " has no channel count");
        break;
      case OpKind::Pooling:
        if (n.stride != 2) report(id, name + " has stride " + std::to_string(n.stride) + ", not 2");
        if (std::find(kPoolKernels.begin(), kPoolKernels.end(), n.kernel) == kPoolKernels.end()) {
          report(id, name + " kernel " + std::to_string(n.kernel) + " not in {2,3}");
        }
        break;
      case OpKind::Projection:
        if (n.kernel != 1 || (n.stride != 1 && n.stride != 2)) {
          report(id, name + " must be 1x1 with stride 1 or 2");
        }
        if (!n.channels || *n.channels < 1) report(id, name + " has no channel count");
        break;
      default:
        break;
    }
    if (is_layer_op(n.op) && n.skip_from && n.layer_index &&
        *n.skip_from >= *n.layer_index - 1) {
      report(id, name + " skip source " + std::to_string(*n.skip_from) +
                     " is not at least two layers back");
    }
    if (!wiring_ok) continue;  // shapes are meaningless past a wiring fault
    if (n.op == OpKind::Add && shapes[n.inputs[0]] != shapes[n.inputs[1]]) {
      report(id, name + " adds mismatched shapes " + to_string(shapes[n.inputs[0]]) + " and " +
                     to_string(shapes[n.inputs[1]]));
    }
    const Shape s = node_shape(g, id, shapes);
    if (s.height < 1 || s.width < 1 || s.channels < 1) {
      report(id, name + " output " + to_string(s) + " has a zero dimension");
    }
    shapes.push_back(s);
  }
  if (fc_nodes != 1) {
    report(-1, "expected exactly one fully-connected node, found " + std::to_string(fc_nodes));
  }
  for (int id = 0; id + 1 < count; ++id) {
    if (consumers[id] == 0) report(id, node_name(g, id) + " output is never consumed");
  }
  return out;
}

}  // namespace dnanas
