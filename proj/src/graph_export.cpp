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

#include <sstream>
#include <string>

#include "dnanas/arch_decoder.hpp"

namespace dnanas {

namespace {

constexpr const char* kNormalization = "pre-activation";

void require_valid(const NetworkGraph& g) {
  if (auto violations = validate(g); !violations.empty()) {
    throw InvalidGraphError(std::move(violations));
  }
}

int get_int(const nlohmann::json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(where + ": missing \"" + key + "\"");
  if (!it->is_number_integer()) throw SchemaError(where + ": \"" + key + "\" must be an integer");
  return it->get<int>();
}

void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw SchemaError(where + ": unknown field \"" + key + "\"");
  }
}

}  // namespace

nlohmann::ordered_json export_json(const NetworkGraph& g) {
  require_valid(g);
  nlohmann::ordered_json doc;
  doc["input"] = {g.input_shape.height, g.input_shape.width, g.input_shape.channels};
  doc["classes"] = g.class_count;
  auto layers = nlohmann::ordered_json::array();
  for (const LayerSpec& spec : g.layers()) {
    nlohmann::ordered_json layer;
    layer["index"] = spec.index;
    layer["op"] = spec.kind == LayerKind::Convolution ? "conv" : "pool";
    layer["kernel"] = spec.kernel_size;
    if (spec.channels) layer["channels"] = *spec.channels;
    if (spec.skip_source) layer["skip_from"] = *spec.skip_source;
    layers.push_back(std::move(layer));
  }
  doc["layers"] = std::move(layers);
  doc["normalization"] = kNormalization;
  return doc;
}

NetworkGraph import_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SchemaError("architecture document must be a JSON object");
  reject_unknown_keys(doc, {"input", "classes", "layers", "normalization"}, "architecture");

  auto input = doc.find("input");
  if (input == doc.end()) throw SchemaError("architecture: missing \"input\"");
  if (!input->is_array() || input->size() != 3) {
    throw SchemaError("architecture: \"input\" must be [height, width, channels]");
  }
  int dims[3];
  for (int k = 0; k < 3; ++k) {
    if (!(*input)[k].is_number_integer() || (*input)[k].get<int>() < 1) {
      throw SchemaError("architecture: \"input\" dims must be positive integers");
    }
    dims[k] = (*input)[k].get<int>();
  }
  const int classes = get_int(doc, "classes", "architecture");
  if (classes < 1) throw SchemaError("architecture: \"classes\" must be >= 1");

  auto norm = doc.find("normalization");
  if (norm == doc.end()) throw SchemaError("architecture: missing \"normalization\"");
  if (!norm->is_string() || norm->get<std::string>() != kNormalization) {
    throw SchemaError("architecture: \"normalization\" must be \"pre-activation\"");
  }

  auto layers = doc.find("layers");
  if (layers == doc.end()) throw SchemaError("architecture: missing \"layers\"");
  if (!layers->is_array() || layers->empty()) {
    throw SchemaError("architecture: \"layers\" must be a non-empty array");
  }
  std::vector<LayerSpec> specs;
  for (std::size_t pos = 0; pos < layers->size(); ++pos) {
    const auto& layer = (*layers)[pos];
    const std::string where = "layers[" + std::to_string(pos) + "]";
    if (!layer.is_object()) throw SchemaError(where + ": must be an object");
    reject_unknown_keys(layer, {"index", "op", "kernel", "channels", "skip_from"}, where);
    LayerSpec spec;
    spec.index = get_int(layer, "index", where);
    auto op = layer.find("op");
    if (op == layer.end() || !op->is_string()) throw SchemaError(where + ": missing \"op\"");
    if (*op == "conv") {
      spec.kind = LayerKind::Convolution;
      spec.channels = get_int(layer, "channels", where);
    } else if (*op == "pool") {
      spec.kind = LayerKind::Pooling;
      if (layer.contains("channels")) throw SchemaError(where + ": pooling takes no \"channels\"");
    } else {
      throw SchemaError(where + ": unknown op \"" + op->dump() + "\"");
    }
    spec.kernel_size = get_int(layer, "kernel", where);
    if (layer.contains("skip_from")) spec.skip_source = get_int(layer, "skip_from", where);
    if (spec.index != static_cast<int>(pos)) {
      throw SchemaError(where + ": index must equal its position");
    }
    if (auto problem = check_layer_spec(spec)) throw SchemaError(where + ": " + *problem);
    specs.push_back(spec);
  }
  return apply_skip_projections(build_graph(specs, {dims[0], dims[1], dims[2]}, classes));
}

std::string export_dot(const NetworkGraph& g) {
  require_valid(g);
  const auto ann = infer_shapes(g);
  std::ostringstream out;
  out << "digraph network {\n  rankdir=TB;\n  node [shape=box];\n";
  for (std::size_t id = 0; id < g.nodes.size(); ++id) {
    const Node& n = g.nodes[id];
    std::string kernel = "-";
    if (n.op == OpKind::Convolution || n.op == OpKind::Pooling || n.op == OpKind::Projection) {
      kernel = std::to_string(n.kernel) + "x" + std::to_string(n.kernel);
      if (n.op == OpKind::Projection) kernel += "s" + std::to_string(n.stride);
    }
    out << "  n" << id << " [label=\"" << to_string(n.op) << '/' << kernel << '/'
        << ann.shapes[id].channels << '/' << to_string(ann.shapes[id]) << "\"];\n";
  }
  for (std::size_t id = 0; id < g.nodes.size(); ++id) {
    const Node& n = g.nodes[id];
    for (std::size_t k = 0; k < n.inputs.size(); ++k) {
      out << "  n" << n.inputs[k] << " -> n" << id;
      if (n.op == OpKind::Add && k == 1) out << " [style=dashed]";
      out << ";\n";
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace dnanas
