#include "forecast/nn/checkpoint.hpp"

#include <cmath>

#include "forecast/errors.hpp"
#include "forecast/image_io.hpp"

namespace forecast::nn {

using nlohmann::json;

json params_to_json(const ParamSet& params) {
  json out = json::object();
  for (const auto& [name, e] : params.entries()) {
    out[name] = {{"shape", e.value.shape()}, {"data", e.value.vec()}};
  }
  return out;
}

namespace {

Tensor tensor_from_json(const std::string& name, const json& j) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("data")) {
    throw IoError("parameter " + name + " lacks shape/data");
  }
  Shape shape = j.at("shape").get<Shape>();
  Vec data = j.at("data").get<Vec>();
  if (shape.empty() || data.size() != shape_size(shape)) {
    throw IoError("parameter " + name + " data length does not match its shape");
  }
  for (double v : data) {
    if (!std::isfinite(v)) throw IoError("parameter " + name + " contains non-finite values");
  }
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace

void assign_params(ParamSet& params, const json& j) {
  if (!j.is_object()) throw IoError("checkpoint params must be an object");
  if (j.size() != params.entries().size()) {
    throw IoError("checkpoint has " + std::to_string(j.size()) + " parameters, model expects " +
                  std::to_string(params.entries().size()));
  }
  for (auto& [name, e] : params.entries()) {
    if (!j.contains(name)) throw IoError("checkpoint is missing parameter " + name);
    Tensor t = tensor_from_json(name, j.at(name));
    if (t.shape() != e.value.shape()) {
      throw IoError("parameter " + name + " has shape " + shape_string(t.shape()) + ", expected " +
                    shape_string(e.value.shape()));
    }
    e.value = std::move(t);
    e.grad.fill(0.0);
  }
}

std::string serialize_checkpoint(const std::string& component, const ParamSet& params,
                                 const json& config) {
  json doc = {{"format_version", kCheckpointFormatVersion},
              {"component", component},
              {"params", params_to_json(params)},
              {"config", config}};
  return doc.dump() + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format_version", 0) != kCheckpointFormatVersion) {
    throw IoError("unsupported checkpoint format_version");
  }
  Checkpoint ck;
  ck.component = doc.value("component", "");
  ck.config = doc.value("config", json::object());
  const json& params = doc.at("params");
  for (const auto& [name, value] : params.items()) {
    Tensor t = tensor_from_json(name, value);
    ck.params.add(name, t.shape(), 1) = std::move(t);
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const std::string& component,
                     const ParamSet& params, const json& config) {
  write_file_atomic(path, serialize_checkpoint(component, params, config));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(read_file(path));
}

}  // namespace forecast::nn
