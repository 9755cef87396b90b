#include "forecast/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "forecast/errors.hpp"
#include "forecast/rng.hpp"

namespace forecast::nn {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {
  FORECAST_EXPECT(std::all_of(shape_.begin(), shape_.end(), [](std::size_t d) { return d > 0; }),
                  "tensor dimensions must be positive");
}

Tensor::Tensor(Shape shape, Vec data) : shape_(std::move(shape)), data_(std::move(data)) {
  FORECAST_EXPECT(data_.size() == shape_size(shape_), "tensor data length must match shape");
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor& ParamSet::add(const std::string& name, Shape shape, std::size_t fan_in) {
  FORECAST_EXPECT(!contains(name), "duplicate parameter " + name);
  Entry e{Tensor(shape), Tensor(shape), std::max<std::size_t>(fan_in, 1)};
  return entries_.emplace(name, std::move(e)).first->second.value;
}

ParamSet::Entry& ParamSet::entry(const std::string& name) {
  auto it = entries_.find(name);
  FORECAST_EXPECT(it != entries_.end(), "unknown parameter " + name);
  return it->second;
}

const ParamSet::Entry& ParamSet::entry(const std::string& name) const {
  auto it = entries_.find(name);
  FORECAST_EXPECT(it != entries_.end(), "unknown parameter " + name);
  return it->second;
}

Tensor& ParamSet::value(const std::string& name) { return entry(name).value; }
const Tensor& ParamSet::value(const std::string& name) const { return entry(name).value; }
Tensor& ParamSet::grad(const std::string& name) { return entry(name).grad; }
const Tensor& ParamSet::grad(const std::string& name) const { return entry(name).grad; }

void ParamSet::initialize(std::uint64_t seed) {
  Rng rng(seed);
  for (auto& [name, e] : entries_) {
    const double bound = std::sqrt(1.0 / static_cast<double>(e.fan_in));
    for (double& v : e.value.values()) v = rng.uniform(-bound, bound);
  }
}

void ParamSet::zero_grad() {
  for (auto& [name, e] : entries_) e.grad.fill(0.0);
}

void ParamSet::scale_grad(double factor) {
  for (auto& [name, e] : entries_) {
    for (double& g : e.grad.values()) g *= factor;
  }
}

std::vector<std::string> ParamSet::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, e] : entries_) out.push_back(name);
  return out;
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, e] : entries_) n += e.value.size();
  return n;
}

bool ParamSet::all_finite() const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](const auto& kv) { return kv.second.value.all_finite(); });
}

bool ParamSet::same_values(const ParamSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (const auto& [name, e] : entries_) {
    auto it = other.entries_.find(name);
    if (it == other.entries_.end() || !(it->second.value == e.value)) return false;
  }
  return true;
}

}  // namespace forecast::nn
