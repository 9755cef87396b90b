#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace forecast::nn {

using Shape = std::vector<std::size_t>;
using Vec = std::vector<double>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major tensor of doubles.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, Vec data);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  const Vec& vec() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  void fill(double v);
  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  Vec data_;
};

// Named parameters with matching gradient accumulators. Iteration order is
// lexicographic by name, which fixes initialization and serialization order.
class ParamSet {
 public:
  struct Entry {
    Tensor value;
    Tensor grad;
    std::size_t fan_in = 1;
  };

  Tensor& add(const std::string& name, Shape shape, std::size_t fan_in);

  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  Tensor& grad(const std::string& name);
  const Tensor& grad(const std::string& name) const;

  // Uniform in +-sqrt(1/fan_in) for every entry, in name order.
  void initialize(std::uint64_t seed);
  void zero_grad();
  void scale_grad(double factor);

  std::vector<std::string> names() const;
  std::size_t scalar_count() const;
  bool all_finite() const;

  std::map<std::string, Entry>& entries() { return entries_; }
  const std::map<std::string, Entry>& entries() const { return entries_; }

  // Values only; gradients are not compared.
  bool same_values(const ParamSet& other) const;

 private:
  Entry& entry(const std::string& name);
  const Entry& entry(const std::string& name) const;

  std::map<std::string, Entry> entries_;
};

}  // namespace forecast::nn
