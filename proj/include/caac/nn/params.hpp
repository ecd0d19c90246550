#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace caac::nn {

/// Dense row-major double tensor.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims);
  Tensor(std::vector<std::size_t> dims, std::vector<double> values);

  std::size_t size() const { return data.size(); }
  std::size_t rows() const { return shape.empty() ? 1 : shape.front(); }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  bool operator==(const Tensor&) const = default;
};

std::size_t element_count(std::span<const std::size_t> shape);

struct Parameter {
  std::string name;
  Tensor value;

  bool operator==(const Parameter&) const = default;
};

/// Named parameters with a fixed iteration order (insertion order).
class ParameterSet {
 public:
  std::size_t add(std::string name, std::vector<std::size_t> shape);
  std::size_t add(std::string name, Tensor value);

  std::size_t size() const { return params_.size(); }
  bool empty() const { return params_.empty(); }
  std::size_t scalar_count() const;

  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }

  /// Index of `name`; throws ArgumentError if absent.
  std::size_t index_of(const std::string& name) const;
  bool contains(const std::string& name) const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void fill(double v);

  bool operator==(const ParameterSet&) const = default;

 private:
  std::vector<Parameter> params_;
};

/// Gradient buffers aligned with a ParameterSet.
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParameterSet& like);

  std::size_t size() const { return grads_.size(); }
  std::vector<double>& operator[](std::size_t i) { return grads_[i]; }
  const std::vector<double>& operator[](std::size_t i) const { return grads_[i]; }

  void zero();
  void add(const Gradients& other);
  void scale(double s);
  double max_abs() const;
  bool matches(const ParameterSet& params) const;

 private:
  std::vector<std::vector<double>> grads_;
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for a weight matrix [out, in] and its bias.
void init_dense(Tensor& weight, Tensor& bias, std::mt19937_64& rng);

/// target <- (1 - tau) * target + tau * source, every parameter.
void soft_update(ParameterSet& target, const ParameterSet& source, double tau);

// Serialization: {"format_version": 1, "parameters": [{"name", "shape", "values"}]}.
// Doubles are written in shortest round-trip form, so save/load is bit-exact.
inline constexpr int kParameterFormatVersion = 1;
nlohmann::json to_json(const ParameterSet& params);
ParameterSet parameter_set_from_json(const nlohmann::json& doc);

}  // namespace caac::nn
