#include "caac/nn/params.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "caac/errors.hpp"

namespace caac::nn {

std::size_t element_count(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(std::vector<std::size_t> dims)
    : shape(std::move(dims)), data(element_count(shape), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> dims, std::vector<double> values)
    : shape(std::move(dims)), data(std::move(values)) {
  if (data.size() != element_count(shape)) {
    throw ArgumentError("tensor data length does not match its shape");
  }
}

std::size_t ParameterSet::add(std::string name, std::vector<std::size_t> shape) {
  return add(std::move(name), Tensor(std::move(shape)));
}

std::size_t ParameterSet::add(std::string name, Tensor value) {
  if (contains(name)) throw ArgumentError("duplicate parameter name '" + name + "'");
  params_.push_back({std::move(name), std::move(value)});
  return params_.size() - 1;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

std::size_t ParameterSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  throw ArgumentError("no parameter named '" + name + "'");
}

bool ParameterSet::contains(const std::string& name) const {
  return std::any_of(params_.begin(), params_.end(),
                     [&](const Parameter& p) { return p.name == name; });
}

void ParameterSet::fill(double v) {
  for (auto& p : params_) std::fill(p.value.data.begin(), p.value.data.end(), v);
}

Gradients::Gradients(const ParameterSet& like) {
  grads_.reserve(like.size());
  for (const auto& p : like) grads_.emplace_back(p.value.size(), 0.0);
}

void Gradients::zero() {
  for (auto& g : grads_) std::fill(g.begin(), g.end(), 0.0);
}

void Gradients::add(const Gradients& other) {
  if (other.grads_.size() != grads_.size()) throw ArgumentError("gradient set size mismatch");
  for (std::size_t i = 0; i < grads_.size(); ++i) {
    auto& dst = grads_[i];
    const auto& src = other.grads_[i];
    if (dst.size() != src.size()) throw ArgumentError("gradient shape mismatch");
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
}

void Gradients::scale(double s) {
  for (auto& g : grads_) {
    for (auto& x : g) x *= s;
  }
}

double Gradients::max_abs() const {
  double m = 0.0;
  for (const auto& g : grads_) {
    for (double x : g) m = std::max(m, std::abs(x));
  }
  return m;
}

bool Gradients::matches(const ParameterSet& params) const {
  if (params.size() != grads_.size()) return false;
  for (std::size_t i = 0; i < grads_.size(); ++i) {
    if (params[i].value.size() != grads_[i].size()) return false;
  }
  return true;
}

void init_dense(Tensor& weight, Tensor& bias, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(weight.cols()));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (auto& w : weight.data) w = u(rng);
  for (auto& b : bias.data) b = u(rng);
}

void soft_update(ParameterSet& target, const ParameterSet& source, double tau) {
  if (target.size() != source.size()) throw ArgumentError("soft_update: parameter count mismatch");
  for (std::size_t i = 0; i < target.size(); ++i) {
    auto& t = target[i].value;
    const auto& s = source[i].value;
    if (t.shape != s.shape) {
      throw ArgumentError("soft_update: shape mismatch for '" + target[i].name + "'");
    }
    for (std::size_t k = 0; k < t.data.size(); ++k) {
      t.data[k] = (1.0 - tau) * t.data[k] + tau * s.data[k];
    }
  }
}

nlohmann::json to_json(const ParameterSet& params) {
  nlohmann::json doc;
  doc["format_version"] = kParameterFormatVersion;
  auto arr = nlohmann::json::array();
  for (const auto& p : params) {
    arr.push_back({{"name", p.name}, {"shape", p.value.shape}, {"values", p.value.data}});
  }
  doc["parameters"] = std::move(arr);
  return doc;
}

ParameterSet parameter_set_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("format_version")) {
    throw FormatError("parameter block: missing field 'format_version'");
  }
  if (doc["format_version"] != kParameterFormatVersion) {
    throw FormatError("parameter block: unsupported format_version " +
                      doc["format_version"].dump());
  }
  if (!doc.contains("parameters") || !doc["parameters"].is_array()) {
    throw FormatError("parameter block: missing field 'parameters'");
  }
  ParameterSet out;
  for (const auto& entry : doc["parameters"]) {
    for (const char* key : {"name", "shape", "values"}) {
      if (!entry.contains(key)) {
        throw FormatError(std::string("parameter entry: missing field '") + key + "'");
      }
    }
    auto name = entry["name"].get<std::string>();
    auto shape = entry["shape"].get<std::vector<std::size_t>>();
    std::vector<double> values;
    for (const auto& v : entry["values"]) {
      if (!v.is_number()) throw FormatError("parameter '" + name + "': non-numeric value");
      values.push_back(v.get<double>());
    }
    if (values.size() != element_count(shape)) {
      throw FormatError("parameter '" + name + "': value count does not match shape");
    }
    out.add(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  return out;
}

}  // namespace caac::nn
