#pragma once

#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace postcn::nn {

struct NnError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::int64_t numel(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

// Dense double-precision tensor with an optional gradient buffer of the
// same shape. Row-major throughout.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until ensure_grad()

  Tensor() = default;
  Tensor(std::vector<int> s, std::vector<double> v) : shape(std::move(s)), values(std::move(v)) {
    if (static_cast<std::int64_t>(values.size()) != numel(shape)) {
      throw NnError("tensor value count does not match shape");
    }
  }

  static Tensor zeros(std::vector<int> s) {
    const auto n = numel(s);
    return Tensor(std::move(s), std::vector<double>(static_cast<size_t>(n), 0.0));
  }

  std::int64_t size() const { return static_cast<std::int64_t>(values.size()); }

  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
  }
  void zero_grad() { grad.assign(values.size(), 0.0); }
};

// Named parameter map with deterministic (lexicographic) iteration order.
struct ParamStore {
  std::map<std::string, Tensor> params;

  Tensor& at(const std::string& name) {
    auto it = params.find(name);
    if (it == params.end()) throw NnError("unknown parameter \"" + name + "\"");
    return it->second;
  }
  const Tensor& at(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end()) throw NnError("unknown parameter \"" + name + "\"");
    return it->second;
  }
  void add(const std::string& name, Tensor t) {
    if (params.count(name)) throw NnError("duplicate parameter \"" + name + "\"");
    params.emplace(name, std::move(t));
  }
  void zero_grads() {
    for (auto& [name, t] : params) {
      t.ensure_grad();
      t.zero_grad();
    }
  }
  std::int64_t total_size() const {
    std::int64_t n = 0;
    for (const auto& [name, t] : params) n += t.size();
    return n;
  }
};

}  // namespace postcn::nn
