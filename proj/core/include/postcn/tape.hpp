#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "postcn/tensor.hpp"

namespace postcn::nn {

// Eager reverse-mode tape. Every op computes its value on construction and
// records a backward closure; node creation order is a topological order, so
// backward() is a single reverse sweep. Handles are indices into the tape.
//
// Forward evaluation is bit-deterministic: summation orders are fixed and
// nothing is parallelized inside a tape. Parameter leaves borrow the store's
// value buffer (the store must outlive the tape and stay unmodified until
// collect_param_grads()).
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves.
  int constant(std::vector<int> shape, std::vector<double> values);
  int input(std::vector<int> shape, std::vector<double> values);  // grad-tracked leaf
  int param(const ParamStore& store, const std::string& name);

  // Elementwise.
  int add(int a, int b);
  int sub(int a, int b);
  int hadamard(int a, int b);
  int scale(int a, double c);
  int relu(int a);
  int logistic(int a);
  int softplus(int a);
  int sqrt_op(int a);
  // y = a * s (divide=false) or a / s (divide=true); s is a 1-element node.
  int mul_scalar_node(int a, int s, bool divide = false);

  // Structural.
  int reshape(int a, std::vector<int> shape);
  int concat_vec(const std::vector<int>& parts);                  // 1-D concat
  int concat_rows(const std::vector<int>& parts);                 // stack matrices along rows
  int concat_cols(const std::vector<int>& parts);                 // stack columns (vectors or matrices)
  int gather(int a, std::vector<std::int64_t> flat_indices);      // 1-D result
  int slice_cols(int a, int col0, int ncols);
  int broadcast_add_col(int mat, int vec);                        // vec added to every column

  // Linear algebra. Vectors (shape {n}) act as n x 1 columns.
  int matmul(int a, int b, bool trans_a = false, bool trans_b = false);
  // input {Cin, T}, weights {Cout, Cin, k}, optional bias {Cout} (pass -1 to
  // skip). Valid cross-correlation along time with the given dilation:
  // out[:, t] = sum_tap W[:, :, tap] * in[:, t + tap*dilation], T' = T-(k-1)*d.
  int conv1d(int input, int weights, int bias, int dilation);
  // input {C, H, W} -> {C, H/f, W/f}, mean over f x f blocks.
  int avg_pool2d(int input, int factor);

  // Reductions / losses.
  int reduce_sum(int a);
  int reduce_mean(int a);
  int mse(int a, int b);  // mean of squared differences

  // Runs the reverse sweep from a scalar output.
  void backward(int out);

  std::span<const double> values(int i) const;
  double scalar(int i) const;
  const std::vector<int>& shape(int i) const { return nodes_[static_cast<size_t>(i)].shape; }
  const std::vector<double>& grad(int i) const { return nodes_[static_cast<size_t>(i)].grad; }

  // Adds accumulated leaf gradients into the store tensors (caller ensures
  // grads are allocated/zeroed as needed). Node order, hence deterministic.
  void collect_param_grads(ParamStore& store) const;

  size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    std::vector<int> shape;
    std::vector<double> owned;
    const std::vector<double>* borrowed = nullptr;
    std::vector<double> grad;
    std::function<void(Tape&)> back;
    bool needs_grad = false;
    std::string param_name;
  };

  int push(Node node);
  const Node& node(int i) const { return nodes_[static_cast<size_t>(i)]; }
  Node& node(int i) { return nodes_[static_cast<size_t>(i)]; }
  std::span<const double> vals(int i) const {
    const Node& n = nodes_[static_cast<size_t>(i)];
    return n.borrowed ? std::span<const double>(*n.borrowed) : std::span<const double>(n.owned);
  }
  std::vector<double>& grad_buf(int i);
  bool wants_grad(int i) const { return nodes_[static_cast<size_t>(i)].needs_grad; }
  static void check_same_shape(const std::vector<int>& a, const std::vector<int>& b,
                               const char* op);

  std::vector<Node> nodes_;
};

}  // namespace postcn::nn
