#include "postcn/tape.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace postcn::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<RowMat>;
using CMapRM = Eigen::Map<const RowMat>;

// Vectors act as n x 1 columns in matrix ops.
int shape_rows(const std::vector<int>& s) { return s.empty() ? 1 : s[0]; }
int shape_cols(const std::vector<int>& s) { return s.size() < 2 ? 1 : s[1]; }

double stable_logistic(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

void Tape::check_same_shape(const std::vector<int>& a, const std::vector<int>& b, const char* op) {
  if (numel(a) != numel(b) || a != b) {
    throw NnError(std::string(op) + ": shape mismatch");
  }
}

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

std::vector<double>& Tape::grad_buf(int i) {
  Node& n = nodes_[static_cast<size_t>(i)];
  if (n.grad.empty()) n.grad.assign(vals(i).size(), 0.0);
  return n.grad;
}

std::span<const double> Tape::values(int i) const { return vals(i); }

double Tape::scalar(int i) const {
  const auto v = vals(i);
  if (v.size() != 1) throw NnError("scalar() called on non-scalar node");
  return v[0];
}

int Tape::constant(std::vector<int> shape, std::vector<double> values) {
  if (static_cast<std::int64_t>(values.size()) != numel(shape)) {
    throw NnError("constant: value count does not match shape");
  }
  Node n;
  n.shape = std::move(shape);
  n.owned = std::move(values);
  return push(std::move(n));
}

int Tape::input(std::vector<int> shape, std::vector<double> values) {
  const int i = constant(std::move(shape), std::move(values));
  nodes_[static_cast<size_t>(i)].needs_grad = true;
  return i;
}

int Tape::param(const ParamStore& store, const std::string& name) {
  const Tensor& t = store.at(name);
  Node n;
  n.shape = t.shape;
  n.borrowed = &t.values;
  n.needs_grad = true;
  n.param_name = name;
  return push(std::move(n));
}

int Tape::add(int a, int b) {
  check_same_shape(shape(a), shape(b), "add");
  Node n;
  n.shape = shape(a);
  const auto va = vals(a);
  const auto vb = vals(b);
  n.owned.resize(va.size());
  for (size_t i = 0; i < va.size(); ++i) n.owned[i] = va[i] + vb[i];
  n.needs_grad = wants_grad(a) || wants_grad(b);
  const int out = push(std::move(n));
  node(out).back = [out, a, b](Tape& t) {
    const auto& g = t.node(out).grad;
    for (int p : {a, b}) {
      if (!t.wants_grad(p)) continue;
      auto& gp = t.grad_buf(p);
      for (size_t i = 0; i < g.size(); ++i) gp[i] += g[i];
    }
  };
  return out;
}

int Tape::sub(int a, int b) {
  check_same_shape(shape(a), shape(b), "sub");
  Node n;
  n.shape = shape(a);
  const auto va = vals(a);
  const auto vb = vals(b);
  n.owned.resize(va.size());
  for (size_t i = 0; i < va.size(); ++i) n.owned[i] = va[i] - vb[i];
  n.needs_grad = wants_grad(a) || wants_grad(b);
  const int out = push(std::move(n));
  node(out).back = [out, a, b](Tape& t) {
    const auto& g = t.node(out).grad;
    if (t.wants_grad(a)) {
      auto& ga = t.grad_buf(a);
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (t.wants_grad(b)) {
      auto& gb = t.grad_buf(b);
      for (size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  };
  return out;
}

int Tape::hadamard(int a, int b) {
  check_same_shape(shape(a), shape(b), "hadamard");
  Node n;
  n.shape = shape(a);
  const auto va = vals(a);
  const auto vb = vals(b);
  n.owned.resize(va.size());
  for (size_t i = 0; i < va.size(); ++i) n.owned[i] = va[i] * vb[i];
  n.needs_grad = wants_grad(a) || wants_grad(b);
  const int out = push(std::move(n));
  node(out).back = [out, a, b](Tape& t) {
    const auto& g = t.node(out).grad;
    const auto va = t.vals(a);
    const auto vb = t.vals(b);
    if (t.wants_grad(a)) {
      auto& ga = t.grad_buf(a);
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * vb[i];
    }
    if (t.wants_grad(b)) {
      auto& gb = t.grad_buf(b);
      for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * va[i];
    }
  };
  return out;
}

int Tape::scale(int a, double c) {
  Node n;
  n.shape = shape(a);
  const auto va = vals(a);
  n.owned.resize(va.size());
  for (size_t i = 0; i < va.size(); ++i) n.owned[i] = va[i] * c;
  n.needs_grad = wants_grad(a);
  const int out = push(std::move(n));
  node(out).back = [out, a, c](Tape& t) {
    if (!t.wants_grad(a)) return;
    const auto& g = t.node(out).grad;
    auto& ga = t.grad_buf(a);
    for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * c;
  };
  return out;
}

int Tape::relu(int a) {
  Node n;
  n.shape = shape(a);
  const auto va = vals(a);
  n.owned.resize(va.size());
  for (size_t i = 0; i < va.size(); ++i) n.owned[i] = va[i] > 0.0 ? va[i] : 0.0;
  n.needs_grad = wants_grad(a);
  const int out = push(std::move(n));
  node(out).back = [out, a](Tape& t) {
    if (!t.wants_grad(a)) return;
    const auto& g = t.node(out).grad;
    const auto va = t.vals(a);
    auto& ga = t.grad_buf(a);
    // relu'(0) = 0
    for (size_t i = 0; i < g.size(); ++i) ga[i] += va[i] > 0.0 ? g[i] : 0.0;
  };
  return out;
}

int Tape::logistic(int a) {
  Node n;
  n.shape = shape(a);
  const auto va = vals(a);
  n.owned.resize(va.size());
  for (size_t i = 0; i < va.size(); ++i) n.owned[i] = stable_logistic(va[i]);
  n.needs_grad = wants_grad(a);
  const int out = push(std::move(n));
  node(out).back = [out, a](Tape& t) {
    if (!t.wants_grad(a)) return;
    const auto& g = t.node(out).grad;
    const auto y = t.vals(out);
    auto& ga = t.grad_buf(a);
    for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
  };
  return out;
}

int Tape::softplus(int a) {
  Node n;
  n.shape = shape(a);
  const auto va = vals(a);
  n.owned.resize(va.size());
  for (size_t i = 0; i < va.size(); ++i) {
    const double x = va[i];
    n.owned[i] = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  }
  n.needs_grad = wants_grad(a);
  const int out = push(std::move(n));
  node(out).back = [out, a](Tape& t) {
    if (!t.wants_grad(a)) return;
    const auto& g = t.node(out).grad;
    const auto va = t.vals(a);
    auto& ga = t.grad_buf(a);
    for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * stable_logistic(va[i]);
  };
  return out;
}

int Tape::sqrt_op(int a) {
  Node n;
  n.shape = shape(a);
  const auto va = vals(a);
  n.owned.resize(va.size());
  for (size_t i = 0; i < va.size(); ++i) n.owned[i] = std::sqrt(va[i]);
  n.needs_grad = wants_grad(a);
  const int out = push(std::move(n));
  node(out).back = [out, a](Tape& t) {
    if (!t.wants_grad(a)) return;
    const auto& g = t.node(out).grad;
    const auto y = t.vals(out);
    auto& ga = t.grad_buf(a);
    for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * 0.5 / y[i];
  };
  return out;
}

int Tape::mul_scalar_node(int a, int s, bool divide) {
  if (numel(shape(s)) != 1) throw NnError("mul_scalar_node: scale must be scalar");
  Node n;
  n.shape = shape(a);
  const auto va = vals(a);
  const double sv = vals(s)[0];
  const double f = divide ? 1.0 / sv : sv;
  n.owned.resize(va.size());
  for (size_t i = 0; i < va.size(); ++i) n.owned[i] = va[i] * f;
  n.needs_grad = wants_grad(a) || wants_grad(s);
  const int out = push(std::move(n));
  node(out).back = [out, a, s, divide](Tape& t) {
    const auto& g = t.node(out).grad;
    const auto va = t.vals(a);
    const double sv = t.vals(s)[0];
    const double f = divide ? 1.0 / sv : sv;
    if (t.wants_grad(a)) {
      auto& ga = t.grad_buf(a);
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * f;
    }
    if (t.wants_grad(s)) {
      double acc = 0.0;
      for (size_t i = 0; i < g.size(); ++i) acc += g[i] * va[i];
      t.grad_buf(s)[0] += divide ? -acc / (sv * sv) : acc;
    }
  };
  return out;
}

int Tape::reshape(int a, std::vector<int> shape_out) {
  if (numel(shape_out) != numel(shape(a))) throw NnError("reshape: element count mismatch");
  Node n;
  n.shape = std::move(shape_out);
  const auto va = vals(a);
  n.owned.assign(va.begin(), va.end());
  n.needs_grad = wants_grad(a);
  const int out = push(std::move(n));
  node(out).back = [out, a](Tape& t) {
    if (!t.wants_grad(a)) return;
    const auto& g = t.node(out).grad;
    auto& ga = t.grad_buf(a);
    for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  };
  return out;
}

int Tape::concat_vec(const std::vector<int>& parts) {
  Node n;
  std::int64_t total = 0;
  bool needs = false;
  for (int p : parts) {
    total += numel(shape(p));
    needs = needs || wants_grad(p);
  }
  n.shape = {static_cast<int>(total)};
  n.owned.reserve(static_cast<size_t>(total));
  for (int p : parts) {
    const auto v = vals(p);
    n.owned.insert(n.owned.end(), v.begin(), v.end());
  }
  n.needs_grad = needs;
  const int out = push(std::move(n));
  node(out).back = [out, parts](Tape& t) {
    const auto& g = t.node(out).grad;
    size_t off = 0;
    for (int p : parts) {
      const size_t len = t.vals(p).size();
      if (t.wants_grad(p)) {
        auto& gp = t.grad_buf(p);
        for (size_t i = 0; i < len; ++i) gp[i] += g[off + i];
      }
      off += len;
    }
  };
  return out;
}

int Tape::concat_rows(const std::vector<int>& parts) {
  if (parts.empty()) throw NnError("concat_rows: empty part list");
  const int cols = shape_cols(shape(parts[0]));
  int rows = 0;
  bool needs = false;
  for (int p : parts) {
    if (shape_cols(shape(p)) != cols) throw NnError("concat_rows: column mismatch");
    rows += shape_rows(shape(p));
    needs = needs || wants_grad(p);
  }
  Node n;
  n.shape = {rows, cols};
  n.owned.reserve(static_cast<size_t>(rows) * cols);
  for (int p : parts) {
    const auto v = vals(p);
    n.owned.insert(n.owned.end(), v.begin(), v.end());  // row-major: rows stay contiguous
  }
  n.needs_grad = needs;
  const int out = push(std::move(n));
  node(out).back = [out, parts](Tape& t) {
    const auto& g = t.node(out).grad;
    size_t off = 0;
    for (int p : parts) {
      const size_t len = t.vals(p).size();
      if (t.wants_grad(p)) {
        auto& gp = t.grad_buf(p);
        for (size_t i = 0; i < len; ++i) gp[i] += g[off + i];
      }
      off += len;
    }
  };
  return out;
}

int Tape::concat_cols(const std::vector<int>& parts) {
  if (parts.empty()) throw NnError("concat_cols: empty part list");
  const int rows = shape_rows(shape(parts[0]));
  int cols = 0;
  bool needs = false;
  for (int p : parts) {
    if (shape_rows(shape(p)) != rows) throw NnError("concat_cols: row mismatch");
    cols += shape_cols(shape(p));
    needs = needs || wants_grad(p);
  }
  Node n;
  n.shape = {rows, cols};
  n.owned.resize(static_cast<size_t>(rows) * cols);
  MapRM outm(n.owned.data(), rows, cols);
  int c0 = 0;
  for (int p : parts) {
    const int pc = shape_cols(shape(p));
    outm.middleCols(c0, pc) = CMapRM(vals(p).data(), rows, pc);
    c0 += pc;
  }
  n.needs_grad = needs;
  const int out = push(std::move(n));
  node(out).back = [out, parts, rows](Tape& t) {
    const auto& g = t.node(out).grad;
    const int cols_total = shape_cols(t.shape(out));
    CMapRM gm(g.data(), rows, cols_total);
    int c0 = 0;
    for (int p : parts) {
      const int pc = shape_cols(t.shape(p));
      if (t.wants_grad(p)) {
        MapRM gp(t.grad_buf(p).data(), rows, pc);
        gp += gm.middleCols(c0, pc);
      }
      c0 += pc;
    }
  };
  return out;
}

int Tape::gather(int a, std::vector<std::int64_t> flat_indices) {
  const auto va = vals(a);
  Node n;
  n.shape = {static_cast<int>(flat_indices.size())};
  n.owned.resize(flat_indices.size());
  for (size_t i = 0; i < flat_indices.size(); ++i) {
    const auto idx = flat_indices[i];
    if (idx < 0 || idx >= static_cast<std::int64_t>(va.size())) {
      throw NnError("gather: index out of range");
    }
    n.owned[i] = va[static_cast<size_t>(idx)];
  }
  n.needs_grad = wants_grad(a);
  const int out = push(std::move(n));
  node(out).back = [out, a, idx = std::move(flat_indices)](Tape& t) {
    if (!t.wants_grad(a)) return;
    const auto& g = t.node(out).grad;
    auto& ga = t.grad_buf(a);
    for (size_t i = 0; i < idx.size(); ++i) ga[static_cast<size_t>(idx[i])] += g[i];
  };
  return out;
}

int Tape::slice_cols(int a, int col0, int ncols) {
  const int rows = shape_rows(shape(a));
  const int cols = shape_cols(shape(a));
  if (col0 < 0 || ncols < 0 || col0 + ncols > cols) throw NnError("slice_cols: out of range");
  Node n;
  n.shape = {rows, ncols};
  n.owned.resize(static_cast<size_t>(rows) * ncols);
  MapRM(n.owned.data(), rows, ncols) = CMapRM(vals(a).data(), rows, cols).middleCols(col0, ncols);
  n.needs_grad = wants_grad(a);
  const int out = push(std::move(n));
  node(out).back = [out, a, col0, ncols, rows, cols](Tape& t) {
    if (!t.wants_grad(a)) return;
    const auto& g = t.node(out).grad;
    MapRM ga(t.grad_buf(a).data(), rows, cols);
    ga.middleCols(col0, ncols) += CMapRM(g.data(), rows, ncols);
  };
  return out;
}

int Tape::broadcast_add_col(int mat, int vec) {
  const int rows = shape_rows(shape(mat));
  const int cols = shape_cols(shape(mat));
  if (numel(shape(vec)) != rows) throw NnError("broadcast_add_col: vector length mismatch");
  Node n;
  n.shape = shape(mat);
  n.owned.resize(static_cast<size_t>(rows) * cols);
  {
    MapRM outm(n.owned.data(), rows, cols);
    outm = CMapRM(vals(mat).data(), rows, cols);
    const Eigen::Map<const Eigen::VectorXd> v(vals(vec).data(), rows);
    outm.colwise() += v;
  }
  n.needs_grad = wants_grad(mat) || wants_grad(vec);
  const int out = push(std::move(n));
  node(out).back = [out, mat, vec, rows, cols](Tape& t) {
    const auto& g = t.node(out).grad;
    CMapRM gm(g.data(), rows, cols);
    if (t.wants_grad(mat)) {
      MapRM gmat(t.grad_buf(mat).data(), rows, cols);
      gmat += gm;
    }
    if (t.wants_grad(vec)) {
      Eigen::Map<Eigen::VectorXd> gv(t.grad_buf(vec).data(), rows);
      gv += gm.rowwise().sum();
    }
  };
  return out;
}

int Tape::matmul(int a, int b, bool trans_a, bool trans_b) {
  const int ar = shape_rows(shape(a));
  const int ac = shape_cols(shape(a));
  const int br = shape_rows(shape(b));
  const int bc = shape_cols(shape(b));
  const int m = trans_a ? ac : ar;
  const int ka = trans_a ? ar : ac;
  const int kb = trans_b ? bc : br;
  const int nn = trans_b ? br : bc;
  if (ka != kb) throw NnError("matmul: inner dimension mismatch");

  Node n;
  n.shape = {m, nn};
  n.owned.resize(static_cast<size_t>(m) * nn);
  {
    CMapRM am(vals(a).data(), ar, ac);
    CMapRM bm(vals(b).data(), br, bc);
    MapRM outm(n.owned.data(), m, nn);
    if (!trans_a && !trans_b) outm.noalias() = am * bm;
    else if (trans_a && !trans_b) outm.noalias() = am.transpose() * bm;
    else if (!trans_a && trans_b) outm.noalias() = am * bm.transpose();
    else outm.noalias() = am.transpose() * bm.transpose();
  }
  n.needs_grad = wants_grad(a) || wants_grad(b);
  const int out = push(std::move(n));
  node(out).back = [out, a, b, trans_a, trans_b, ar, ac, br, bc, m, nn](Tape& t) {
    CMapRM g(t.node(out).grad.data(), m, nn);
    CMapRM am(t.vals(a).data(), ar, ac);
    CMapRM bm(t.vals(b).data(), br, bc);
    if (t.wants_grad(a)) {
      MapRM ga(t.grad_buf(a).data(), ar, ac);
      if (!trans_a && !trans_b) ga.noalias() += g * bm.transpose();
      else if (trans_a && !trans_b) ga.noalias() += bm * g.transpose();
      else if (!trans_a && trans_b) ga.noalias() += g * bm;
      else ga.noalias() += bm.transpose() * g.transpose();
    }
    if (t.wants_grad(b)) {
      MapRM gb(t.grad_buf(b).data(), br, bc);
      if (!trans_a && !trans_b) gb.noalias() += am.transpose() * g;
      else if (trans_a && !trans_b) gb.noalias() += am * g;
      else if (!trans_a && trans_b) gb.noalias() += g.transpose() * am;
      else gb.noalias() += g.transpose() * am.transpose();
    }
  };
  return out;
}

int Tape::conv1d(int input, int weights, int bias, int dilation) {
  const auto& in_shape = shape(input);
  const auto& w_shape = shape(weights);
  if (in_shape.size() != 2) throw NnError("conv1d: input must be {Cin, T}");
  if (w_shape.size() != 3) throw NnError("conv1d: weights must be {Cout, Cin, k}");
  if (dilation <= 0) throw NnError("conv1d: dilation must be positive");
  const int c_in = in_shape[0];
  const int t_len = in_shape[1];
  const int c_out = w_shape[0];
  const int k = w_shape[2];
  if (w_shape[1] != c_in) throw NnError("conv1d: channel mismatch");
  const int t_out = t_len - (k - 1) * dilation;
  if (t_out <= 0) throw NnError("conv1d: kernel larger than input");
  if (bias >= 0 && numel(shape(bias)) != c_out) throw NnError("conv1d: bias length mismatch");

  Node n;
  n.shape = {c_out, t_out};
  n.owned.assign(static_cast<size_t>(c_out) * t_out, 0.0);
  {
    CMapRM x(vals(input).data(), c_in, t_len);
    MapRM y(n.owned.data(), c_out, t_out);
    for (int tap = 0; tap < k; ++tap) {
      // Weights are {Cout, Cin, k} row-major: tap stride 1, so map tap slice
      // with an inner stride of k.
      const Eigen::Map<const RowMat, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>> wm(
          vals(weights).data() + tap, c_out, c_in,
          Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(static_cast<Eigen::Index>(c_in) * k, k));
      y.noalias() += wm * x.middleCols(tap * dilation, t_out);
    }
    if (bias >= 0) {
      const Eigen::Map<const Eigen::VectorXd> b(vals(bias).data(), c_out);
      y.colwise() += b;
    }
  }
  n.needs_grad = wants_grad(input) || wants_grad(weights) || (bias >= 0 && wants_grad(bias));
  const int out = push(std::move(n));
  node(out).back = [out, input, weights, bias, dilation, c_in, t_len, c_out, k, t_out](Tape& t) {
    CMapRM g(t.node(out).grad.data(), c_out, t_out);
    CMapRM x(t.vals(input).data(), c_in, t_len);
    using StrideD = Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>;
    for (int tap = 0; tap < k; ++tap) {
      const StrideD stride(static_cast<Eigen::Index>(c_in) * k, k);
      if (t.wants_grad(input)) {
        const Eigen::Map<const RowMat, 0, StrideD> wm(t.vals(weights).data() + tap, c_out, c_in,
                                                      stride);
        MapRM gx(t.grad_buf(input).data(), c_in, t_len);
        gx.middleCols(tap * dilation, t_out).noalias() += wm.transpose() * g;
      }
      if (t.wants_grad(weights)) {
        Eigen::Map<RowMat, 0, StrideD> gw(t.grad_buf(weights).data() + tap, c_out, c_in, stride);
        gw.noalias() += g * x.middleCols(tap * dilation, t_out).transpose();
      }
    }
    if (bias >= 0 && t.wants_grad(bias)) {
      Eigen::Map<Eigen::VectorXd> gb(t.grad_buf(bias).data(), c_out);
      gb += g.rowwise().sum();
    }
  };
  return out;
}

int Tape::avg_pool2d(int input, int factor) {
  const auto& s = shape(input);
  if (s.size() != 3) throw NnError("avg_pool2d: input must be {C, H, W}");
  if (factor <= 0 || s[1] % factor != 0 || s[2] % factor != 0) {
    throw NnError("avg_pool2d: factor must divide height and width");
  }
  const int c = s[0], h = s[1], w = s[2];
  const int ph = h / factor, pw = w / factor;
  const double inv = 1.0 / (static_cast<double>(factor) * factor);

  Node n;
  n.shape = {c, ph, pw};
  n.owned.assign(static_cast<size_t>(c) * ph * pw, 0.0);
  {
    const auto x = vals(input);
    for (int ch = 0; ch < c; ++ch) {
      const double* xc = x.data() + static_cast<size_t>(ch) * h * w;
      double* yc = n.owned.data() + static_cast<size_t>(ch) * ph * pw;
      for (int y = 0; y < h; ++y) {
        const int py = y / factor;
        for (int xx = 0; xx < w; ++xx) {
          yc[py * pw + xx / factor] += xc[y * w + xx] * inv;
        }
      }
    }
  }
  n.needs_grad = wants_grad(input);
  const int out = push(std::move(n));
  node(out).back = [out, input, factor, c, h, w, ph, pw, inv](Tape& t) {
    if (!t.wants_grad(input)) return;
    const auto& g = t.node(out).grad;
    auto& gx = t.grad_buf(input);
    for (int ch = 0; ch < c; ++ch) {
      const double* gc = g.data() + static_cast<size_t>(ch) * ph * pw;
      double* gxc = gx.data() + static_cast<size_t>(ch) * h * w;
      for (int y = 0; y < h; ++y) {
        const int py = y / factor;
        for (int xx = 0; xx < w; ++xx) {
          gxc[y * w + xx] += gc[py * pw + xx / factor] * inv;
        }
      }
    }
  };
  return out;
}

int Tape::reduce_sum(int a) {
  Node n;
  n.shape = {1};
  const auto va = vals(a);
  double acc = 0.0;
  for (double v : va) acc += v;
  n.owned = {acc};
  n.needs_grad = wants_grad(a);
  const int out = push(std::move(n));
  node(out).back = [out, a](Tape& t) {
    if (!t.wants_grad(a)) return;
    const double g = t.node(out).grad[0];
    auto& ga = t.grad_buf(a);
    for (double& v : ga) v += g;
  };
  return out;
}

int Tape::reduce_mean(int a) {
  const double inv = 1.0 / static_cast<double>(numel(shape(a)));
  return scale(reduce_sum(a), inv);
}

int Tape::mse(int a, int b) {
  const int d = sub(a, b);
  return reduce_mean(hadamard(d, d));
}

void Tape::backward(int out) {
  if (numel(shape(out)) != 1) throw NnError("backward: output must be scalar");
  grad_buf(out)[0] = 1.0;
  for (int i = out; i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (!n.back || !n.needs_grad || n.grad.empty()) continue;
    n.back(*this);
  }
}

void Tape::collect_param_grads(ParamStore& store) const {
  for (const auto& n : nodes_) {
    if (n.param_name.empty() || n.grad.empty()) continue;
    auto it = store.params.find(n.param_name);
    if (it == store.params.end()) continue;  // leaf borrowed from another store
    Tensor& t = it->second;
    t.ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i) t.grad[i] += n.grad[i];
  }
}

}  // namespace postcn::nn
