#include "postcn/grad_suite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "postcn/model.hpp"
#include "postcn/rng.hpp"
#include "postcn/tape.hpp"

namespace postcn::nn {

namespace {

constexpr double kEps = 1e-6;

std::vector<double> random_vec(size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

// Checks d(probe . op(x)) / dx via one tape per evaluation. The probe is a
// fixed random linear functional so every output coordinate matters.
GradCheckReport check_op(const std::function<int(Tape&, int)>& build,
                         const std::vector<int>& in_shape, Rng& rng,
                         double lo = -1.0, double hi = 1.0) {
  const auto n = static_cast<size_t>(numel(in_shape));
  const std::vector<double> x0 = random_vec(n, rng, lo, hi);

  std::vector<double> probe;
  const auto eval = [&](const std::vector<double>& x, std::vector<double>* grad_out) {
    Tape tape;
    const int in = tape.input(in_shape, x);
    const int out = build(tape, in);
    if (probe.empty()) {
      Rng probe_rng(rng.seed() ^ 0xabcdef);
      probe = random_vec(tape.values(out).size(), probe_rng);
    }
    const int probe_node = tape.constant(tape.shape(out), probe);
    const int scalar = tape.reduce_sum(tape.hadamard(out, probe_node));
    const double value = tape.scalar(scalar);
    if (grad_out != nullptr) {
      tape.backward(scalar);
      *grad_out = tape.grad(in);
    }
    return value;
  };

  std::vector<double> analytic;
  eval(x0, &analytic);
  return grad_check([&](const std::vector<double>& x) { return eval(x, nullptr); }, x0, analytic,
                    kEps);
}

GradSuiteCase model_case(const std::string& name, ParamStore& store,
                         const std::function<double(Tape&)>& loss_builder, int points,
                         int coords_per_point, Rng& rng) {
  // Flatten all parameters; FD perturbs single coordinates through the store.
  std::int64_t total = 0;
  for (const auto& [pname, t] : store.params) total += t.size();
  auto flat_get = [&]() {
    std::vector<double> x(static_cast<size_t>(total));
    std::int64_t off = 0;
    for (const auto& [pname, t] : store.params) {
      std::copy(t.values.begin(), t.values.end(), x.begin() + off);
      off += t.size();
    }
    return x;
  };
  auto flat_set = [&](const std::vector<double>& x) {
    std::int64_t off = 0;
    for (auto& [pname, t] : store.params) {
      std::copy(x.begin() + off, x.begin() + off + t.size(), t.values.begin());
      off += t.size();
    }
  };

  GradSuiteCase out{name, {}};
  for (int p = 0; p < points; ++p) {
    // Jitter parameters to a fresh random point.
    for (auto& [pname, t] : store.params) {
      for (auto& v : t.values) v += rng.uniform(-0.05, 0.05);
    }
    const std::vector<double> x0 = flat_get();

    std::vector<std::int64_t> coords;
    for (int c = 0; c < coords_per_point; ++c) {
      coords.push_back(rng.uniform_int(total));
    }
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());

    const auto f = [&](const std::vector<double>& x) {
      flat_set(x);
      Tape tape;
      const double v = loss_builder(tape);
      flat_set(x0);
      return v;
    };
    // Analytic gradient at x0 (loss_builder backpropagates into the store).
    flat_set(x0);
    store.zero_grads();
    {
      Tape tape;
      loss_builder(tape);
    }
    std::vector<double> analytic(static_cast<size_t>(total), 0.0);
    std::int64_t off = 0;
    for (const auto& [pname, t] : store.params) {
      std::copy(t.grad.begin(), t.grad.end(), analytic.begin() + off);
      off += t.size();
    }

    const auto report = grad_check(f, x0, analytic, kEps, coords);
    out.report.max_rel_error = std::max(out.report.max_rel_error, report.max_rel_error);
    out.report.checked += report.checked;
    out.report.excluded.insert(out.report.excluded.end(), report.excluded.begin(),
                               report.excluded.end());
  }
  return out;
}

}  // namespace

std::vector<GradSuiteCase> run_gradient_suite(std::uint64_t seed, int points,
                                              int coords_per_point) {
  std::vector<GradSuiteCase> cases;
  Rng rng(seed);

  const auto add_case = [&](const std::string& name, const std::vector<int>& shape,
                            const std::function<int(Tape&, int)>& build, double lo = -1.0,
                            double hi = 1.0) {
    GradSuiteCase c{name, {}};
    for (int p = 0; p < points; ++p) {
      Rng case_rng = rng.fork(std::hash<std::string>{}(name) + static_cast<std::uint64_t>(p));
      const auto report = check_op(build, shape, case_rng, lo, hi);
      c.report.max_rel_error = std::max(c.report.max_rel_error, report.max_rel_error);
      c.report.checked += report.checked;
      c.report.excluded.insert(c.report.excluded.end(), report.excluded.begin(),
                               report.excluded.end());
    }
    cases.push_back(std::move(c));
  };

  add_case("add", {3, 4}, [](Tape& t, int x) {
    return t.add(x, t.constant({3, 4}, std::vector<double>(12, 0.25)));
  });
  add_case("sub", {3, 4}, [](Tape& t, int x) {
    return t.sub(t.constant({3, 4}, std::vector<double>(12, 0.5)), x);
  });
  add_case("hadamard", {2, 5}, [](Tape& t, int x) {
    std::vector<double> w(10);
    for (size_t i = 0; i < w.size(); ++i) w[i] = 0.1 * static_cast<double>(i) - 0.4;
    return t.hadamard(x, t.constant({2, 5}, std::move(w)));
  });
  add_case("scale", {7}, [](Tape& t, int x) { return t.scale(x, -1.7); });
  add_case("relu", {9}, [](Tape& t, int x) { return t.relu(x); });
  add_case("logistic", {6}, [](Tape& t, int x) { return t.logistic(x); });
  add_case("softplus", {6}, [](Tape& t, int x) { return t.softplus(x); });
  add_case("sqrt", {5}, [](Tape& t, int x) { return t.sqrt_op(x); }, 0.5, 2.0);
  add_case("mul_scalar_node", {4}, [](Tape& t, int x) {
    const int s = t.reduce_mean(x);
    return t.mul_scalar_node(x, s, false);
  }, 0.5, 1.5);
  add_case("div_scalar_node", {4}, [](Tape& t, int x) {
    const int s = t.add(t.reduce_mean(t.hadamard(x, x)), t.constant({1}, {0.5}));
    return t.mul_scalar_node(x, s, true);
  }, 0.5, 1.5);
  add_case("reshape", {2, 6}, [](Tape& t, int x) { return t.reshape(x, {3, 4}); });
  add_case("concat_vec", {5}, [](Tape& t, int x) {
    return t.concat_vec({x, t.constant({3}, {1.0, 2.0, 3.0}), x});
  });
  add_case("concat_rows", {2, 3}, [](Tape& t, int x) {
    return t.concat_rows({x, t.constant({1, 3}, {0.5, -0.5, 0.25}), x});
  });
  add_case("concat_cols", {3, 2}, [](Tape& t, int x) {
    return t.concat_cols({x, t.constant({3, 1}, {1.0, -1.0, 0.5}), x});
  });
  add_case("gather", {8}, [](Tape& t, int x) {
    return t.gather(x, {7, 0, 3, 3, 5});
  });
  add_case("slice_cols", {3, 6}, [](Tape& t, int x) { return t.slice_cols(x, 1, 3); });
  add_case("broadcast_add_col", {3, 4}, [](Tape& t, int x) {
    return t.broadcast_add_col(x, t.constant({3}, {0.3, -0.2, 0.7}));
  });
  add_case("broadcast_add_col_vec", {3}, [](Tape& t, int x) {
    std::vector<double> m(12);
    for (size_t i = 0; i < m.size(); ++i) m[i] = 0.05 * static_cast<double>(i);
    return t.broadcast_add_col(t.constant({3, 4}, std::move(m)), x);
  });
  for (const bool ta : {false, true}) {
    for (const bool tb : {false, true}) {
      const std::string name = std::string("matmul_") + (ta ? "t" : "n") + (tb ? "t" : "n");
      add_case(name, {3, 4}, [ta, tb](Tape& t, int x) {
        std::vector<double> w(12);
        for (size_t i = 0; i < w.size(); ++i) w[i] = 0.1 * static_cast<double>(i) - 0.5;
        // Pick the constant's shape so the inner dimensions always conform.
        const int rows = tb ? 5 : (ta ? 3 : 4);
        const int cols = tb ? (ta ? 3 : 4) : 5;
        std::vector<double> wc(static_cast<size_t>(rows * cols));
        for (size_t i = 0; i < wc.size(); ++i) wc[i] = 0.07 * static_cast<double>(i) - 0.3;
        const int w_node = t.constant({rows, cols}, std::move(wc));
        return t.matmul(x, w_node, ta, tb);
      });
    }
  }
  add_case("matmul_left", {4, 5}, [](Tape& t, int x) {
    std::vector<double> w(8);
    for (size_t i = 0; i < w.size(); ++i) w[i] = 0.2 * static_cast<double>(i) - 0.7;
    return t.matmul(t.constant({2, 4}, std::move(w)), x);
  });
  add_case("conv1d", {3, 12}, [](Tape& t, int x) {
    std::vector<double> w(2 * 3 * 3);
    for (size_t i = 0; i < w.size(); ++i) w[i] = 0.11 * static_cast<double>(i) - 0.8;
    const int wn = t.constant({2, 3, 3}, std::move(w));
    const int bn = t.constant({2}, {0.1, -0.1});
    return t.conv1d(x, wn, bn, 2);
  });
  add_case("conv1d_weights", {2, 3, 3}, [](Tape& t, int x) {
    std::vector<double> in(3 * 10);
    for (size_t i = 0; i < in.size(); ++i) in[i] = 0.13 * static_cast<double>(i) - 1.0;
    return t.conv1d(t.constant({3, 10}, std::move(in)), x, -1, 1);
  });
  add_case("avg_pool2d", {2, 4, 4}, [](Tape& t, int x) { return t.avg_pool2d(x, 2); });
  add_case("reduce_sum", {3, 3}, [](Tape& t, int x) { return t.reduce_sum(x); });
  add_case("reduce_mean", {3, 3}, [](Tape& t, int x) { return t.reduce_mean(x); });
  add_case("mse", {6}, [](Tape& t, int x) {
    return t.mse(x, t.constant({6}, {0.1, 0.2, 0.3, -0.1, -0.2, -0.3}));
  });

  // Full models at reduced width: the architecture is the default one, the
  // widths just keep the finite-difference sweeps fast.
  model::EmbeddingNetConfig emb;
  emb.channels = 4;
  emb.height = 16;
  emb.width = 16;
  emb.pool_factor = 8;
  emb.embed_dim = 8;
  model::TcnConfig tcn;
  tcn.strides = {1, 2, 3, 5, 7};
  tcn.temporal_length = 64;
  tcn.embed_dim = 6;
  tcn.branch_channels = 4;
  tcn.joint_count = 5;
  tcn.output_scale_mm = 10.0;
  model::DiscriminatorConfig disc;
  disc.feature_length = 20;
  disc.coord_block_rows = 6;
  disc.window = 16;
  disc.channels = 4;
  disc.kcs_feature_scale = 1.0;
  disc.coord_feature_scale = 1.0;
  const auto model_cases =
      run_model_gradient_checks(emb, tcn, disc, seed ^ 0x5eed, points, coords_per_point);
  cases.insert(cases.end(), model_cases.begin(), model_cases.end());
  return cases;
}

std::vector<GradSuiteCase> run_model_gradient_checks(
    const model::EmbeddingNetConfig& embedding, const model::TcnConfig& tcn,
    const model::DiscriminatorConfig& disc, std::uint64_t seed, int points,
    int coords_per_point) {
  std::vector<GradSuiteCase> cases;
  Rng rng(seed);
  {
    ParamStore store;
    Rng init = rng.fork(901);
    model::init_embedding_params(embedding, store, init);
    Rng data_rng = rng.fork(902);
    const auto pooled =
        random_vec(static_cast<size_t>(embedding.pooled_size()) * 3, data_rng, 0.0, 1.0);
    const auto target = random_vec(static_cast<size_t>(embedding.embed_dim) * 3, data_rng);
    auto loss = [&, pooled, target](Tape& tape) {
      const int in = tape.constant({embedding.pooled_size(), 3}, pooled);
      const int out = model::tape_embed_window(tape, embedding, store, in);
      const int tgt = tape.constant({embedding.embed_dim, 3}, target);
      const int l = tape.mse(out, tgt);
      tape.backward(l);
      tape.collect_param_grads(store);
      return tape.scalar(l);
    };
    Rng case_rng = rng.fork(903);
    cases.push_back(model_case("model_embedding", store, loss, points, coords_per_point, case_rng));
  }
  {
    ParamStore store;
    Rng init = rng.fork(911);
    model::init_tcn_params(tcn, store, init);
    Rng data_rng = rng.fork(912);
    const auto emb_vals =
        random_vec(static_cast<size_t>(tcn.embed_dim) * tcn.temporal_length, data_rng);
    const auto target = random_vec(static_cast<size_t>(3 * tcn.joint_count), data_rng);
    auto loss = [&, emb_vals, target](Tape& tape) {
      const int in = tape.constant({tcn.embed_dim, tcn.temporal_length}, emb_vals);
      std::vector<int> poses;
      model::tape_pose_roll(tape, tcn, store, in, 1, &poses);
      const int tgt = tape.constant({tcn.joint_count, 3}, target);
      const int l = tape.mse(poses[0], tgt);
      tape.backward(l);
      tape.collect_param_grads(store);
      return tape.scalar(l);
    };
    Rng case_rng = rng.fork(913);
    const std::string name = "model_tcn_" + std::to_string(tcn.strides.size()) + "stride";
    cases.push_back(model_case(name, store, loss, points, coords_per_point, case_rng));
  }
  {
    ParamStore store;
    Rng init = rng.fork(921);
    model::init_discriminator_params(disc, store, init);
    Rng data_rng = rng.fork(922);
    // Feature values on the post-scaling order of magnitude so gradients sit
    // well above the finite-difference noise floor.
    std::vector<double> feats(static_cast<size_t>(disc.feature_length) * disc.window);
    const int kcs_rows = disc.feature_length - disc.coord_block_rows;
    for (int r = 0; r < disc.feature_length; ++r) {
      const double scale =
          1.0 / (r < kcs_rows ? disc.kcs_feature_scale : disc.coord_feature_scale);
      for (int c = 0; c < disc.window; ++c) {
        feats[static_cast<size_t>(r) * disc.window + c] = data_rng.uniform(-scale, scale);
      }
    }
    auto loss = [&, feats](Tape& tape) {
      const int in = tape.constant({disc.feature_length, disc.window}, feats);
      const int logit = model::tape_discriminator_logit(tape, disc, store, in);
      const int l = tape.softplus(tape.scale(logit, -1.0));
      tape.backward(l);
      tape.collect_param_grads(store);
      return tape.scalar(l);
    };
    Rng case_rng = rng.fork(923);
    cases.push_back(
        model_case("model_discriminator", store, loss, points, coords_per_point, case_rng));
  }
  return cases;
}

double suite_max_rel_error(const std::vector<GradSuiteCase>& cases) {
  double max_err = 0.0;
  for (const auto& c : cases) max_err = std::max(max_err, c.report.max_rel_error);
  return max_err;
}

}  // namespace postcn::nn
