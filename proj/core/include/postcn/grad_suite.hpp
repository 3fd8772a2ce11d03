#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "postcn/grad_check.hpp"
#include "postcn/model.hpp"

namespace postcn::nn {

struct GradSuiteCase {
  std::string name;
  GradCheckReport report;
};

// Finite-difference validation of every tape primitive and of each full
// model (embedding net, five-branch TCN, discriminator) at `points` random
// parameter points. Primitives are checked over all coordinates; the models
// over `coords_per_point` sampled coordinates each.
std::vector<GradSuiteCase> run_gradient_suite(std::uint64_t seed, int points,
                                              int coords_per_point);

// Same model checks against explicitly configured architectures.
std::vector<GradSuiteCase> run_model_gradient_checks(
    const model::EmbeddingNetConfig& embedding, const model::TcnConfig& tcn,
    const model::DiscriminatorConfig& disc, std::uint64_t seed, int points,
    int coords_per_point);

double suite_max_rel_error(const std::vector<GradSuiteCase>& cases);

}  // namespace postcn::nn
