// Small named sequential models used by examples, tests and the CLI.
#pragma once

#include <cmath>

#include "sequential.hpp"

namespace sublinergo::models {

/// X_k = -xi_k (xi_{k+1} + 2), xi maximal on [-1, 1]. Consecutive terms
/// share a noise, so X_{k+1} is not independent from X_k while X_{k+2} is.
/// `interior` = 0 keeps only the vertex controls.
inline SequentialModel remark_smaller(std::size_t horizon, int interior = 33) {
  return SequentialModel(StepLaw::maximal(-1.0, 1.0, interior), horizon, 1, 1,
                         [](std::span<const double> w, std::span<double> out) { out[0] = -w[0] * (w[1] + 2.0); });
}

/// Zero-mean step noise with variance uncertainty: the adversary picks a
/// fair +-1 coin or a fair +-2 coin.
inline StepLaw two_scale_coin() {
  return StepLaw::custom({-2.0, -1.0, 1.0, 2.0}, {{0.0, 0.5, 0.5, 0.0}, {0.5, 0.0, 0.0, 0.5}});
}

/// X_n = xi_n + xi_{n+1}.
inline SequentialModel one_dependent(std::size_t horizon, StepLaw step = two_scale_coin()) {
  return SequentialModel::moving_sum(std::move(step), horizon, {1.0, 1.0});
}

/// X_k = xi_k, xi maximal on [lo, hi].
inline SequentialModel maximal_iid(std::size_t horizon, double lo = -1.0, double hi = 1.0, int interior = 33) {
  return SequentialModel::iid(StepLaw::maximal(lo, hi, interior), horizon);
}

/// Classical fair coin on {-1, 1}: one measure, no ambiguity.
inline SequentialModel fair_coin(std::size_t horizon) {
  return SequentialModel::iid(StepLaw::custom({-1.0, 1.0}, {{0.5, 0.5}}), horizon);
}

}  // namespace sublinergo::models
