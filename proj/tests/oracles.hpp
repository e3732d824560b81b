// Independent reference implementations used only by the tests.
#pragma once

#include <random>
#include <span>
#include <vector>

#include "sublinergo/sequential.hpp"

namespace oracle {

using sublinergo::CylinderFn;
using sublinergo::SequentialModel;

/// Plain nested max over every noise position 1..last, no memoisation and
/// no position pruning. Exponential, fine for <= 6 steps.
inline double nested_max(const SequentialModel& m, const std::vector<std::size_t>& idx, const CylinderFn& phi) {
  const auto& fs = m.finite();
  const std::size_t last = idx.back() + m.lag();
  std::vector<int> path;
  std::function<double()> rec = [&]() -> double {
    if (path.size() == last) {
      std::vector<double> vals;
      for (std::size_t t : idx) {
        std::vector<int> w(path.begin() + static_cast<std::ptrdiff_t>(t - 1),
                           path.begin() + static_cast<std::ptrdiff_t>(t + m.lag()));
        auto x = m.value(w);
        vals.insert(vals.end(), x.begin(), x.end());
      }
      return phi(vals);
    }
    std::vector<double> child(fs.n_atoms());
    for (std::size_t a = 0; a < fs.n_atoms(); ++a) {
      path.push_back(static_cast<int>(a));
      child[a] = rec();
      path.pop_back();
    }
    double best = -1e300;
    for (std::size_t c = 0; c < fs.n_controls(); ++c) {
      double e = 0.0;
      for (std::size_t a = 0; a < fs.n_atoms(); ++a) e += fs.weights[c][a] * child[a];
      best = std::max(best, e);
    }
    return best;
  };
  return rec();
}

/// Random finite model: 2..4 atoms on a 1/4 grid, 1..5 controls, lag 0..2.
struct RandomModel {
  SequentialModel model;
  bool linear;
};

inline RandomModel random_model(std::mt19937_64& gen, std::size_t horizon) {
  std::uniform_int_distribution<int> na(2, 4), nc(1, 5), nl(0, 2), q(-8, 8);
  const int A = na(gen), C = nc(gen);
  const std::size_t lag = static_cast<std::size_t>(nl(gen));
  std::vector<double> atoms;
  while (atoms.size() < static_cast<std::size_t>(A)) {
    const double v = q(gen) / 4.0;
    if (std::find(atoms.begin(), atoms.end(), v) == atoms.end()) atoms.push_back(v);
  }
  std::vector<std::vector<double>> weights;
  std::uniform_int_distribution<int> wi(0, 4);
  for (int c = 0; c < C; ++c) {
    std::vector<double> w(A);
    double s = 0.0;
    while (s == 0.0) {
      s = 0.0;
      for (auto& v : w) s += (v = wi(gen));
    }
    for (auto& v : w) v /= s;
    double t = 0.0;
    for (int a = 0; a + 1 < A; ++a) t += w[a];
    w[A - 1] = 1.0 - t;
    weights.push_back(w);
  }
  auto step = sublinergo::StepLaw::custom(atoms, weights);
  std::vector<double> lw(lag + 1);
  for (auto& v : lw) v = q(gen) / 4.0;
  if (std::bernoulli_distribution(0.5)(gen))
    return {SequentialModel::moving_sum(step, horizon, lw), true};
  const double k = q(gen) / 8.0;
  return {SequentialModel(step, horizon, lag, 1,
                          [lw, k](std::span<const double> w, std::span<double> out) {
                            double s = 0.0;
                            for (std::size_t j = 0; j < w.size(); ++j) s += lw[j] * w[j];
                            out[0] = s + k * w.front() * w.back();
                          }),
          false};
}

}  // namespace oracle
