// LLN experiments on sequential models: the alpha-mixing left-hand side,
// convergence tables against max over Gamma_* with log-log rate fits, the
// subsequence LLN, pathwise SLLN envelopes and the mean-certain case.
#pragma once

#include <cmath>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "common.hpp"
#include "distribution.hpp"
#include "ergodic.hpp"
#include "rng.hpp"
#include "sequential.hpp"

namespace sublinergo {

// ---------------------------------------------------------------------------
// alpha-mixing

struct MixingProbe {
  std::vector<std::size_t> lambda1, lambda2;
  std::function<double(double, double)> phi;
  double lipschitz = 1.0;

  std::size_t gap() const { return lambda2.front() - lambda1.back(); }

  void validate() const {
    SUBLINERGO_REQUIRE(!lambda1.empty() && !lambda2.empty(), "mixing probe needs nonempty index sets");
    SUBLINERGO_REQUIRE(std::is_sorted(lambda1.begin(), lambda1.end()) &&
                           std::is_sorted(lambda2.begin(), lambda2.end()),
                       "mixing probe index sets must be sorted");
    if (lambda1.back() > lambda2.front()) throw DomainError("mixing probe needs max Lambda1 <= min Lambda2");
  }
};

struct MixingValue {
  double lhs = 0.0;
  double joint = 0.0;
  double nested = 0.0;
};

/// |E-hat[phi(Xbar_1, Xbar_2)] - E-hat[E-hat[phi(x, Xbar_2)] at x = Xbar_1]|,
/// exact by the cylinder DP (scalar, finite-atom models).
inline MixingValue alpha_mixing_lhs(const SequentialModel& m, const MixingProbe& probe) {
  if (!m.step().exact()) throw UnsupportedError("alpha-mixing evaluation needs a finite-atom step law");
  SUBLINERGO_REQUIRE(m.dim() == 1, "alpha-mixing evaluation needs a scalar model");
  probe.validate();
  const auto& l1 = probe.lambda1;
  const auto& l2 = probe.lambda2;
  std::vector<std::size_t> all(l1);
  all.insert(all.end(), l2.begin(), l2.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  auto slot = [&](std::size_t t) {
    return static_cast<std::size_t>(std::lower_bound(all.begin(), all.end(), t) - all.begin());
  };
  std::vector<std::size_t> s1, s2;
  for (auto t : l1) s1.push_back(slot(t));
  for (auto t : l2) s2.push_back(slot(t));
  auto avg = [](std::span<const double> v, const std::vector<std::size_t>& s) {
    double a = 0.0;
    for (auto i : s) a += v[i];
    return a / static_cast<double>(s.size());
  };
  std::vector<std::size_t> u1(l1), u2(l2);
  u1.erase(std::unique(u1.begin(), u1.end()), u1.end());
  u2.erase(std::unique(u2.begin(), u2.end()), u2.end());
  auto local = [](const std::vector<std::size_t>& idx, const std::vector<std::size_t>& u) {
    std::vector<std::size_t> s;
    for (auto t : idx) s.push_back(static_cast<std::size_t>(std::lower_bound(u.begin(), u.end(), t) - u.begin()));
    return s;
  };
  const auto s1l = local(l1, u1), s2l = local(l2, u2);

  MixingValue r;
  r.joint = eval_cylinder(m, all, [&](std::span<const double> v) { return probe.phi(avg(v, s1), avg(v, s2)); });
  std::map<double, double> inner;
  r.nested = eval_cylinder(m, u1, [&](std::span<const double> v) {
    const double x = avg(v, s1l);
    if (auto it = inner.find(x); it != inner.end()) return it->second;
    const double e = eval_cylinder(m, u2, [&](std::span<const double> w) { return probe.phi(x, avg(w, s2l)); });
    inner.emplace(x, e);
    return e;
  });
  r.lhs = std::abs(r.joint - r.nested);
  return r;
}

// ---------------------------------------------------------------------------
// Rate tables

struct RateRow {
  std::size_t n = 0;
  double value = 0.0;
  double target = 0.0;
  double abs_error = 0.0;
  std::string mode;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  std::size_t used = 0;
  bool degenerate = true;
};

/// Least squares of log error on log n, rows with error < 1e-12 dropped.
inline RateFit rate_fit(const std::vector<RateRow>& rows) {
  std::vector<double> x, y;
  for (const auto& r : rows)
    if (r.abs_error >= 1e-12) {
      x.push_back(std::log(static_cast<double>(r.n)));
      y.push_back(std::log(r.abs_error));
    }
  RateFit f;
  f.used = x.size();
  if (x.size() < 3) return f;
  const LineFit lf = fit_line(x, y);
  f.slope = lf.slope;
  f.intercept = lf.intercept;
  f.residual = lf.residual;
  f.degenerate = false;
  return f;
}

struct RateTable {
  std::string label;
  std::vector<RateRow> rows;
  RateFit fit;       // top half of the grid, at least 3 rows
  RateFit fit_full;  // whole grid

  void finish() {
    for (std::size_t i = 1; i < rows.size(); ++i)
      SUBLINERGO_REQUIRE(rows[i].n > rows[i - 1].n, "rate table needs strictly increasing n");
    fit_full = rate_fit(rows);
    const std::size_t keep = std::min(rows.size(), std::max<std::size_t>(3, (rows.size() + 1) / 2));
    fit = rate_fit(std::vector<RateRow>(rows.end() - static_cast<std::ptrdiff_t>(keep), rows.end()));
  }

  void write_csv(std::ostream& os) const {
    os << "n,value,target,abs_error,mode\n";
    os.precision(17);
    for (const auto& r : rows)
      os << r.n << ',' << r.value << ',' << r.target << ',' << r.abs_error << ',' << r.mode << '\n';
  }
};

/// max of phi over an interval Gamma (scalar), by dense sampling plus endpoints.
inline double max_over_gamma(const std::function<double(double)>& phi, const GammaSet& g) {
  SUBLINERGO_REQUIRE(g.dim() == 1, "scalar target needs a one-dimensional Gamma");
  return max_over_interval(phi, g.lo(), g.hi());
}

inline void check_grid(const std::vector<std::size_t>& n_grid, std::size_t horizon) {
  SUBLINERGO_REQUIRE(!n_grid.empty(), "n grid must be nonempty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    SUBLINERGO_REQUIRE(n_grid[i] >= 1, "n grid entries must be >= 1");
    if (i > 0) SUBLINERGO_REQUIRE(n_grid[i] > n_grid[i - 1], "n grid must be strictly increasing");
  }
  if (n_grid.back() > horizon) throw DomainError("n grid exceeds the model horizon");
}

/// |E-hat[phi(S_n)] - max over Gamma_* of phi| along n_grid.
inline RateTable lln_experiment(const SequentialModel& m, const ScalarFn& phi, const std::vector<std::size_t>& n_grid,
                                const GammaSet& gamma_star) {
  check_grid(n_grid, m.horizon());
  RateTable t;
  t.label = "lln " + phi.name;
  const double target = max_over_gamma(phi.f, gamma_star);
  t.rows.resize(n_grid.size());
  parallel_chunks(n_grid.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto v = lln_expectation(m, phi.f, n_grid[i]);
      t.rows[i] = {n_grid[i], v.value, target, std::abs(v.value - target), v.mode};
    }
  });
  t.finish();
  return t;
}

/// Same along t_k = max(floor(P(k)), 1), degree P >= 2, against max over Gamma_1.
inline RateTable subsequence_lln_experiment(const SequentialModel& m, const ScalarFn& phi, const SubsequenceSpec& p,
                                            const std::vector<std::size_t>& n_grid) {
  if (!p.explicit_.empty() || p.degree() < 2 || p.poly[p.degree()] <= 0.0)
    throw DomainError("subsequence LLN needs a polynomial of degree >= 2 with positive leading coefficient");
  SUBLINERGO_REQUIRE(!n_grid.empty(), "n grid must be nonempty");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    SUBLINERGO_REQUIRE(n_grid[i] > n_grid[i - 1], "n grid must be strictly increasing");
  if (p.index(n_grid.back()) > m.horizon()) throw DomainError("subsequence index exceeds the model horizon");
  RateTable t;
  t.label = "subsequence lln " + phi.name;
  const double target = max_over_gamma(phi.f, gamma_n(m, 1));
  t.rows.resize(n_grid.size());
  parallel_chunks(n_grid.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      std::vector<std::size_t> idx;
      for (std::size_t k = 1; k <= n_grid[i]; ++k) idx.push_back(p.index(k));
      const auto v = block_average_expectation(m, idx, phi.f);
      t.rows[i] = {n_grid[i], v.value, target, std::abs(v.value - target), v.mode};
    }
  });
  t.finish();
  return t;
}

/// E-hat[|S_n - E-hat[X_1]|] for a model with no mean uncertainty.
inline RateTable mean_certain_convergence(const SequentialModel& m, const std::vector<std::size_t>& n_grid) {
  check_grid(n_grid, m.horizon());
  const double up = lln_expectation(m, [](double x) { return x; }, 1).value;
  const double down = -lln_expectation(m, [](double x) { return -x; }, 1).value;
  if (std::abs(up - down) > kExactTol)
    throw DomainError("model has mean uncertainty: [" + std::to_string(down) + ", " + std::to_string(up) + "]");
  RateTable t;
  t.label = "mean-certain";
  t.rows.resize(n_grid.size());
  parallel_chunks(n_grid.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto v = lln_expectation(m, [up](double x) { return std::abs(x - up); }, n_grid[i]);
      t.rows[i] = {n_grid[i], v.value, 0.0, v.value, v.mode};
    }
  });
  t.finish();
  return t;
}

// ---------------------------------------------------------------------------
// SLLN on sampled trajectories

/// Control choice for step k (1-based) given the atoms drawn so far.
struct SamplingMeasure {
  std::string name;
  std::function<std::size_t(std::size_t k, std::span<const int> history)> control;
};

namespace sampling {

inline SamplingMeasure constant(std::size_t c, std::string name = "") {
  return {name.empty() ? "const(" + std::to_string(c) + ")" : std::move(name),
          [c](std::size_t, std::span<const int>) { return c; }};
}

/// Switches between controls a and b on dyadic blocks [2^j, 2^{j+1}).
inline SamplingMeasure dyadic_switch(std::size_t a, std::size_t b) {
  return {"dyadic(" + std::to_string(a) + "," + std::to_string(b) + ")",
          [a, b](std::size_t k, std::span<const int>) { return (std::bit_width(k) % 2 == 0) ? a : b; }};
}

/// Every constant control of the model plus a dyadic switch between the first
/// and last control.
inline std::vector<SamplingMeasure> default_family(const SequentialModel& m) {
  std::vector<SamplingMeasure> out;
  const std::size_t c = m.finite().n_controls();
  for (std::size_t i = 0; i < c; ++i) out.push_back(constant(i));
  if (c >= 2) out.push_back(dyadic_switch(0, c - 1));
  return out;
}

}  // namespace sampling

struct SllnTrajectory {
  std::string measure;
  std::size_t trial = 0;
  std::vector<double> dist;  // at each checkpoint
  double tail_min = 0.0, tail_max = 0.0;  // S_n over n in [N/2, N] (scalar)
};

struct SllnReport {
  std::vector<std::size_t> checkpoints;  // dyadic, plus N
  std::vector<double> envelope;          // max over measures and trials
  std::vector<double> envelope_monotone; // running max from the tail
  std::vector<SllnTrajectory> trajectories;
  double final_value = 0.0;
  bool scalar = true;
  double bracket_lo = 0.0, bracket_hi = 0.0;  // -E-hat[-X_1], E-hat[X_1]
  double observed_lo = 0.0, observed_hi = 0.0;
  bool bracket_ok = true;
  std::string note = "quasi-sure is read as: every measure in the encoded family and every trial";
};

/// Samples S_n under each measure of the family for n_trials trials and
/// tracks dist(S_n, Gamma_*).
inline SllnReport slln_experiment(const SequentialModel& m, const std::vector<SamplingMeasure>& family,
                                  const GammaSet& gamma_star, std::size_t N, std::size_t n_trials,
                                  std::uint64_t seed, double bracket_slack = 0.0) {
  SUBLINERGO_REQUIRE(N >= 1 && n_trials >= 1 && !family.empty(), "SLLN experiment needs N, trials and measures");
  if (N > m.horizon()) throw DomainError("SLLN horizon exceeds the model horizon");
  const auto& fs = m.finite();
  const std::size_t d = m.dim(), lag = m.lag();
  SllnReport rep;
  rep.scalar = d == 1;
  for (std::size_t c = 1; c <= N; c *= 2) rep.checkpoints.push_back(c);
  if (rep.checkpoints.back() != N) rep.checkpoints.push_back(N);
  rep.trajectories.resize(family.size() * n_trials);
  const rng::CounterRng g(seed);
  parallel_chunks(rep.trajectories.size(), [&](std::size_t b, std::size_t e) {
    std::vector<int> atoms(N + lag);
    std::vector<double> s(d);
    for (std::size_t j = b; j < e; ++j) {
      const std::size_t mi = j / n_trials, trial = j % n_trials;
      const auto& mu = family[mi];
      const std::uint64_t stream = mi * n_trials + trial;
      for (std::size_t k = 0; k < N + lag; ++k) {
        const std::size_t c = mu.control(k + 1, std::span<const int>(atoms.data(), k));
        SUBLINERGO_REQUIRE(c < fs.n_controls(), "sampling measure picked an unknown control");
        const double u = g.uniform(stream, k);
        const auto& w = fs.weights[c];
        std::size_t a = 0;
        double acc = w[0];
        while (u >= acc && a + 1 < w.size()) acc += w[++a];
        // never land on a zero-weight atom through rounding
        while (w[a] == 0.0 && a > 0) --a;
        atoms[k] = static_cast<int>(a);
      }
      SllnTrajectory tr{mu.name, trial, {}, std::numeric_limits<double>::infinity(),
                        -std::numeric_limits<double>::infinity()};
      std::fill(s.begin(), s.end(), 0.0);
      std::size_t next = 0;
      std::vector<double> mean(d);
      for (std::size_t n = 1; n <= N; ++n) {
        const auto x = m.value(std::span<const int>(atoms.data() + (n - 1), lag + 1));
        for (std::size_t i = 0; i < d; ++i) s[i] += x[i];
        if (d == 1 && 2 * n >= N) {
          tr.tail_min = std::min(tr.tail_min, s[0] / static_cast<double>(n));
          tr.tail_max = std::max(tr.tail_max, s[0] / static_cast<double>(n));
        }
        if (next < rep.checkpoints.size() && rep.checkpoints[next] == n) {
          for (std::size_t i = 0; i < d; ++i) mean[i] = s[i] / static_cast<double>(n);
          tr.dist.push_back(gamma_star.distance(mean));
          ++next;
        }
      }
      rep.trajectories[j] = std::move(tr);
    }
  });
  rep.envelope.assign(rep.checkpoints.size(), 0.0);
  for (const auto& tr : rep.trajectories)
    for (std::size_t i = 0; i < tr.dist.size(); ++i) rep.envelope[i] = std::max(rep.envelope[i], tr.dist[i]);
  rep.envelope_monotone = rep.envelope;
  for (std::size_t i = rep.envelope.size() - 1; i-- > 0;)
    rep.envelope_monotone[i] = std::max(rep.envelope_monotone[i], rep.envelope_monotone[i + 1]);
  rep.final_value = rep.envelope.back();
  if (rep.scalar) {
    rep.bracket_hi = lln_expectation(m, [](double x) { return x; }, 1).value;
    rep.bracket_lo = -lln_expectation(m, [](double x) { return -x; }, 1).value;
    rep.observed_lo = std::numeric_limits<double>::infinity();
    rep.observed_hi = -std::numeric_limits<double>::infinity();
    for (const auto& tr : rep.trajectories) {
      rep.observed_lo = std::min(rep.observed_lo, tr.tail_min);
      rep.observed_hi = std::max(rep.observed_hi, tr.tail_max);
    }
    rep.bracket_ok = rep.observed_lo >= rep.bracket_lo - bracket_slack - 1e-12 &&
                     rep.observed_hi <= rep.bracket_hi + bracket_slack + 1e-12;
  }
  return rep;
}

}  // namespace sublinergo
