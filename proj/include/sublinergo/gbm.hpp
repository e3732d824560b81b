// Path-level G-Brownian motion through its control representation
// B_t = int sqrt(eta_s) dW_s with eta adapted and Q-valued.
#pragma once

#include <algorithm>
#include <cstring>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "common.hpp"
#include "rng.hpp"

namespace sublinergo {

/// Adapted control: q at step k may read the time t_k and the state B_{t_k}.
struct ControlPolicy {
  std::string name;
  std::function<double(std::size_t step, double t, double state)> q;
};

namespace policy {

inline ControlPolicy constant(double q) {
  return {"const(" + std::to_string(q) + ")", [q](std::size_t, double, double) { return q; }};
}

/// Piecewise constant in time: values[i] on [breaks[i], breaks[i+1]).
inline ControlPolicy piecewise(std::vector<double> breaks, std::vector<double> values) {
  SUBLINERGO_REQUIRE(!values.empty() && breaks.size() == values.size(), "piecewise control needs one value per segment");
  SUBLINERGO_REQUIRE(std::is_sorted(breaks.begin(), breaks.end()) && breaks.front() <= 0.0,
                     "piecewise control breakpoints must be increasing from 0");
  return {"piecewise", [breaks, values](std::size_t, double t, double) {
            std::size_t i = static_cast<std::size_t>(std::upper_bound(breaks.begin(), breaks.end(), t + 1e-12) -
                                                     breaks.begin());
            return values[i == 0 ? 0 : i - 1];
          }};
}

/// hi when switch_fn(t, state) >= 0, lo otherwise.
inline ControlPolicy bang_bang(double lo, double hi, std::function<double(double, double)> switch_fn,
                               std::string name = "bang-bang") {
  return {std::move(name), [=](std::size_t, double t, double x) { return switch_fn(t, x) >= 0.0 ? hi : lo; }};
}

}  // namespace policy

/// One path stored by its increments; values are prefix sums from 0.
struct Path {
  double dt = 0.0;
  std::vector<double> increments;

  std::size_t n_points() const { return increments.size() + 1; }
  std::vector<double> values() const {
    std::vector<double> v(increments.size() + 1, 0.0);
    for (std::size_t k = 0; k < increments.size(); ++k) v[k + 1] = v[k] + increments[k];
    return v;
  }
};

class PathEnsemble {
 public:
  PathEnsemble(double dt, std::size_t n_paths, std::size_t n_steps, std::uint64_t seed, std::uint64_t stream_base = 0)
      : dt_(dt), n_paths_(n_paths), n_steps_(n_steps), seed_(seed), stream_base_(stream_base),
        inc_(n_paths * n_steps, 0.0), ctl_(n_paths * n_steps, 0.0) {}

  double dt() const { return dt_; }
  std::size_t n_paths() const { return n_paths_; }
  std::size_t n_steps() const { return n_steps_; }
  std::size_t n_points() const { return n_steps_ + 1; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream(std::size_t p) const { return stream_base_ + p; }

  double* increments(std::size_t p) { return inc_.data() + p * n_steps_; }
  const double* increments(std::size_t p) const { return inc_.data() + p * n_steps_; }
  double* controls(std::size_t p) { return ctl_.data() + p * n_steps_; }
  const double* controls(std::size_t p) const { return ctl_.data() + p * n_steps_; }
  const std::vector<double>& all_increments() const { return inc_; }

  Path path(std::size_t p) const {
    SUBLINERGO_REQUIRE(p < n_paths_, "path index out of range");
    return {dt_, std::vector<double>(increments(p), increments(p) + n_steps_)};
  }

  /// B at step k of path p.
  double value(std::size_t p, std::size_t k) const {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += increments(p)[j];
    return s;
  }

  std::vector<double> terminal() const {
    std::vector<double> out(n_paths_);
    for (std::size_t p = 0; p < n_paths_; ++p) out[p] = value(p, n_steps_);
    return out;
  }

  /// CSV: path_id,time,value.
  void write_csv(std::ostream& os) const {
    os << "path_id,time,value\n";
    os.precision(17);
    for (std::size_t p = 0; p < n_paths_; ++p) {
      const auto v = path(p).values();
      for (std::size_t k = 0; k < v.size(); ++k) os << p << ',' << dt_ * static_cast<double>(k) << ',' << v[k] << '\n';
    }
  }

  /// Binary cache: magic, version byte, u64 n_paths, u64 n_points, f64 dt,
  /// u64 seed, then per path the n_points - 1 increments, little-endian.
  void write_binary(std::ostream& os) const {
    os.write(kMagic, 16);
    const char version = 1;
    os.write(&version, 1);
    put_u64(os, n_paths_);
    put_u64(os, n_points());
    put_f64(os, dt_);
    put_u64(os, seed_);
    for (double v : inc_) put_f64(os, v);
  }

  static PathEnsemble read_binary(std::istream& is) {
    char magic[16];
    if (!is.read(magic, 16) || std::memcmp(magic, kMagic, 16) != 0) throw DomainError("not a path cache (bad magic)");
    char version = 0;
    is.read(&version, 1);
    if (version != 1) throw DomainError("unsupported path cache version");
    const std::uint64_t n_paths = get_u64(is), n_points = get_u64(is);
    const double dt = get_f64(is);
    const std::uint64_t seed = get_u64(is);
    SUBLINERGO_REQUIRE(n_points >= 1, "path cache needs at least one point");
    PathEnsemble e(dt, n_paths, n_points - 1, seed);
    for (double& v : e.inc_) v = get_f64(is);
    if (!is) throw DomainError("truncated path cache");
    return e;
  }

  static constexpr char kMagic[17] = "SUBLINERGO-PATHS";

 private:
  static void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
  }
  static void put_f64(std::ostream& os, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    put_u64(os, v);
  }
  static std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8] = {};
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  static double get_f64(std::istream& is) {
    const std::uint64_t v = get_u64(is);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
  }

  double dt_;
  std::size_t n_paths_, n_steps_;
  std::uint64_t seed_, stream_base_;
  std::vector<double> inc_;
  std::vector<double> ctl_;
};

/// Standard normal number `k` of stream `stream` (two per Philox block).
inline double gaussian(const rng::CounterRng& g, std::uint64_t stream, std::uint64_t k) {
  return g.normal2(stream, k / 2)[k % 2];
}

inline std::size_t steps_for(double dt, double T) {
  SUBLINERGO_REQUIRE(dt > 0.0, "dt must be positive");
  SUBLINERGO_REQUIRE(T >= dt * (1 - 1e-12), "horizon must be at least one step");
  return static_cast<std::size_t>(std::llround(T / dt));
}

/// B^eta_{k+1} = B^eta_k + sqrt(q_k) dW_k with q_k = policy(k, t_k, B_k) in [q_lo, q_hi].
inline PathEnsemble simulate_gbm(double q_lo, double q_hi, const ControlPolicy& pol, double dt, double T,
                                 std::size_t n_paths, std::uint64_t seed, std::uint64_t stream_base = 0) {
  SUBLINERGO_REQUIRE(0.0 <= q_lo && q_lo <= q_hi, "control range needs 0 <= q_lo <= q_hi");
  SUBLINERGO_REQUIRE(n_paths >= 1, "ensemble needs at least one path");
  const std::size_t n = steps_for(dt, T);
  PathEnsemble e(dt, n_paths, n, seed, stream_base);
  const rng::CounterRng g(seed);
  const double sdt = std::sqrt(dt);
  parallel_chunks(n_paths, [&](std::size_t b, std::size_t end) {
    for (std::size_t p = b; p < end; ++p) {
      double x = 0.0;
      double* inc = e.increments(p);
      double* ctl = e.controls(p);
      for (std::size_t k = 0; k < n; ++k) {
        const double q = pol.q(k, dt * static_cast<double>(k), x);
        if (!(q >= q_lo - 1e-12 && q <= q_hi + 1e-12))
          throw DomainError("policy " + pol.name + " left the control set at step " + std::to_string(k));
        ctl[k] = q;
        inc[k] = std::sqrt(q) * sdt * gaussian(g, e.stream(p), k);
        x += inc[k];
      }
    }
  });
  return e;
}

/// Running sum of squared increments, one entry per point.
inline std::vector<double> quadratic_variation(const Path& p) {
  std::vector<double> qv(p.n_points(), 0.0);
  for (std::size_t k = 0; k < p.increments.size(); ++k) qv[k + 1] = qv[k] + p.increments[k] * p.increments[k];
  return qv;
}

/// (theta_t omega)(s) = omega(s + t) - omega(t).
inline Path theta_shift(const Path& p, double t) {
  SUBLINERGO_REQUIRE(t >= 0.0, "shift must be nonnegative");
  const double kk = t / p.dt;
  const auto k = static_cast<std::size_t>(std::llround(kk));
  if (std::abs(kk - static_cast<double>(k)) > 1e-9 * std::max(1.0, kk)) throw DomainError("shift is not a multiple of dt");
  if (k > p.increments.size()) throw DomainError("shift beyond the path horizon");
  return {p.dt, std::vector<double>(p.increments.begin() + static_cast<std::ptrdiff_t>(k), p.increments.end())};
}

using PathFunctional = std::function<double(std::span<const double> window)>;

struct MixingRow {
  double t = 0.0;
  double cov = 0.0;
  double se = 0.0;
  double mean_x = 0.0;
  double mean_y = 0.0;
};

/// C(t) = mean[X o theta_t * Y] - mean[X o theta_t] mean[Y] for a classical
/// Brownian motion with variance q; X and Y read the window [0, w] sampled
/// at `per_unit` points per unit time.
inline std::vector<MixingRow> bm_mixing_estimate(const PathFunctional& X, const PathFunctional& Y, double w,
                                                 const std::vector<double>& t_grid, std::size_t n_paths,
                                                 std::uint64_t seed, double q = 1.0, std::size_t per_unit = 64) {
  SUBLINERGO_REQUIRE(w > 0.0 && n_paths >= 2, "mixing estimate needs w > 0 and two paths");
  const double dt = 1.0 / static_cast<double>(per_unit);
  const std::size_t wk = steps_for(dt, w);
  std::vector<std::size_t> tk;
  for (double t : t_grid) {
    SUBLINERGO_REQUIRE(t >= 0.0, "shift must be nonnegative");
    tk.push_back(static_cast<std::size_t>(std::llround(t / dt)));
  }
  const std::size_t horizon = (tk.empty() ? 0 : *std::max_element(tk.begin(), tk.end())) + wk;
  const std::size_t T = t_grid.size();
  std::vector<double> ys(n_paths), xs(n_paths * T);
  const rng::CounterRng g(seed);
  const double s = std::sqrt(q * dt);
  parallel_chunks(n_paths, [&](std::size_t b, std::size_t e) {
    std::vector<double> path(horizon + 1), win(wk + 1);
    for (std::size_t p = b; p < e; ++p) {
      path[0] = 0.0;
      for (std::size_t k = 0; k < horizon; ++k) path[k + 1] = path[k] + s * gaussian(g, p, k);
      ys[p] = Y(std::span<const double>(path.data(), wk + 1));
      for (std::size_t i = 0; i < T; ++i) {
        for (std::size_t j = 0; j <= wk; ++j) win[j] = path[tk[i] + j] - path[tk[i]];
        xs[p * T + i] = X(win);
      }
    }
  });
  const double n = static_cast<double>(n_paths);
  double my = 0.0;
  for (double y : ys) my += y;
  my /= n;
  std::vector<MixingRow> rows;
  for (std::size_t i = 0; i < T; ++i) {
    double mx = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) mx += xs[p * T + i];
    mx /= n;
    double m = 0.0, m2 = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) {
      const double z = (xs[p * T + i] - mx) * (ys[p] - my);
      m += z;
      m2 += z * z;
    }
    m /= n;
    const double var = std::max(0.0, m2 / n - m * m);
    rows.push_back({t_grid[i], m * n / (n - 1), std::sqrt(var / (n - 1)), mx, my});
  }
  return rows;
}

}  // namespace sublinergo
