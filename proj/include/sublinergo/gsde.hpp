// Dissipative G-SDEs
//   dX = b(X) dt + sum_ij h_ij(X) d<B^i, B^j> + sigma(X) dB
// simulated per control (d<B> replaced by q dt), with the sublinear Markov
// operator T_t, the pullback stationary solution and the tests built on them.
// Expectations taken over a finite policy family are lower bounds for E-hat.
#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "common.hpp"
#include "gbm.hpp"
#include "rng.hpp"
#include "scenario.hpp"

namespace sublinergo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// n = d = 1 coefficients; integrators take this path when present.
struct ScalarCoefficients {
  std::function<double(double)> b;
  std::function<double(double)> h;  // may be empty (zero)
  std::function<double(double)> sigma;
};

struct GSDEModel {
  std::string name;
  std::size_t n = 1;  // state dimension
  std::size_t d = 1;  // noise dimension
  std::function<Vec(const Vec&)> b;
  std::function<Vec(const Vec&, std::size_t, std::size_t)> h;  // h_ij, empty means zero
  std::function<Mat(const Vec&)> sigma;                        // n x d
  std::vector<Mat> controls;                                   // points of Q, extremes included
  double claimed_alpha = 0.0;
  double kappa = 1.0;
  double sigma_bound = 0.0;
  std::optional<ScalarCoefficients> scalar;

  /// G(A) = 1/2 max_q Tr(A q) over the stored control points.
  double G(const Mat& a) const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& q : controls) best = std::max(best, 0.5 * (a * q).trace());
    return best;
  }

  double q_lo() const { return scalar_controls().front(); }
  double q_hi() const { return scalar_controls().back(); }

  std::vector<double> scalar_controls() const {
    SUBLINERGO_REQUIRE(d == 1, "scalar controls need a one-dimensional noise");
    std::vector<double> v;
    for (const auto& q : controls) v.push_back(q(0, 0));
    std::sort(v.begin(), v.end());
    return v;
  }

  /// Symmetry of h, PSD controls, finite coefficients and the sigma bound on a probe grid.
  void validate() const {
    SUBLINERGO_REQUIRE(n >= 1 && d >= 1 && b && sigma && !controls.empty(), "incomplete G-SDE model");
    for (const auto& q : controls) {
      SUBLINERGO_REQUIRE(q.rows() == static_cast<Eigen::Index>(d) && q.cols() == static_cast<Eigen::Index>(d),
                         "control has the wrong shape");
      if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw DomainError("control is not symmetric");
      Eigen::SelfAdjointEigenSolver<Mat> es(q);
      if (es.eigenvalues().minCoeff() < -1e-12) throw DomainError("control is not positive semi-definite");
    }
    for (int k = -8; k <= 8; ++k) {
      Vec x = Vec::Constant(static_cast<Eigen::Index>(n), 0.5 * k);
      if (!b(x).allFinite()) throw DomainError("drift is not finite on the probe grid");
      const Mat s = sigma(x);
      if (!s.allFinite()) throw DomainError("diffusion is not finite on the probe grid");
      if (sigma_bound > 0 && (s.transpose() * s).trace() > sigma_bound * sigma_bound * (1 + 1e-12))
        throw DomainError("diffusion exceeds its declared bound");
      if (h)
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t j = i + 1; j < d; ++j)
            if ((h(x, i, j) - h(x, j, i)).cwiseAbs().maxCoeff() > 1e-12) throw DomainError("h_ij is not symmetric");
    }
  }
};

namespace detail {

inline Mat control_sqrt(const Mat& q) {
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw DomainError("control is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(q);
  if (es.eigenvalues().minCoeff() < -1e-12) throw DomainError("control is not positive semi-definite");
  const Vec l = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * l.asDiagonal() * es.eigenvectors().transpose();
}

inline GSDEModel scalar_model(std::string name, ScalarCoefficients c, double q_lo, double q_hi, double alpha,
                              double sigma_bound, double kappa = 1.0) {
  SUBLINERGO_REQUIRE(0.0 <= q_lo && q_lo <= q_hi, "control range needs 0 <= q_lo <= q_hi");
  GSDEModel m;
  m.name = std::move(name);
  m.b = [f = c.b](const Vec& x) { return Vec::Constant(1, f(x[0])); };
  if (c.h) m.h = [f = c.h](const Vec& x, std::size_t, std::size_t) { return Vec::Constant(1, f(x[0])); };
  m.sigma = [f = c.sigma](const Vec& x) { return Mat::Constant(1, 1, f(x[0])); };
  m.controls = {Mat::Constant(1, 1, q_lo), Mat::Constant(1, 1, q_hi)};
  m.claimed_alpha = alpha;
  m.kappa = kappa;
  m.sigma_bound = sigma_bound;
  m.scalar = std::move(c);
  return m;
}

}  // namespace detail

namespace gsde_presets {

/// dX = -a X dt + s dB, Q = [q_lo, q_hi].
inline GSDEModel gou(double a = 1.0, double s = 1.0, double q_lo = 1.0, double q_hi = 4.0) {
  return detail::scalar_model("gou", {[a](double x) { return -a * x; }, {}, [s](double) { return s; }}, q_lo, q_hi, a,
                              std::abs(s));
}

/// dX = -(X + X^3) dt + dB, Q = [q_lo, q_hi].
inline GSDEModel cubic(double q_lo = 1.0, double q_hi = 4.0) {
  return detail::scalar_model("cubic", {[](double x) { return -(x + x * x * x); }, {}, [](double) { return 1.0; }},
                              q_lo, q_hi, 1.0, 1.0, 3.0);
}

/// Piecewise-linear function through (xs[i], ys[i]), extended linearly.
inline std::function<double(double)> piecewise_linear(std::vector<double> xs, std::vector<double> ys) {
  SUBLINERGO_REQUIRE(!xs.empty() && xs.size() == ys.size(), "breakpoint lists must have equal nonzero length");
  SUBLINERGO_REQUIRE(std::is_sorted(xs.begin(), xs.end()) &&
                         std::adjacent_find(xs.begin(), xs.end()) == xs.end(),
                     "breakpoints must be strictly increasing");
  if (xs.size() == 1) return [c = ys[0]](double) { return c; };
  return [xs, ys](double x) {
    std::size_t i = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
    i = std::clamp<std::size_t>(i, 1, xs.size() - 1);
    const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + t * (ys[i] - ys[i - 1]);
  };
}

/// Scalar model from breakpoint tables for b, sigma and (optionally) h.
inline GSDEModel custom(std::vector<double> bx, std::vector<double> by, std::vector<double> sx,
                        std::vector<double> sy, std::vector<double> hx, std::vector<double> hy, double q_lo,
                        double q_hi, double alpha) {
  double sb = 0.0;
  for (double v : sy) sb = std::max(sb, std::abs(v));
  ScalarCoefficients c{piecewise_linear(bx, by), hx.empty() ? std::function<double(double)>{} : piecewise_linear(hx, hy),
                       piecewise_linear(sx, sy)};
  // sigma is bounded only when it is flat outside its breakpoints
  const bool flat = sy.size() == 1 || (sy[0] == sy[1] && sy[sy.size() - 1] == sy[sy.size() - 2]);
  return detail::scalar_model("custom", std::move(c), q_lo, q_hi, alpha, flat ? sb : 0.0);
}

}  // namespace gsde_presets

// ---------------------------------------------------------------------------
// Policies

struct GsdePolicy {
  std::string name;
  std::function<Mat(std::size_t step, double t, const Vec& x)> q;
  std::function<double(std::size_t step, double t, double x)> q1;  // scalar fast path
};

namespace gsde_policy {

inline GsdePolicy constant(const Mat& q, std::string name = "") {
  GsdePolicy p;
  p.name = name.empty() ? "const" : std::move(name);
  if (q.size() == 1) {
    const double v = q(0, 0);
    p.name = name.empty() ? "const(" + std::to_string(v) + ")" : p.name;
    p.q1 = [v](std::size_t, double, double) { return v; };
  }
  p.q = [q](std::size_t, double, const Vec&) { return q; };
  return p;
}

inline GsdePolicy constant(double q) { return constant(Mat::Constant(1, 1, q)); }

/// hi when switch_fn(t, x) >= 0, else lo.
inline GsdePolicy bang_bang(const Mat& lo, const Mat& hi, std::function<double(double, const Vec&)> switch_fn,
                            std::string name = "bang-bang") {
  GsdePolicy p;
  p.name = std::move(name);
  p.q = [=](std::size_t, double t, const Vec& x) { return switch_fn(t, x) >= 0.0 ? hi : lo; };
  if (lo.size() == 1) {
    const double l = lo(0, 0), h = hi(0, 0);
    p.q1 = [=](std::size_t, double t, double x) { return switch_fn(t, Vec::Constant(1, x)) >= 0.0 ? h : l; };
  }
  return p;
}

/// Constant controls at each stored control point of the model, plus
/// bang-bang switching on sign(x_0) between the extremes of a scalar Q.
inline std::vector<GsdePolicy> default_family(const GSDEModel& m) {
  std::vector<GsdePolicy> out;
  for (const auto& q : m.controls) out.push_back(constant(q));
  if (m.d == 1 && m.controls.size() >= 2) {
    const Mat lo = Mat::Constant(1, 1, m.q_lo()), hi = Mat::Constant(1, 1, m.q_hi());
    out.push_back(bang_bang(lo, hi, [](double, const Vec& x) { return x[0]; }, "bang-bang(sign x)"));
    out.push_back(bang_bang(hi, lo, [](double, const Vec& x) { return x[0]; }, "bang-bang(-sign x)"));
  }
  return out;
}

}  // namespace gsde_policy

// ---------------------------------------------------------------------------
// Integration

struct GsdeEnsemble {
  double dt = 0.0;
  std::size_t n = 1;
  std::size_t n_paths = 0;
  std::vector<std::size_t> record_steps;
  std::vector<double> states;    // [path][record][coord]
  std::vector<double> controls;  // [path][record] trace of the control applied after the record point

  std::size_t n_records() const { return record_steps.size(); }
  double time(std::size_t r) const { return dt * static_cast<double>(record_steps[r]); }
  std::span<const double> state(std::size_t p, std::size_t r) const {
    return {states.data() + (p * n_records() + r) * n, n};
  }
  /// First coordinate at record r across paths.
  std::vector<double> column(std::size_t r, std::size_t coord = 0) const {
    std::vector<double> v(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) v[p] = state(p, r)[coord];
    return v;
  }

  void write_csv(std::ostream& os) const {
    os << "path_id,time,value\n";
    os.precision(17);
    for (std::size_t p = 0; p < n_paths; ++p)
      for (std::size_t r = 0; r < n_records(); ++r) os << p << ',' << time(r) << ',' << state(p, r)[0] << '\n';
  }
};

struct IntegrateOptions {
  std::int64_t start_index = 0;            // absolute index of the first step (noise key)
  std::vector<std::size_t> record_steps;   // empty: every `stride` steps plus the end
  std::size_t stride = 1;
  std::uint64_t stream_base = 0;
  double blowup = 1e8;
};

namespace detail {

inline std::uint64_t noise_counter(std::int64_t abs_step, std::size_t d, std::size_t j) {
  return (static_cast<std::uint64_t>(abs_step + (std::int64_t{1} << 52))) * d + j;
}

/// Scalar noise stream reading both Box-Muller outputs of each block.
class PairedNormals {
 public:
  PairedNormals(const rng::CounterRng& g, std::uint64_t stream) : g_(g), stream_(stream) {}
  double operator()(std::uint64_t k) {
    if (k / 2 != block_) {
      block_ = k / 2;
      pair_ = g_.normal2(stream_, block_);
    }
    return pair_[k % 2];
  }

 private:
  const rng::CounterRng& g_;
  std::uint64_t stream_;
  std::uint64_t block_ = UINT64_MAX;
  std::array<double, 2> pair_{};
};

inline std::vector<std::size_t> record_plan(std::size_t n_steps, const IntegrateOptions& opt) {
  if (!opt.record_steps.empty()) {
    for (std::size_t s : opt.record_steps) SUBLINERGO_REQUIRE(s <= n_steps, "record step beyond the horizon");
    return opt.record_steps;
  }
  std::vector<std::size_t> r;
  const std::size_t stride = std::max<std::size_t>(1, opt.stride);
  for (std::size_t k = 0; k <= n_steps; k += stride) r.push_back(k);
  if (r.back() != n_steps) r.push_back(n_steps);
  return r;
}

}  // namespace detail

/// Euler step X + b dt + sum_ij h_ij q_ij dt + sigma sqrt(q) dW for a shared
/// noise key per (path, absolute step).
inline GsdeEnsemble integrate(const GSDEModel& m, const GsdePolicy& pol, const Vec& x0, double dt, double T,
                              std::size_t n_paths, std::uint64_t seed, const IntegrateOptions& opt = {}) {
  SUBLINERGO_REQUIRE(dt > 0.0, "dt must be positive");
  SUBLINERGO_REQUIRE(T >= 0.0, "horizon must be nonnegative");
  SUBLINERGO_REQUIRE(n_paths >= 1, "ensemble needs at least one path");
  SUBLINERGO_REQUIRE(x0.size() == static_cast<Eigen::Index>(m.n), "initial state has the wrong dimension");
  const std::size_t n_steps = static_cast<std::size_t>(std::llround(T / dt));
  GsdeEnsemble e;
  e.dt = dt;
  e.n = m.n;
  e.n_paths = n_paths;
  e.record_steps = detail::record_plan(n_steps, opt);
  std::vector<std::size_t> slot(n_steps + 1, SIZE_MAX);
  for (std::size_t r = 0; r < e.record_steps.size(); ++r) slot[e.record_steps[r]] = r;
  e.states.assign(n_paths * e.n_records() * m.n, 0.0);
  e.controls.assign(n_paths * e.n_records(), 0.0);
  const rng::CounterRng g(seed);
  const double sdt = std::sqrt(dt);
  const bool fast = m.scalar.has_value() && static_cast<bool>(pol.q1);
  double qmin = 0, qmax = 0;
  if (m.d == 1) {
    qmin = m.q_lo();
    qmax = m.q_hi();
  }
  parallel_chunks(n_paths, [&](std::size_t pb, std::size_t pe) {
    for (std::size_t p = pb; p < pe; ++p) {
      const std::uint64_t stream = opt.stream_base + p;
      auto store = [&](std::size_t k, const double* x, double qtrace) {
        if (slot[k] == SIZE_MAX) return;
        const std::size_t r = slot[k];
        std::copy(x, x + m.n, e.states.begin() + static_cast<std::ptrdiff_t>((p * e.n_records() + r) * m.n));
        e.controls[p * e.n_records() + r] = qtrace;
      };
      if (fast) {
        const auto& c = *m.scalar;
        detail::PairedNormals normals(g, stream);
        double x = x0[0];
        for (std::size_t k = 0; k < n_steps; ++k) {
          const double q = pol.q1(k, dt * static_cast<double>(k), x);
          if (!(q >= qmin - 1e-12 && q <= qmax + 1e-12))
            throw DomainError("policy " + pol.name + " left Q at step " + std::to_string(k));
          store(k, &x, q);
          const double dw = sdt * normals(detail::noise_counter(opt.start_index + static_cast<std::int64_t>(k), 1, 0));
          x += c.b(x) * dt + (c.h ? c.h(x) * q * dt : 0.0) + c.sigma(x) * std::sqrt(q) * dw;
          if (!(std::abs(x) <= opt.blowup)) throw IntegrationError("state left the bounded region", k + 1);
        }
        store(n_steps, &x, 0.0);
        continue;
      }
      Vec x = x0, dw(static_cast<Eigen::Index>(m.d));
      Mat last_q, root;
      for (std::size_t k = 0; k < n_steps; ++k) {
        const Mat q = pol.q(k, dt * static_cast<double>(k), x);
        if (last_q.size() == 0 || q != last_q) {
          root = detail::control_sqrt(q);
          last_q = q;
          if (m.d == 1 && !(q(0, 0) >= qmin - 1e-12 && q(0, 0) <= qmax + 1e-12))
            throw DomainError("policy " + pol.name + " left Q at step " + std::to_string(k));
        }
        store(k, x.data(), q.trace());
        for (std::size_t j = 0; j < m.d; ++j)
          dw[static_cast<Eigen::Index>(j)] =
              sdt * gaussian(g, stream, detail::noise_counter(opt.start_index + static_cast<std::int64_t>(k), m.d, j));
        Vec dx = m.b(x) * dt + m.sigma(x) * (root * dw);
        if (m.h)
          for (std::size_t i = 0; i < m.d; ++i)
            for (std::size_t j = 0; j < m.d; ++j) dx += m.h(x, i, j) * q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * dt;
        x += dx;
        if (!(x.cwiseAbs().maxCoeff() <= opt.blowup)) throw IntegrationError("state left the bounded region", k + 1);
      }
      store(n_steps, x.data(), 0.0);
    }
  });
  return e;
}

// ---------------------------------------------------------------------------
// Dissipativity

struct DissipativityReport {
  double min_margin = std::numeric_limits<double>::infinity();
  std::vector<double> worst_x1, worst_x2;
  std::size_t pairs_used = 0;
  std::size_t skipped = 0;
  bool passed = false;
};

/// min over sampled pairs of -LHS / |x1 - x2|^2, where
/// LHS = <dx, db> + G(dsigma^T dsigma + 2 [<dx, dh_ij>]_ij).
inline DissipativityReport check_dissipativity(const GSDEModel& m, std::size_t n_pairs, double radius,
                                               std::uint64_t seed) {
  SUBLINERGO_REQUIRE(n_pairs >= 1, "dissipativity probe needs at least one pair");
  const rng::CounterRng g(seed);
  const auto N = static_cast<Eigen::Index>(m.n), D = static_cast<Eigen::Index>(m.d);
  auto sample = [&](std::uint64_t stream) {
    Vec v(N);
    for (Eigen::Index i = 0; i < N; ++i) v[i] = gaussian(g, stream, static_cast<std::uint64_t>(i));
    const double u = g.uniform(stream, 1u << 20);
    return Vec(v.normalized() * radius * std::pow(u, 1.0 / static_cast<double>(m.n)));
  };
  DissipativityReport r;
  for (std::size_t k = 0; k < n_pairs; ++k) {
    const Vec x1 = sample(2 * k), x2 = sample(2 * k + 1);
    const Vec dx = x1 - x2;
    const double n2 = dx.squaredNorm();
    if (n2 == 0.0) {
      ++r.skipped;
      continue;
    }
    const Mat ds = m.sigma(x1) - m.sigma(x2);
    Mat a = ds.transpose() * ds;
    if (m.h)
      for (Eigen::Index i = 0; i < D; ++i)
        for (Eigen::Index j = 0; j < D; ++j)
          a(i, j) += 2.0 * dx.dot(m.h(x1, static_cast<std::size_t>(i), static_cast<std::size_t>(j)) -
                                  m.h(x2, static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
    const double lhs = dx.dot(m.b(x1) - m.b(x2)) + m.G(a);
    const double margin = -lhs / n2;
    ++r.pairs_used;
    if (margin < r.min_margin) {
      r.min_margin = margin;
      r.worst_x1.assign(x1.data(), x1.data() + N);
      r.worst_x2.assign(x2.data(), x2.data() + N);
    }
  }
  r.passed = r.pairs_used > 0 && r.min_margin >= m.claimed_alpha - 1e-9 && m.claimed_alpha > 0;
  return r;
}

// ---------------------------------------------------------------------------
// Markov operator T_t

struct MarkovOptions {
  double dt = 0.01;
  double dx = 0.0025;
  double extent = 0.0;  // half-width of the state grid; 0: 10 + |x|
  int interior_controls = 3;
  std::size_t n_paths = 20000;  // policy-max method
  std::uint64_t seed = 1;
};

/// Backward control lattice for n = d = 1:
/// u_{k+1}(x) = max_q 1/2 [u_k(x + mu dt + s sqrt(q dt)) + u_k(x + mu dt - s sqrt(q dt))],
/// mu = b(x) + h(x) q. Linear interpolation, linear extrapolation past the edges.
class MarkovLattice {
 public:
  MarkovLattice(const GSDEModel& m, double extent, MarkovOptions opt) : opt_(opt) {
    if (!(m.n == 1 && m.d == 1 && m.scalar)) throw UnsupportedError("dp evaluation of T_t needs n = d = 1");
    SUBLINERGO_REQUIRE(opt.dt > 0 && opt.dx > 0 && extent > 0, "lattice needs positive dt, dx and extent");
    const auto half = static_cast<std::size_t>(std::ceil(extent / opt.dx));
    nodes_ = 2 * half + 1;
    x0_ = -static_cast<double>(half) * opt.dx;
    const auto qs = m.scalar_controls();
    std::vector<double> ctl{qs.front(), qs.back()};
    for (int i = 1; i <= opt.interior_controls; ++i)
      ctl.push_back(qs.front() + (qs.back() - qs.front()) * i / (opt.interior_controls + 1));
    std::sort(ctl.begin(), ctl.end());
    ctl.erase(std::unique(ctl.begin(), ctl.end()), ctl.end());
    const auto& c = *m.scalar;
    // precomputed read positions per node and control
    reads_.resize(nodes_ * ctl.size() * 2);
    for (std::size_t i = 0; i < nodes_; ++i) {
      const double xi = x(i);
      for (std::size_t k = 0; k < ctl.size(); ++k) {
        const double mu = c.b(xi) + (c.h ? c.h(xi) * ctl[k] : 0.0);
        const double s = c.sigma(xi) * std::sqrt(ctl[k] * opt.dt);
        reads_[(i * ctl.size() + k) * 2] = xi + mu * opt.dt + s;
        reads_[(i * ctl.size() + k) * 2 + 1] = xi + mu * opt.dt - s;
      }
    }
    n_ctl_ = ctl.size();
  }

  std::size_t nodes() const { return nodes_; }
  double x(std::size_t i) const { return x0_ + opt_.dx * static_cast<double>(i); }
  double dt() const { return opt_.dt; }

  std::vector<double> initial(const std::function<double(double)>& phi) const {
    std::vector<double> u(nodes_);
    for (std::size_t i = 0; i < nodes_; ++i) u[i] = phi(x(i));
    return u;
  }

  /// One backward step.
  std::vector<double> step(const std::vector<double>& u) const {
    std::vector<double> next(nodes_);
    parallel_chunks(nodes_, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n_ctl_; ++k) {
          const std::size_t o = (i * n_ctl_ + k) * 2;
          best = std::max(best, 0.5 * (at(u, reads_[o]) + at(u, reads_[o + 1])));
        }
        next[i] = best;
      }
    });
    return next;
  }

  std::vector<double> advance(std::vector<double> u, std::size_t steps) const {
    for (std::size_t k = 0; k < steps; ++k) u = step(u);
    return u;
  }

  /// Interpolated value of a layer, extrapolated linearly past the edges.
  double at(const std::vector<double>& u, double xv) const {
    double s = (xv - x0_) / opt_.dx;
    std::size_t i;
    if (s <= 0.0) {
      i = 0;
    } else if (s >= static_cast<double>(nodes_ - 1)) {
      i = nodes_ - 2;
    } else {
      i = static_cast<std::size_t>(s);
    }
    const double t = s - static_cast<double>(i);
    if (t == 0.0) return u[i];
    return u[i] + t * (u[i + 1] - u[i]);
  }

  std::size_t steps_for(double t) const {
    SUBLINERGO_REQUIRE(t >= 0.0, "time must be nonnegative");
    return static_cast<std::size_t>(std::llround(t / opt_.dt));
  }

 private:
  MarkovOptions opt_;
  std::size_t nodes_ = 0, n_ctl_ = 0;
  double x0_ = 0.0;
  std::vector<double> reads_;
};

struct MarkovValue {
  double value = 0.0;
  double se = 0.0;
  std::string method;
  std::string policy;  // maximising policy for policy-max
  std::string note;
};

enum class MarkovMethod { dp, policy_max };

/// Policy-max value of E[phi(X_t^x)] with its standard error.
inline MarkovValue policy_max_value(const GSDEModel& m, double t, const TestFunction& phi, const Vec& x,
                                    const std::vector<GsdePolicy>& family, const MarkovOptions& opt) {
  MarkovValue best;
  best.value = -std::numeric_limits<double>::infinity();
  best.method = "policy-max";
  best.note = "lower bound over " + std::to_string(family.size()) + " policies";
  if (t == 0.0) {
    best.value = phi(std::span<const double>(x.data(), m.n));
    return best;
  }
  IntegrateOptions io;
  io.stride = SIZE_MAX;
  for (const auto& pol : family) {
    auto e = integrate(m, pol, x, opt.dt, t, opt.n_paths, opt.seed, io);
    std::vector<double> v(e.n_paths);
    for (std::size_t p = 0; p < e.n_paths; ++p) v[p] = phi(e.state(p, e.n_records() - 1));
    const auto ms = mean_se(v);
    if (ms.mean > best.value) {
      best.value = ms.mean;
      best.se = ms.se;
      best.policy = pol.name;
    }
  }
  return best;
}

inline double default_extent(const GSDEModel& m, double x) {
  double s = 0.0;
  if (m.scalar) s = std::abs(m.scalar->sigma(x)) * std::sqrt(m.q_hi());
  return 10.0 + std::abs(x) + 4.0 * s;
}

/// T_t[phi](x) = E-hat[phi(X_t^x)].
inline MarkovValue markov_T(const GSDEModel& m, double t, const TestFunction& phi, const Vec& x, MarkovMethod method,
                            const MarkovOptions& opt = {}) {
  SUBLINERGO_REQUIRE(t >= 0.0, "time must be nonnegative");
  if (method == MarkovMethod::dp) {
    if (m.n != 1 || m.d != 1) throw UnsupportedError("dp evaluation of T_t needs n = d = 1");
    MarkovValue r;
    r.method = "dp";
    if (t == 0.0) {
      r.value = phi(std::span<const double>(x.data(), 1));
      return r;
    }
    MarkovLattice lat(m, opt.extent > 0 ? opt.extent : default_extent(m, x[0]), opt);
    auto f = [&](double v) { return phi(std::span<const double>(&v, 1)); };
    const auto u = lat.advance(lat.initial(f), lat.steps_for(t));
    r.value = lat.at(u, x[0]);
    return r;
  }
  return policy_max_value(m, t, phi, x, gsde_policy::default_family(m), opt);
}

// ---------------------------------------------------------------------------
// Contraction

struct ContractionRow {
  std::string policy;
  double t = 0.0;
  double ratio = 0.0;
  double se = 0.0;
  double bound = 0.0;  // e^{-2 alpha t}
  bool ok = false;
};

/// Coupled copies from x and y share noise and control (the control reads the
/// x-copy). Ratio E[|X_t^x - X_t^y|^2] / |x - y|^2 per policy and t.
inline std::vector<ContractionRow> contraction_test(const GSDEModel& m, const Vec& x, const Vec& y,
                                                    const std::vector<double>& t_grid,
                                                    const std::vector<GsdePolicy>& family, double dt,
                                                    std::size_t n_paths, std::uint64_t seed) {
  const double d0 = (x - y).squaredNorm();
  SUBLINERGO_REQUIRE(d0 > 0.0, "contraction test needs x != y");
  SUBLINERGO_REQUIRE(std::is_sorted(t_grid.begin(), t_grid.end()), "time grid must be increasing");
  std::vector<std::size_t> marks;
  for (double t : t_grid) marks.push_back(static_cast<std::size_t>(std::llround(t / dt)));
  const std::size_t n_steps = marks.empty() ? 0 : marks.back();
  const rng::CounterRng g(seed);
  const double sdt = std::sqrt(dt);
  std::vector<ContractionRow> rows;
  for (const auto& pol : family) {
    std::vector<double> ratios(n_paths * marks.size());
    parallel_chunks(n_paths, [&](std::size_t pb, std::size_t pe) {
      for (std::size_t p = pb; p < pe; ++p) {
        std::size_t next = 0;
        if (m.scalar && pol.q1) {
          const auto& c = *m.scalar;
          detail::PairedNormals normals(g, p);
          double a = x[0], b = y[0];
          for (std::size_t k = 0; k <= n_steps; ++k) {
            while (next < marks.size() && marks[next] == k) ratios[p * marks.size() + next++] = (a - b) * (a - b) / d0;
            if (k == n_steps) break;
            const double q = pol.q1(k, dt * static_cast<double>(k), a);
            const double dw = sdt * normals(detail::noise_counter(static_cast<std::int64_t>(k), 1, 0));
            const double sq = std::sqrt(q);
            const double na = a + c.b(a) * dt + (c.h ? c.h(a) * q * dt : 0.0) + c.sigma(a) * sq * dw;
            const double nb = b + c.b(b) * dt + (c.h ? c.h(b) * q * dt : 0.0) + c.sigma(b) * sq * dw;
            a = na;
            b = nb;
          }
          continue;
        }
        Vec a = x, b = y, dw(static_cast<Eigen::Index>(m.d));
        for (std::size_t k = 0; k <= n_steps; ++k) {
          while (next < marks.size() && marks[next] == k) ratios[p * marks.size() + next++] = (a - b).squaredNorm() / d0;
          if (k == n_steps) break;
          const Mat q = pol.q(k, dt * static_cast<double>(k), a);
          const Mat root = detail::control_sqrt(q);
          for (std::size_t j = 0; j < m.d; ++j)
            dw[static_cast<Eigen::Index>(j)] = sdt * gaussian(g, p, detail::noise_counter(static_cast<std::int64_t>(k), m.d, j));
          auto drift = [&](const Vec& z) {
            Vec v = m.b(z) * dt;
            if (m.h)
              for (std::size_t i = 0; i < m.d; ++i)
                for (std::size_t j = 0; j < m.d; ++j)
                  v += m.h(z, i, j) * q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * dt;
            return v;
          };
          const Vec na = a + drift(a) + m.sigma(a) * (root * dw);
          const Vec nb = b + drift(b) + m.sigma(b) * (root * dw);
          a = na;
          b = nb;
        }
      }
    });
    for (std::size_t i = 0; i < marks.size(); ++i) {
      std::vector<double> v(n_paths);
      for (std::size_t p = 0; p < n_paths; ++p) v[p] = ratios[p * marks.size() + i];
      const auto ms = mean_se(v);
      ContractionRow row{pol.name, t_grid[i], ms.mean, ms.se, std::exp(-2.0 * m.claimed_alpha * t_grid[i]), false};
      row.ok = row.ratio <= row.bound * (1.0 + 3.0 * ms.se) + 3.0 * ms.se + 1e-12;
      rows.push_back(row);
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Stationary solution and invariant expectation

struct InvariantValue {
  std::string name;
  double value = 0.0;
  double se = 0.0;
  std::string policy;
};

struct StationaryEstimate {
  double horizon = 0.0;
  std::vector<double> horizons_tried;
  std::vector<double> cauchy_gaps;  // between successive horizons
  bool converged = false;
  std::vector<std::string> policies;
  std::vector<std::vector<double>> samples;  // [policy][path * n + coord] at time 0
  std::vector<InvariantValue> table;
  std::size_t n = 1;

  const InvariantValue& value(const std::string& name) const {
    for (const auto& v : table)
      if (v.name == name) return v;
    throw DomainError("no invariant value registered for " + name);
  }

  /// max over policies of the sample mean of f at the stationary state.
  InvariantValue evaluate(const TestFunction& f) const {
    InvariantValue best{f.name, -std::numeric_limits<double>::infinity(), 0.0, ""};
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const std::size_t paths = samples[k].size() / n;
      std::vector<double> v(paths);
      for (std::size_t p = 0; p < paths; ++p) v[p] = f(std::span<const double>(samples[k].data() + p * n, n));
      const auto ms = mean_se(v);
      if (ms.mean > best.value) best = {f.name, ms.mean, ms.se, policies[k]};
    }
    return best;
  }
};

struct PullbackOptions {
  double dt = 0.01;
  std::size_t n_paths = 20000;
  std::uint64_t seed = 1;
  std::vector<double> schedule;  // empty: doubling from the burn-in rule
  double x0 = 0.0;
};

/// X_0^{-T, x0} for increasing T with common random numbers keyed by absolute
/// time; stops when successive max-over-policy summaries of phis differ by < tol.
inline StationaryEstimate pullback_stationary(const GSDEModel& m, const std::vector<TestFunction>& phis,
                                              const std::vector<GsdePolicy>& family, double tol,
                                              const PullbackOptions& opt = {}) {
  SUBLINERGO_REQUIRE(m.claimed_alpha > 0.0, "pullback needs a dissipative model (alpha > 0)");
  SUBLINERGO_REQUIRE(!family.empty(), "pullback needs at least one policy");
  std::vector<double> schedule = opt.schedule;
  if (schedule.empty()) {
    // e^{-alpha T} |x0| < tol / 10, and at least a few relaxation times
    double T = std::max(4.0 / m.claimed_alpha,
                        std::log(10.0 * (1.0 + std::abs(opt.x0)) / std::max(tol, 1e-12)) / m.claimed_alpha);
    for (int i = 0; i < 5; ++i, T *= 2) schedule.push_back(T);
  }
  StationaryEstimate est;
  est.n = m.n;
  std::vector<double> prev;
  const Vec x0 = Vec::Constant(static_cast<Eigen::Index>(m.n), opt.x0);
  for (double T : schedule) {
    const auto steps = static_cast<std::int64_t>(std::llround(T / opt.dt));
    IntegrateOptions io;
    io.start_index = -steps;
    io.stride = SIZE_MAX;
    std::vector<std::vector<double>> samples;
    for (const auto& pol : family) {
      auto e = integrate(m, pol, x0, opt.dt, opt.dt * static_cast<double>(steps), opt.n_paths, opt.seed, io);
      std::vector<double> s(e.n_paths * m.n);
      for (std::size_t p = 0; p < e.n_paths; ++p) {
        auto v = e.state(p, e.n_records() - 1);
        std::copy(v.begin(), v.end(), s.begin() + static_cast<std::ptrdiff_t>(p * m.n));
      }
      samples.push_back(std::move(s));
    }
    est.samples = std::move(samples);
    est.policies.clear();
    for (const auto& pol : family) est.policies.push_back(pol.name);
    est.horizon = opt.dt * static_cast<double>(steps);
    est.horizons_tried.push_back(est.horizon);
    std::vector<double> summary;
    for (const auto& f : phis) summary.push_back(est.evaluate(f).value);
    if (!prev.empty()) {
      double gap = 0.0;
      for (std::size_t i = 0; i < summary.size(); ++i) gap = std::max(gap, std::abs(summary[i] - prev[i]));
      est.cauchy_gaps.push_back(gap);
      if (gap < tol) {
        est.converged = true;
        break;
      }
    }
    prev = summary;
  }
  est.table.clear();
  for (const auto& f : phis) est.table.push_back(est.evaluate(f));
  return est;
}

// ---------------------------------------------------------------------------
// Decay of T_t towards the invariant expectation

struct DecayRow {
  double t = 0.0;
  double gap = 0.0;
  double se = 0.0;
  bool used = false;
};

struct DecayFit {
  std::vector<DecayRow> rows;
  double alpha_hat = 0.0;
  double alpha_lo = 0.0, alpha_hi = 0.0;  // +-2 standard errors of the slope
  double c = 0.0;
  bool degenerate = true;
  std::string note;

  void write_csv(std::ostream& os) const {
    os << "t,gap,se\n";
    os.precision(17);
    for (const auto& r : rows) os << r.t << ',' << r.gap << ',' << r.se << '\n';
  }
};

/// Fits |T_t phi(x) - T~[phi]| <= c l_phi (1 + |x|) e^{-alpha t} by least
/// squares of log gap on t, dropping gaps below the noise floor.
inline DecayFit invariance_decay_fit(const GSDEModel& m, const TestFunction& phi, const Vec& x,
                                     const std::vector<double>& t_grid, double invariant_value, double invariant_se,
                                     MarkovMethod method = MarkovMethod::dp, const MarkovOptions& opt = {}) {
  DecayFit fit;
  std::vector<double> ts, logs;
  std::optional<MarkovLattice> lat;
  std::vector<double> u;
  double t_done = 0.0;
  if (method == MarkovMethod::dp) {
    lat.emplace(m, opt.extent > 0 ? opt.extent : default_extent(m, x[0]), opt);
    u = lat->initial([&](double v) { return phi(std::span<const double>(&v, 1)); });
  }
  std::vector<double> sorted(t_grid);
  std::sort(sorted.begin(), sorted.end());
  for (double t : sorted) {
    MarkovValue tv;
    if (lat) {
      const std::size_t target = lat->steps_for(t), have = lat->steps_for(t_done);
      u = lat->advance(std::move(u), target - have);
      t_done = t;
      tv.value = lat->at(u, x[0]);
    } else {
      tv = markov_T(m, t, phi, x, method, opt);
    }
    DecayRow row{t, std::abs(tv.value - invariant_value), std::hypot(tv.se, invariant_se), false};
    const double floor = 3.0 * row.se + 1e-9;
    if (row.gap > floor) {
      row.used = true;
      ts.push_back(t);
      logs.push_back(std::log(row.gap));
    }
    fit.rows.push_back(row);
  }
  if (ts.size() < 2) {
    fit.note = "degenerate fit: fewer than two gaps above the noise floor";
    return fit;
  }
  const LineFit lf = fit_line(ts, logs);
  fit.degenerate = false;
  fit.alpha_hat = -lf.slope;
  fit.alpha_lo = fit.alpha_hat - 2.0 * lf.slope_se;
  fit.alpha_hi = fit.alpha_hat + 2.0 * lf.slope_se;
  fit.c = std::exp(lf.intercept) / (std::max(phi.lipschitz, 1e-300) * (1.0 + x.norm()));
  fit.note = std::to_string(ts.size()) + " points above the noise floor";
  return fit;
}

// ---------------------------------------------------------------------------
// Non-independence of the stationary solution

struct NonIndependence {
  double lhs = 0.0;
  double rhs = 0.0;
  double se = 0.0;
  double z = 0.0;
  bool refuted = false;  // z >= 4
  std::string lhs_policy;
};

/// lhs = max_pi mean[phi1(xi_s) phi2(xi_t)], rhs = T~[phi1] T~[phi2] with both
/// invariant values estimated from the same stationary paths; the standard
/// error combines all three means by the delta method.
inline NonIndependence non_independence_test(const GSDEModel& m, double s, double t, const TestFunction& phi1,
                                             const TestFunction& phi2, const std::vector<GsdePolicy>& family,
                                             const PullbackOptions& opt, double burn_in = 0.0) {
  SUBLINERGO_REQUIRE(s < t, "non-independence test needs s < t");
  SUBLINERGO_REQUIRE(m.claimed_alpha > 0.0, "stationary start needs a dissipative model");
  // the variance transient decays like e^{-2 alpha T}
  if (burn_in <= 0.0) burn_in = std::max(4.0, std::log(1e4 * (1.0 + std::abs(opt.x0))) / 2.0) / m.claimed_alpha;
  const auto ks = static_cast<std::int64_t>(std::llround(s / opt.dt));
  const auto kt = static_cast<std::int64_t>(std::llround(t / opt.dt));
  const auto kb = static_cast<std::int64_t>(std::llround(burn_in / opt.dt));
  IntegrateOptions io;
  io.start_index = -kb;
  io.record_steps = {static_cast<std::size_t>(kb + ks), static_cast<std::size_t>(kb + kt)};
  const Vec x0 = Vec::Constant(static_cast<Eigen::Index>(m.n), opt.x0);
  const std::size_t P = opt.n_paths;
  std::vector<std::vector<double>> a(family.size()), b(family.size());
  for (std::size_t k = 0; k < family.size(); ++k) {
    auto e = integrate(m, family[k], x0, opt.dt, opt.dt * static_cast<double>(kb + kt), P, opt.seed, io);
    a[k].resize(P);
    b[k].resize(P);
    for (std::size_t p = 0; p < P; ++p) {
      a[k][p] = phi1(e.state(p, 0));
      b[k][p] = phi2(e.state(p, 1));
    }
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  std::size_t kl = 0, k1 = 0, k2 = 0;
  double lhs = -std::numeric_limits<double>::infinity(), m1 = lhs, m2 = lhs;
  std::vector<double> prod(P);
  for (std::size_t k = 0; k < family.size(); ++k) {
    for (std::size_t p = 0; p < P; ++p) prod[p] = a[k][p] * b[k][p];
    const double pm = mean(prod), am = mean(a[k]), bm = mean(b[k]);
    if (pm > lhs) lhs = pm, kl = k;
    if (am > m1) m1 = am, k1 = k;
    if (bm > m2) m2 = bm, k2 = k;
  }
  NonIndependence r;
  r.lhs = lhs;
  r.rhs = m1 * m2;
  r.lhs_policy = family[kl].name;
  // influence of path p on lhs - rhs
  std::vector<double> infl(P);
  for (std::size_t p = 0; p < P; ++p) infl[p] = a[kl][p] * b[kl][p] - m2 * a[k1][p] - m1 * b[k2][p];
  r.se = mean_se(infl).se;
  const double diff = std::abs(r.lhs - r.rhs);
  if (diff <= 1e-12 * (1.0 + std::abs(r.lhs)) || r.se == 0.0) {
    r.z = 0.0;
  } else {
    r.z = diff / r.se;
  }
  r.refuted = r.z >= 4.0;
  return r;
}

}  // namespace sublinergo
