// Grid recursions: the v_n scheme for a one-step law and the binomial
// variance-control lattice for G-normal expectations.
#pragma once

#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "common.hpp"
#include "sequential.hpp"

namespace sublinergo {

/// Values of v(k/n, x) on a uniform grid, one vector per layer k.
struct LatticeTable {
  double x_min = 0.0;
  double dx = 1.0;
  std::vector<std::vector<double>> layers;
  std::size_t clipped_reads = 0;
  std::size_t total_reads = 0;
  std::vector<std::string> warnings;

  std::size_t nodes() const { return layers.empty() ? 0 : layers.front().size(); }
  double x(std::size_t i) const { return x_min + dx * static_cast<double>(i); }
  double x_max() const { return x(nodes() - 1); }
  double clipped_fraction() const {
    return total_reads == 0 ? 0.0 : static_cast<double>(clipped_reads) / static_cast<double>(total_reads);
  }

  /// Linear interpolation in layer k; reads outside the grid clamp to the edge.
  double at(std::size_t k, double xv) const { return interpolate(layers.at(k), xv, nullptr); }

  double interpolate(const std::vector<double>& v, double xv, bool* clipped) const {
    const double s = (xv - x_min) / dx;
    if (s <= 0.0 || s >= static_cast<double>(v.size() - 1)) {
      const bool out = s < -1e-9 || s > static_cast<double>(v.size() - 1) + 1e-9;
      if (clipped) *clipped = out;
      return s <= 0.0 ? v.front() : v.back();
    }
    if (clipped) *clipped = false;
    const double fl = std::floor(s);
    const auto i = static_cast<std::size_t>(fl);
    const double t = s - fl;
    if (t < 1e-12) return v[i];
    if (t > 1.0 - 1e-12) return v[i + 1];
    return (1.0 - t) * v[i] + t * v[i + 1];
  }

  /// CSV with header layer,x,value.
  void write_csv(std::ostream& os) const {
    os << "layer,x,value\n";
    os.precision(17);
    for (std::size_t k = 0; k < layers.size(); ++k)
      for (std::size_t i = 0; i < layers[k].size(); ++i) os << k << ',' << x(i) << ',' << layers[k][i] << '\n';
  }
};

struct LatticeOptions {
  double dx = 0.0;      // 0: automatic
  double extent = 0.0;  // half-width of the grid around 0; 0: automatic
};

/// v(0, x) = phi(x), v(k/n, x) = E-hat[ v((k-1)/n, x + Z/n) ].
inline LatticeTable v_n_recursion(const StepLaw& z, const ScalarFn& phi, std::size_t n, LatticeOptions opt = {}) {
  SUBLINERGO_REQUIRE(n >= 1, "v_n recursion needs n >= 1");
  const FiniteStep fs = z.finite();
  double reach = 0.0, sd = 0.0;
  for (double a : fs.atoms) reach = std::max(reach, std::abs(a));
  for (const auto& w : fs.weights) {
    double m = 0.0, m2 = 0.0;
    for (std::size_t a = 0; a < fs.n_atoms(); ++a) {
      m += w[a] * fs.atoms[a];
      m2 += w[a] * fs.atoms[a] * fs.atoms[a];
    }
    sd = std::max(sd, std::sqrt(std::max(0.0, m2 - m * m)));
  }
  const double extent = opt.extent > 0 ? opt.extent : reach + 3.0 * sd + (reach == 0.0 ? 1.0 : 0.0);
  double dx = opt.dx;
  if (dx <= 0.0) {
    const std::int64_t den = common_denominator(fs.atoms, 10000);
    dx = den > 0 ? 1.0 / (static_cast<double>(n) * static_cast<double>(den)) : extent / 2000.0;
    if (extent / dx > 2e6) dx = extent / 2000.0;
  }
  const auto half = static_cast<std::size_t>(std::ceil(extent / dx - 1e-9));
  LatticeTable t;
  t.dx = dx;
  t.x_min = -static_cast<double>(half) * dx;
  const std::size_t nodes = 2 * half + 1;
  std::vector<double> layer(nodes);
  for (std::size_t i = 0; i < nodes; ++i) layer[i] = phi(t.x(i));
  t.layers.push_back(layer);
  for (std::size_t k = 1; k <= n; ++k) {
    const auto& prev = t.layers.back();
    std::vector<double> cur(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& w : fs.weights) {
        double e = 0.0;
        for (std::size_t a = 0; a < fs.n_atoms(); ++a) {
          if (w[a] == 0.0) continue;
          bool clipped = false;
          e += w[a] * t.interpolate(prev, t.x(i) + fs.atoms[a] / static_cast<double>(n), &clipped);
          ++t.total_reads;
          if (clipped) ++t.clipped_reads;
        }
        best = std::max(best, e);
      }
      cur[i] = best;
    }
    t.layers.push_back(std::move(cur));
  }
  if (t.clipped_reads > 0)
    t.warnings.push_back("grid under-coverage: clipped fraction " + std::to_string(t.clipped_fraction()));
  return t;
}

/// E-hat[phi(B_1)] for B_1 G-normal with variance range [var_lo, var_hi]:
/// u_{k+1}(x) = max_q 1/2 [u_k(x + sqrt(q/N)) + u_k(x - sqrt(q/N))], q in
/// {var_lo, var_hi}, evaluated on the full domain of dependence of x = 0.
/// Node reads are exact when sqrt(var_lo / var_hi) is a small rational.
inline double g_normal_step(double var_lo, double var_hi, std::size_t steps, const std::function<double(double)>& phi) {
  if (!(var_lo >= 0.0 && var_lo <= var_hi)) throw DomainError("g_normal_step needs 0 <= var_lo <= var_hi");
  SUBLINERGO_REQUIRE(steps >= 1, "g_normal_step needs at least one step");
  const double n = static_cast<double>(steps);
  if (var_hi == 0.0) return phi(0.0);
  const double s_hi = std::sqrt(var_hi / n);
  const double ratio = std::sqrt(var_lo / var_hi);
  std::int64_t r = 64;
  double lo_offset = ratio * 64.0;  // fractional when irrational
  if (var_lo == 0.0) {
    r = 1;
    lo_offset = 0.0;
  } else if (const std::int64_t q = rational_denominator(ratio, 64); q > 0) {
    r = q;
    lo_offset = std::round(ratio * static_cast<double>(q));
  }
  const double dx = s_hi / static_cast<double>(r);
  const auto half0 = static_cast<std::int64_t>(steps) * r;
  std::vector<double> u(static_cast<std::size_t>(2 * half0 + 1));
  for (std::int64_t i = -half0; i <= half0; ++i) u[static_cast<std::size_t>(i + half0)] = phi(static_cast<double>(i) * dx);
  std::int64_t half = half0;
  auto read = [&](const std::vector<double>& v, std::int64_t h, double pos) {
    const double s = pos + static_cast<double>(h);
    const double fl = std::floor(s);
    const auto i = static_cast<std::size_t>(fl);
    const double t = s - fl;
    return t == 0.0 ? v[i] : (1.0 - t) * v[i] + t * v[i + 1];
  };
  for (std::size_t k = 1; k <= steps; ++k) {
    const std::int64_t nh = half - r;
    std::vector<double> next(static_cast<std::size_t>(2 * nh + 1));
    for (std::int64_t i = -nh; i <= nh; ++i) {
      const std::size_t c = static_cast<std::size_t>(i + half);
      const double up = 0.5 * (u[c + static_cast<std::size_t>(r)] + u[c - static_cast<std::size_t>(r)]);
      const double low = 0.5 * (read(u, half, static_cast<double>(i) + lo_offset) +
                                read(u, half, static_cast<double>(i) - lo_offset));
      next[static_cast<std::size_t>(i + nh)] = std::max(up, low);
    }
    u.swap(next);
    half = nh;
  }
  return u[0];
}

}  // namespace sublinergo
