// Distribution-level algebra on sequential models: Gamma_n, Gamma_*,
// identical distribution and independence of index blocks, and the
// variance inequality for an independent copy.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "common.hpp"
#include "scenario.hpp"
#include "sequential.hpp"

namespace sublinergo {

/// Gamma_n = { (1/n) sum E[X_k] : E in Theta } via h_n(p) = E-hat[<p, S_n>].
inline GammaSet gamma_n(const SequentialModel& m, std::size_t n) {
  if (n == 0) throw DomainError("gamma_n needs n >= 1");
  if (n > m.horizon()) throw DomainError("gamma_n needs n <= model horizon");
  auto id = [](double x) { return x; };
  if (m.dim() == 1) {
    const double hi = lln_expectation(m, id, n).value;
    const double lo = -lln_expectation(m, [](double x) { return -x; }, n).value;
    return GammaSet::interval(lo, hi);
  }
  auto dirs = direction_grid(m.dim());
  std::vector<double> h;
  for (const auto& p : dirs) h.push_back(lln_expectation(m.project(p), id, n).value);
  return GammaSet::from_support(std::move(dirs), std::move(h));
}

struct GammaStar {
  GammaSet set;
  bool converged = false;
  std::size_t n_max = 0;
  std::size_t last_change = 1;  // last n at which the intersection shrank
  std::vector<GammaSet> per_n;  // Gamma_1 .. Gamma_{n_max}
};

/// Intersection of Gamma_1..Gamma_{n_max}. Converged when the last two
/// intersections agree within the exact tolerance.
inline GammaStar gamma_star(const SequentialModel& m, std::size_t n_max) {
  if (n_max == 0) throw DomainError("gamma_star needs n_max >= 1");
  GammaStar r{gamma_n(m, 1), false, n_max, 1, {}};
  r.per_n.push_back(r.set);
  for (std::size_t n = 2; n <= n_max; ++n) {
    GammaSet g = gamma_n(m, n);
    GammaSet next = r.set.intersect(g);
    const double change = next.support_gap(r.set);
    if (change > kExactTol) r.last_change = n;
    r.converged = change <= kExactTol;
    r.set = next;
    r.per_n.push_back(std::move(g));
  }
  return r;
}

/// Basis spanning the values a block of observed variables can take.
inline Basis block_basis(const SequentialModel& m, std::size_t blocks) {
  std::vector<double> lo(m.dim(), std::numeric_limits<double>::infinity());
  std::vector<double> hi(m.dim(), -std::numeric_limits<double>::infinity());
  const auto& t = m.table();
  for (std::size_t c = 0; c < t.size() / m.dim(); ++c)
    for (std::size_t i = 0; i < m.dim(); ++i) {
      lo[i] = std::min(lo[i], t[c * m.dim() + i]);
      hi[i] = std::max(hi[i], t[c * m.dim() + i]);
    }
  std::vector<double> l, h;
  for (std::size_t b = 0; b < blocks; ++b) {
    l.insert(l.end(), lo.begin(), lo.end());
    h.insert(h.end(), hi.begin(), hi.end());
  }
  return make_basis(l, h);
}

/// (X_{i_1}, ...) and (X_{j_1}, ...) identically distributed against the basis.
inline CheckResult check_identically_distributed(const SequentialModel& m, const std::vector<std::size_t>& x,
                                                 const std::vector<std::size_t>& y, const Basis& basis) {
  SUBLINERGO_REQUIRE(!basis.empty(), "identical-distribution check needs a nonempty basis");
  SUBLINERGO_REQUIRE(x.size() == y.size(), "identical-distribution check needs blocks of equal size");
  CheckResult r;
  for (const auto& phi : basis)
    record_gap(r, std::abs(eval_cylinder(m, x, phi.f) - eval_cylinder(m, y, phi.f)), phi.name);
  return r;
}

/// Sequential nesting E-hat[ E-hat[phi(x, Y)] at x = X ].
inline double nested_expectation(const SequentialModel& m, const std::vector<std::size_t>& x,
                                 const std::vector<std::size_t>& y, const CylinderFn& phi) {
  const std::size_t dx = x.size() * m.dim();
  std::map<std::vector<double>, double> inner;
  return eval_cylinder(m, x, [&](std::span<const double> xv) {
    std::vector<double> key(xv.begin(), xv.end());
    if (auto it = inner.find(key); it != inner.end()) return it->second;
    std::vector<double> buf(key);
    buf.resize(dx + y.size() * m.dim());
    const double v = eval_cylinder(m, y, [&](std::span<const double> yv) {
      std::copy(yv.begin(), yv.end(), buf.begin() + static_cast<std::ptrdiff_t>(dx));
      return phi(buf);
    });
    inner.emplace(std::move(key), v);
    return v;
  });
}

/// "Y is independent from X" for index blocks of a model, Y strictly later.
inline CheckResult check_independent(const SequentialModel& m, const std::vector<std::size_t>& x,
                                     const std::vector<std::size_t>& y, const Basis& basis) {
  SUBLINERGO_REQUIRE(!basis.empty(), "independence check needs a nonempty basis");
  SUBLINERGO_REQUIRE(!x.empty() && !y.empty(), "independence check needs nonempty blocks");
  if (*std::min_element(y.begin(), y.end()) <= *std::max_element(x.begin(), x.end()))
    throw DomainError("independence check needs the later block strictly after the earlier one");
  std::vector<std::size_t> xy(x);
  xy.insert(xy.end(), y.begin(), y.end());
  CheckResult r;
  for (const auto& phi : basis) {
    const double joint = eval_cylinder(m, xy, phi.f);
    const double nested = nested_expectation(m, x, y, phi.f);
    record_gap(r, std::abs(joint - nested), phi.name);
  }
  return r;
}

struct VarianceCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  bool checked = false;  // false when the copy preconditions failed
  std::string note;
};

/// E-hat[|X - E-hat[X]|^2] <= E-hat[|X - Y|^2] for Y an independent copy of X
/// (scalar model, X = X_i, Y = X_j).
inline VarianceCheck variance_inequality_check(const SequentialModel& m, std::size_t i, std::size_t j) {
  SUBLINERGO_REQUIRE(m.dim() == 1, "variance inequality is implemented for scalar models");
  VarianceCheck r;
  const Basis b1 = block_basis(m, 1);
  const auto same = check_identically_distributed(m, {i}, {j}, b1);
  if (!same.holds) {
    r.note = "Y is not identically distributed to X (worst " + same.worst + ")";
    return r;
  }
  const auto indep = check_independent(m, {i}, {j}, block_basis(m, 2));
  if (!indep.holds) {
    r.note = "Y is not independent from X (worst " + indep.worst + ")";
    return r;
  }
  const double mean = eval_cylinder(m, {i}, [](std::span<const double> v) { return v[0]; });
  r.lhs = eval_cylinder(m, {i}, [mean](std::span<const double> v) { return (v[0] - mean) * (v[0] - mean); });
  r.rhs = eval_cylinder(m, {i, j}, [](std::span<const double> v) { return (v[0] - v[1]) * (v[0] - v[1]); });
  r.checked = true;
  r.holds = r.lhs <= r.rhs + kExactTol;
  return r;
}

}  // namespace sublinergo
