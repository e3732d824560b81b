// Finite sublinear expectations: an expectation is the maximum of finitely
// many linear expectations on a shared finite sample space.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "common.hpp"

namespace sublinergo {

/// Ordered list of distinct atom labels.
class SampleSpace {
 public:
  explicit SampleSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
    SUBLINERGO_REQUIRE(!labels_.empty(), "sample space must have at least one atom");
    std::set<std::string> seen(labels_.begin(), labels_.end());
    SUBLINERGO_REQUIRE(seen.size() == labels_.size(), "sample space atoms must be distinct");
  }

  /// Atoms labelled "0", "1", ... "n-1".
  static std::shared_ptr<const SampleSpace> indexed(std::size_t n) {
    std::vector<std::string> l(n);
    for (std::size_t i = 0; i < n; ++i) l[i] = std::to_string(i);
    return std::make_shared<const SampleSpace>(std::move(l));
  }

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }

  bool operator==(const SampleSpace& o) const { return labels_ == o.labels_; }

 private:
  std::vector<std::string> labels_;
};

using SpacePtr = std::shared_ptr<const SampleSpace>;

inline bool same_space(const SpacePtr& a, const SpacePtr& b) { return a == b || (a && b && *a == *b); }

/// Probability weights over the atoms of a SampleSpace.
class DiscreteMeasure {
 public:
  explicit DiscreteMeasure(std::vector<double> weights) : weights_(std::move(weights)) {
    SUBLINERGO_REQUIRE(!weights_.empty(), "measure needs at least one atom");
    double s = 0.0;
    for (double w : weights_) {
      SUBLINERGO_REQUIRE(std::isfinite(w) && w >= 0.0, "measure weights must be nonnegative");
      s += w;
    }
    SUBLINERGO_REQUIRE(std::abs(s - 1.0) <= kWeightTol, "measure weights must sum to 1");
  }

  static DiscreteMeasure dirac(std::size_t n, std::size_t at) {
    std::vector<double> w(n, 0.0);
    w.at(at) = 1.0;
    return DiscreteMeasure(std::move(w));
  }

  static DiscreteMeasure uniform(std::size_t n) { return DiscreteMeasure(std::vector<double>(n, 1.0 / n)); }

  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> weights_;
};

/// Real-valued random vector: one point of R^dim per atom, row-major.
class RandomVector {
 public:
  RandomVector(SpacePtr space, std::size_t dim, std::vector<double> values)
      : space_(std::move(space)), dim_(dim), values_(std::move(values)) {
    SUBLINERGO_REQUIRE(space_ != nullptr, "random vector needs a sample space");
    SUBLINERGO_REQUIRE(dim_ >= 1, "random vector dimension must be >= 1");
    SUBLINERGO_REQUIRE(values_.size() == dim_ * space_->size(), "random vector must be defined on every atom");
    for (double v : values_) SUBLINERGO_REQUIRE(std::isfinite(v), "random vector entries must be finite");
  }

  /// Scalar random variable from per-atom values.
  static RandomVector scalar(SpacePtr space, std::vector<double> values) {
    return RandomVector(std::move(space), 1, std::move(values));
  }

  const SpacePtr& space() const { return space_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> at(std::size_t atom) const { return {values_.data() + atom * dim_, dim_}; }
  double scalar_at(std::size_t atom) const { return values_[atom * dim_]; }
  const std::vector<double>& values() const { return values_; }

  /// Pointwise image under f: R^dim -> R.
  RandomVector map(const std::function<double(std::span<const double>)>& f) const {
    std::vector<double> out(space_->size());
    for (std::size_t a = 0; a < space_->size(); ++a) out[a] = f(at(a));
    return scalar(space_, std::move(out));
  }

  RandomVector operator-() const {
    std::vector<double> v(values_);
    for (double& x : v) x = -x;
    return RandomVector(space_, dim_, std::move(v));
  }

  /// Concatenation (X, Y) on the same space.
  static RandomVector join(const RandomVector& x, const RandomVector& y) {
    SUBLINERGO_REQUIRE(same_space(x.space(), y.space()), "joined random vectors must share a sample space");
    const std::size_t d = x.dim() + y.dim();
    std::vector<double> v;
    v.reserve(d * x.space()->size());
    for (std::size_t a = 0; a < x.space()->size(); ++a) {
      auto xs = x.at(a);
      auto ys = y.at(a);
      v.insert(v.end(), xs.begin(), xs.end());
      v.insert(v.end(), ys.begin(), ys.end());
    }
    return RandomVector(x.space(), d, std::move(v));
  }

 private:
  SpacePtr space_;
  std::size_t dim_;
  std::vector<double> values_;
};

/// Nonempty finite family of measures on one sample space.
class ScenarioSet {
 public:
  ScenarioSet(SpacePtr space, std::vector<DiscreteMeasure> measures)
      : space_(std::move(space)), measures_(std::move(measures)) {
    SUBLINERGO_REQUIRE(space_ != nullptr, "scenario set needs a sample space");
    SUBLINERGO_REQUIRE(!measures_.empty(), "scenario set must be nonempty");
    for (const auto& m : measures_)
      SUBLINERGO_REQUIRE(m.size() == space_->size(), "every measure must live on the scenario set's atoms");
  }

  /// {delta_a : a in atoms}: the sup-over-atoms expectation.
  static ScenarioSet all_diracs(SpacePtr space) {
    std::vector<DiscreteMeasure> ms;
    for (std::size_t a = 0; a < space->size(); ++a) ms.push_back(DiscreteMeasure::dirac(space->size(), a));
    return ScenarioSet(std::move(space), std::move(ms));
  }

  const SpacePtr& space() const { return space_; }
  const std::vector<DiscreteMeasure>& measures() const { return measures_; }
  std::size_t size() const { return measures_.size(); }

 private:
  SpacePtr space_;
  std::vector<DiscreteMeasure> measures_;
};

struct SublinearValue {
  double value = 0.0;
  std::size_t argmax = 0;  // lowest index among maximisers
};

/// max over measures of the linear expectation of a scalar X.
inline SublinearValue eval_sublinear(const ScenarioSet& s, const RandomVector& x) {
  if (!same_space(s.space(), x.space())) throw DomainError("random variable is defined on a different sample space");
  SUBLINERGO_REQUIRE(x.dim() == 1, "eval_sublinear expects a scalar random variable");
  SublinearValue best{-std::numeric_limits<double>::infinity(), 0};
  for (std::size_t m = 0; m < s.size(); ++m) {
    const auto& w = s.measures()[m];
    double e = 0.0;
    for (std::size_t a = 0; a < w.size(); ++a) e += w[a] * x.scalar_at(a);
    if (e > best.value) best = {e, m};
  }
  return best;
}

/// E-hat[phi(X)].
inline double expectation(const ScenarioSet& s, const RandomVector& x,
                          const std::function<double(std::span<const double>)>& phi) {
  return eval_sublinear(s, x.map(phi)).value;
}

/// Interval (d = 1) or support-sampled convex body (d >= 2).
class GammaSet {
 public:
  static GammaSet interval(double lo, double hi) {
    SUBLINERGO_REQUIRE(lo <= hi + kExactTol, "interval Gamma needs lo <= hi");
    GammaSet g;
    g.dim_ = 1;
    g.dirs_ = {{-1.0}, {1.0}};
    g.h_ = {-lo, hi};
    return g;
  }

  static GammaSet from_support(std::vector<std::vector<double>> dirs, std::vector<double> h) {
    SUBLINERGO_REQUIRE(!dirs.empty() && dirs.size() == h.size(), "support samples must pair directions and values");
    GammaSet g;
    g.dim_ = dirs.front().size();
    g.dirs_ = std::move(dirs);
    g.h_ = std::move(h);
    if (g.dim_ == 1) return interval(-g.support({-1.0}), g.support({1.0}));
    return g;
  }

  std::size_t dim() const { return dim_; }
  double lo() const { return -h_[0]; }
  double hi() const { return h_[1]; }
  const std::vector<std::vector<double>>& directions() const { return dirs_; }
  const std::vector<double>& support_values() const { return h_; }

  /// Support value at a stored direction (exact match required).
  double support(const std::vector<double>& p) const {
    for (std::size_t i = 0; i < dirs_.size(); ++i)
      if (dirs_[i] == p) return h_[i];
    throw DomainError("direction not on the stored grid");
  }

  bool contains(std::span<const double> x, double tol = kExactTol) const {
    for (std::size_t i = 0; i < dirs_.size(); ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) s += dirs_[i][k] * x[k];
      if (s > h_[i] + tol) return false;
    }
    return true;
  }

  /// Largest violation of a stored half-space; exact distance for d = 1.
  double distance(std::span<const double> x) const {
    double d = 0.0;
    for (std::size_t i = 0; i < dirs_.size(); ++i) {
      double s = 0.0, nrm = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) {
        s += dirs_[i][k] * x[k];
        nrm += dirs_[i][k] * dirs_[i][k];
      }
      d = std::max(d, (s - h_[i]) / std::sqrt(nrm));
    }
    return d;
  }

  /// Intersection on a common direction grid.
  GammaSet intersect(const GammaSet& o) const {
    SUBLINERGO_REQUIRE(o.dirs_ == dirs_, "intersection needs identical direction grids");
    GammaSet g = *this;
    for (std::size_t i = 0; i < h_.size(); ++i) g.h_[i] = std::min(h_[i], o.h_[i]);
    return g;
  }

  /// Max distance between support values on the shared grid.
  double support_gap(const GammaSet& o) const {
    SUBLINERGO_REQUIRE(o.dirs_ == dirs_, "comparison needs identical direction grids");
    double d = 0.0;
    for (std::size_t i = 0; i < h_.size(); ++i) d = std::max(d, std::abs(h_[i] - o.h_[i]));
    return d;
  }

  /// True when every stored support value of this set is <= the other's.
  bool subset_of(const GammaSet& o, double tol = kExactTol) const {
    SUBLINERGO_REQUIRE(o.dirs_ == dirs_, "comparison needs identical direction grids");
    for (std::size_t i = 0; i < h_.size(); ++i)
      if (h_[i] > o.h_[i] + tol) return false;
    return true;
  }

 private:
  GammaSet() = default;
  std::size_t dim_ = 1;
  std::vector<std::vector<double>> dirs_;
  std::vector<double> h_;
};

/// Fixed direction grid: 64 angles on the circle for d = 2, normalised
/// nonzero points of {-1,0,1}^d otherwise. Symmetric under p -> -p.
inline std::vector<std::vector<double>> direction_grid(std::size_t d) {
  std::vector<std::vector<double>> dirs;
  if (d == 1) return {{-1.0}, {1.0}};
  if (d == 2) {
    for (int k = 0; k < 64; ++k) {
      const double a = 2.0 * std::numbers::pi * k / 64.0;
      dirs.push_back({std::cos(a), std::sin(a)});
    }
    return dirs;
  }
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) total *= 3;
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<double> p(d);
    std::size_t c = code;
    double nrm = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      p[i] = static_cast<double>(c % 3) - 1.0;
      c /= 3;
      nrm += p[i] * p[i];
    }
    if (nrm == 0.0) continue;
    for (double& v : p) v /= std::sqrt(nrm);
    dirs.push_back(std::move(p));
  }
  return dirs;
}

/// Support value E-hat[<p, X>].
inline double support_value(const ScenarioSet& s, const RandomVector& x, std::span<const double> p) {
  return expectation(s, x, [&](std::span<const double> v) {
    double r = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) r += p[i] * v[i];
    return r;
  });
}

/// Gamma with X ~ Gamma-maximal mean range: [-E[-X], E[X]] for d = 1.
inline GammaSet gamma_of(const ScenarioSet& s, const RandomVector& x) {
  if (x.dim() == 1) return GammaSet::interval(-eval_sublinear(s, -x).value, eval_sublinear(s, x).value);
  auto dirs = direction_grid(x.dim());
  std::vector<double> h;
  for (const auto& p : dirs) h.push_back(support_value(s, x, p));
  return GammaSet::from_support(std::move(dirs), std::move(h));
}

inline bool has_no_mean_uncertainty(const ScenarioSet& s, const RandomVector& x) {
  SUBLINERGO_REQUIRE(x.dim() == 1, "mean-uncertainty check expects a scalar random variable");
  return std::abs(eval_sublinear(s, -x).value + eval_sublinear(s, x).value) <= kExactTol;
}

// ---------------------------------------------------------------------------
// Test-function basis for distribution and independence checks.

struct TestFunction {
  std::string name;
  std::function<double(std::span<const double>)> f;
  double lipschitz = 1.0;

  double operator()(std::span<const double> x) const { return f(x); }
};

using Basis = std::vector<TestFunction>;

/// The fixed Lipschitz family used by every distribution/independence check:
/// 1, +-x_i, +-|x_i - c|, and for i < j +-products of ramps
/// r_c(x) = min((x - c)^+, 1) plain and centred at 1/2. The 9-point grid c
/// spans [lo_i, hi_i] per coordinate.
inline Basis make_basis(const std::vector<double>& lo, const std::vector<double>& hi) {
  SUBLINERGO_REQUIRE(lo.size() == hi.size() && !lo.empty(), "basis ranges must match the dimension");
  const std::size_t d = lo.size();
  auto grid = [&](std::size_t i) {
    std::vector<double> c(9);
    for (int k = 0; k < 9; ++k) c[k] = lo[i] + (hi[i] - lo[i]) * k / 8.0;
    return c;
  };
  auto ramp = [](double x, double c) { return std::min(std::max(x - c, 0.0), 1.0); };
  Basis b;
  b.push_back({"1", [](std::span<const double>) { return 1.0; }, 0.0});
  for (std::size_t i = 0; i < d; ++i) {
    const std::string xi = "x" + std::to_string(i);
    b.push_back({xi, [i](std::span<const double> x) { return x[i]; }, 1.0});
    b.push_back({"-" + xi, [i](std::span<const double> x) { return -x[i]; }, 1.0});
  }
  for (std::size_t i = 0; i < d; ++i) {
    const std::string xi = "x" + std::to_string(i);
    for (double c : grid(i)) {
      const std::string tag = "|" + xi + "-" + std::to_string(c) + "|";
      b.push_back({tag, [i, c](std::span<const double> x) { return std::abs(x[i] - c); }, 1.0});
      b.push_back({"-" + tag, [i, c](std::span<const double> x) { return -std::abs(x[i] - c); }, 1.0});
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      for (double ci : grid(i)) {
        for (double cj : grid(j)) {
          const std::string tag = "r" + std::to_string(i) + "(" + std::to_string(ci) + ")*r" + std::to_string(j) +
                                  "(" + std::to_string(cj) + ")";
          for (double sgn : {1.0, -1.0}) {
            const std::string s = sgn > 0 ? "" : "-";
            b.push_back({s + tag,
                         [=](std::span<const double> x) { return sgn * ramp(x[i], ci) * ramp(x[j], cj); }, 2.0});
            b.push_back({s + "centred " + tag,
                         [=](std::span<const double> x) {
                           return sgn * (ramp(x[i], ci) - 0.5) * (ramp(x[j], cj) - 0.5);
                         },
                         1.0});
          }
        }
      }
    }
  }
  return b;
}

/// Per-coordinate range of one or more random vectors of equal dimension.
inline std::pair<std::vector<double>, std::vector<double>> value_range(std::initializer_list<const RandomVector*> xs) {
  const std::size_t d = (*xs.begin())->dim();
  std::vector<double> lo(d, std::numeric_limits<double>::infinity()), hi(d, -std::numeric_limits<double>::infinity());
  for (const auto* x : xs)
    for (std::size_t a = 0; a < x->space()->size(); ++a)
      for (std::size_t i = 0; i < d; ++i) {
        lo[i] = std::min(lo[i], x->at(a)[i]);
        hi[i] = std::max(hi[i], x->at(a)[i]);
      }
  return {lo, hi};
}

struct CheckResult {
  bool holds = true;
  double max_gap = 0.0;
  std::string worst;  // first basis function attaining max_gap
};

inline void record_gap(CheckResult& r, double gap, const std::string& name) {
  if (gap > r.max_gap) {
    r.max_gap = gap;
    r.worst = name;
  }
  if (gap > kExactTol) r.holds = false;
}

/// X and Y identically distributed against the basis.
inline CheckResult check_identically_distributed(const ScenarioSet& s, const RandomVector& x, const RandomVector& y,
                                                 const Basis& basis) {
  SUBLINERGO_REQUIRE(!basis.empty(), "identical-distribution check needs a nonempty basis");
  SUBLINERGO_REQUIRE(x.dim() == y.dim(), "identical-distribution check needs equal dimensions");
  CheckResult r;
  for (const auto& phi : basis) record_gap(r, std::abs(expectation(s, x, phi.f) - expectation(s, y, phi.f)), phi.name);
  return r;
}

/// "Y is independent from X" on a scenario set:
/// E-hat[phi(X, Y)] == E-hat[ E-hat[phi(x, Y)] at x = X ] for every basis phi.
inline CheckResult check_independent(const ScenarioSet& s, const RandomVector& x, const RandomVector& y,
                                     const Basis& basis) {
  SUBLINERGO_REQUIRE(!basis.empty(), "independence check needs a nonempty basis");
  const RandomVector xy = RandomVector::join(x, y);
  const std::size_t dx = x.dim();
  CheckResult r;
  std::vector<double> buf(xy.dim());
  for (const auto& phi : basis) {
    const double joint = expectation(s, xy, phi.f);
    std::vector<double> inner(s.space()->size());
    for (std::size_t a = 0; a < s.space()->size(); ++a) {
      auto xa = x.at(a);
      std::copy(xa.begin(), xa.end(), buf.begin());
      inner[a] = expectation(s, y, [&](std::span<const double> yv) {
        std::copy(yv.begin(), yv.end(), buf.begin() + static_cast<std::ptrdiff_t>(dx));
        return phi(buf);
      });
    }
    const double nested = eval_sublinear(s, RandomVector::scalar(s.space(), inner)).value;
    record_gap(r, std::abs(joint - nested), phi.name);
  }
  return r;
}

}  // namespace sublinergo
