// Classical systems behind the ergodic examples: the full shift on {0,1}^N
// with lazily generated points, irrational rotations, Birkhoff and
// subsequence averages, admissible subsequences and a window-level
// capacity-ergodicity check.
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "common.hpp"
#include "rng.hpp"
#include "scenario.hpp"

namespace sublinergo {

inline constexpr std::size_t kDefaultWindow = std::size_t{1} << 20;

class SymbolicPoint {
 public:
  enum class Kind { prefix, bernoulli, block };
  enum class Tail { repeat, zeros, ones };

  /// Finite word continued periodically, or by a constant tail.
  static SymbolicPoint prefix(std::vector<std::uint8_t> word, Tail tail = Tail::repeat,
                              std::size_t window = kDefaultWindow) {
    SUBLINERGO_REQUIRE(!word.empty(), "prefix word must be nonempty");
    for (auto b : word) SUBLINERGO_REQUIRE(b <= 1, "symbols must be 0 or 1");
    SymbolicPoint s(Kind::prefix, window);
    s.word_ = std::move(word);
    s.tail_ = tail;
    return s;
  }

  /// i.i.d. coordinates with P(omega_i = 0) = p0, keyed by (seed, stream, i).
  static SymbolicPoint bernoulli(double p0, std::uint64_t seed, std::uint64_t stream = 0,
                                 std::size_t window = kDefaultWindow) {
    SUBLINERGO_REQUIRE(p0 >= 0.0 && p0 <= 1.0, "Bernoulli parameter must lie in [0, 1]");
    SymbolicPoint s(Kind::bernoulli, window);
    s.p0_ = p0;
    s.rng_.emplace(seed);
    s.stream_ = stream;
    return s;
  }

  /// omega_0 = 0, omega_1 = 1, then on [2^n, 2^{n+1}) a block of 2^{n-1} zeros followed by 2^{n-1} ones.
  static SymbolicPoint block(std::size_t window = kDefaultWindow) { return SymbolicPoint(Kind::block, window); }

  Kind kind() const { return kind_; }
  std::size_t window() const { return window_; }

  std::uint8_t operator[](std::size_t i) const {
    if (i >= window_) throw DomainError("coordinate " + std::to_string(i) + " is beyond the window");
    switch (kind_) {
      case Kind::prefix:
        if (i < word_.size()) return word_[i];
        if (tail_ == Tail::repeat) return word_[i % word_.size()];
        return tail_ == Tail::ones ? 1 : 0;
      case Kind::bernoulli:
        return rng_->uniform(stream_, i) < p0_ ? 0 : 1;
      case Kind::block: {
        if (i < 2) return static_cast<std::uint8_t>(i);
        const unsigned n = static_cast<unsigned>(std::bit_width(i)) - 1;  // 2^n <= i < 2^{n+1}
        return i < (std::size_t{1} << n) + (std::size_t{1} << (n - 1)) ? 0 : 1;
      }
    }
    return 0;
  }

 private:
  SymbolicPoint(Kind k, std::size_t window) : kind_(k), window_(window) {}
  Kind kind_;
  std::size_t window_;
  std::vector<std::uint8_t> word_;
  Tail tail_ = Tail::repeat;
  double p0_ = 0.5;
  std::optional<rng::CounterRng> rng_;
  std::uint64_t stream_ = 0;
};

/// Observable on the shift reading coordinates 0..footprint-1.
struct SymObservable {
  std::string name;
  std::size_t footprint = 1;
  std::function<double(std::span<const std::uint8_t>)> f;
  double sup_norm = 1.0;

  double at(const SymbolicPoint& w, std::size_t shift) const {
    if (shift + footprint > w.window()) throw DomainError("observable " + name + " reads past the window");
    std::uint8_t buf[64];
    SUBLINERGO_REQUIRE(footprint <= 64, "observable footprint is limited to 64 coordinates");
    for (std::size_t j = 0; j < footprint; ++j) buf[j] = w[shift + j];
    return f(std::span<const std::uint8_t>(buf, footprint));
  }
};

namespace observables {

inline SymObservable zero_at_origin() {
  return {"1{w0=0}", 1, [](std::span<const std::uint8_t> w) { return w[0] == 0 ? 1.0 : 0.0; }, 1.0};
}

inline SymObservable constant(double c) {
  return {"const", 1, [c](std::span<const std::uint8_t>) { return c; }, std::abs(c)};
}

/// 1{w_0 .. w_{k-1} = word}.
inline SymObservable cylinder(std::vector<std::uint8_t> word) {
  const std::size_t k = word.size();
  return {"cyl", k, [word](std::span<const std::uint8_t> w) {
            return std::equal(word.begin(), word.end(), w.begin()) ? 1.0 : 0.0;
          },
          1.0};
}

}  // namespace observables

/// Running Birkhoff averages A_1..A_n of X along the shift orbit.
inline std::vector<double> birkhoff_series(const SymbolicPoint& w, const SymObservable& x, std::size_t n) {
  SUBLINERGO_REQUIRE(n >= 1, "need at least one term");
  if (n - 1 + x.footprint > w.window()) throw DomainError("Birkhoff sum reads past the window");
  std::vector<double> a(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += x.at(w, i);
    a[i] = s / static_cast<double>(i + 1);
  }
  return a;
}

inline double birkhoff_average(const SymbolicPoint& w, const SymObservable& x, std::size_t n) {
  return birkhoff_series(w, x, n).back();
}

/// t_k = max(floor(P(k)), 1) for a polynomial, or an explicit list.
struct SubsequenceSpec {
  std::vector<double> poly;      // coefficients a_0, a_1, ...
  std::vector<double> explicit_;  // t_1, t_2, ... when nonempty
  double gamma = 0.5, delta = 1.0, c1 = 1.0, c2 = 0.5;
  std::size_t n0 = 2;

  static SubsequenceSpec polynomial(std::vector<double> coeffs) {
    SUBLINERGO_REQUIRE(!coeffs.empty(), "polynomial needs coefficients");
    SubsequenceSpec s;
    s.poly = std::move(coeffs);
    return s;
  }
  static SubsequenceSpec list(std::vector<double> values) {
    SUBLINERGO_REQUIRE(!values.empty(), "explicit subsequence needs values");
    SubsequenceSpec s;
    s.explicit_ = std::move(values);
    return s;
  }

  std::size_t degree() const {
    std::size_t d = poly.size();
    while (d > 0 && poly[d - 1] == 0.0) --d;
    return d == 0 ? 0 : d - 1;
  }

  double g(std::size_t k) const {
    SUBLINERGO_REQUIRE(k >= 1, "subsequence is indexed from 1");
    if (!explicit_.empty()) {
      if (k > explicit_.size()) throw DomainError("explicit subsequence too short");
      return explicit_[k - 1];
    }
    double v = 0.0;
    for (std::size_t i = poly.size(); i-- > 0;) v = v * static_cast<double>(k) + poly[i];
    return std::max(std::floor(v), 1.0);
  }

  std::size_t index(std::size_t k) const {
    const double v = g(k);
    SUBLINERGO_REQUIRE(v >= 0.0 && v < 9e15, "subsequence value is not a valid index");
    return static_cast<std::size_t>(v);
  }
};

/// (1/n) sum_{k=1}^n X(f^{t_k} omega).
inline double subsequence_average(const SymbolicPoint& w, const SymObservable& x, const SubsequenceSpec& spec,
                                  std::size_t n) {
  SUBLINERGO_REQUIRE(n >= 1, "need at least one term");
  double s = 0.0;
  for (std::size_t k = 1; k <= n; ++k) s += x.at(w, spec.index(k));
  return s / static_cast<double>(n);
}

struct AdmissibilityRow {
  std::size_t n = 0;
  std::size_t pi_size = 0;
  double pi_bound = 0.0;
  double min_gap = 0.0;  // +inf when fewer than two indices remain
  double gap_bound = 0.0;
  bool pass = false;
};

struct AdmissibilityReport {
  std::vector<AdmissibilityRow> rows;  // n0..n_max
  bool all_pass = true;
  std::size_t first_failure = 0;  // 0 when none
};

/// Checks both admissibility inequalities with Pi_n = {1, .., floor(n^gamma)}
/// for n in [n0, n_max]. Needs g nondecreasing on 1..n_max.
inline AdmissibilityReport is_admissible(const SubsequenceSpec& spec, std::size_t n_max) {
  SUBLINERGO_REQUIRE(spec.gamma >= 0 && spec.gamma <= 1 && spec.delta >= 0, "need 0 <= gamma <= 1, delta >= 0");
  std::vector<double> g(n_max + 2, 0.0);
  for (std::size_t k = 1; k <= n_max; ++k) {
    g[k] = spec.g(k);
    if (k > 1 && g[k] < g[k - 1]) throw DomainError("subsequence generator is not nondecreasing");
  }
  AdmissibilityReport rep;
  // sliding minimum of d_k = g(k+1) - g(k) over k in [n_gamma + 1, n - 1]
  std::deque<std::size_t> q;
  std::size_t pushed = 0;  // d_1..d_pushed offered
  for (std::size_t n = std::max<std::size_t>(spec.n0, 1); n <= n_max; ++n) {
    auto ng = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), spec.gamma) + 1e-12));
    ng = std::min(ng, n);
    while (pushed + 1 <= n - 1) {
      ++pushed;
      const double d = g[pushed + 1] - g[pushed];
      while (!q.empty() && g[q.back() + 1] - g[q.back()] >= d) q.pop_back();
      q.push_back(pushed);
    }
    while (!q.empty() && q.front() < ng + 1) q.pop_front();
    AdmissibilityRow r;
    r.n = n;
    r.pi_size = ng;
    r.pi_bound = spec.c1 * std::pow(static_cast<double>(n), spec.gamma);
    r.min_gap = q.empty() ? std::numeric_limits<double>::infinity() : g[q.front() + 1] - g[q.front()];
    r.gap_bound = spec.c2 * std::pow(std::log(static_cast<double>(n)), 1.0 + spec.delta);
    r.pass = static_cast<double>(r.pi_size) <= r.pi_bound + 1e-12 && r.min_gap >= r.gap_bound;
    if (!r.pass && rep.all_pass) {
      rep.all_pass = false;
      rep.first_failure = n;
    }
    rep.rows.push_back(r);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Rotation

struct RotationSystem {
  double alpha;

  explicit RotationSystem(double a) : alpha(a) {
    SUBLINERGO_REQUIRE(a > 0.0 && a < 1.0, "rotation number must lie in (0, 1)");
  }

  double orbit(double w, std::size_t i) const {
    const double v = w + static_cast<double>(i) * alpha;
    return v - std::floor(v);
  }

  static double golden() { return (std::sqrt(5.0) - 1.0) / 2.0; }
};

inline double birkhoff_average(const RotationSystem& r, const std::function<double(double)>& x, double w,
                               std::size_t n) {
  SUBLINERGO_REQUIRE(n >= 1, "need at least one term");
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x(r.orbit(w, i));
  return s / static_cast<double>(n);
}

/// Haar integral on [0, 1) by the periodic trapezoid rule.
inline double haar_integral(const std::function<double(double)>& x, std::size_t nodes = 10000) {
  double s = 0.0;
  for (std::size_t i = 0; i < nodes; ++i) s += x(static_cast<double>(i) / static_cast<double>(nodes));
  return s / static_cast<double>(nodes);
}

struct UniformDeviationRow {
  std::size_t n = 0;
  double sup_dev = 0.0;
  double worst_point = 0.0;
};

/// sup over the point grid of |A_n X(w) - integral of X| for each n.
inline std::vector<UniformDeviationRow> unique_ergodicity_test(const RotationSystem& r,
                                                               const std::function<double(double)>& x,
                                                               const std::vector<std::size_t>& n_grid,
                                                               const std::vector<double>& points) {
  const double mean = haar_integral(x);
  std::vector<UniformDeviationRow> rows(n_grid.size());
  parallel_chunks(n_grid.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      UniformDeviationRow row{n_grid[i], 0.0, 0.0};
      for (double w : points) {
        const double d = std::abs(birkhoff_average(r, x, w, n_grid[i]) - mean);
        if (d > row.sup_dev) row.sup_dev = d, row.worst_point = w;
      }
      rows[i] = row;
    }
  });
  return rows;
}

inline std::vector<double> uniform_points(std::size_t k) {
  std::vector<double> p(k);
  for (std::size_t i = 0; i < k; ++i) p[i] = static_cast<double>(i) / static_cast<double>(k);
  return p;
}

// ---------------------------------------------------------------------------
// Two Bernoulli measures

struct BernoulliDivergence {
  double avg_mu = 0.0;  // omega drawn from (1/2, 1/2)^N
  double avg_nu = 0.0;  // omega drawn from (1/3, 2/3)^N
};

inline BernoulliDivergence two_bernoulli_divergence(std::size_t n, std::uint64_t seed) {
  SUBLINERGO_REQUIRE(n >= 1, "need at least one term");
  const auto x = observables::zero_at_origin();
  const std::size_t w = std::max(kDefaultWindow, n);
  return {birkhoff_average(SymbolicPoint::bernoulli(0.5, seed, 0, w), x, n),
          birkhoff_average(SymbolicPoint::bernoulli(1.0 / 3.0, seed, 1, w), x, n)};
}

// ---------------------------------------------------------------------------
// Capacity ergodicity on a cyclic window {0,1}^W

namespace window {

inline std::uint32_t shift(std::uint32_t word, std::size_t w) {
  return (word >> 1) | ((word & 1u) << (w - 1));
}

inline std::size_t zeros(std::uint32_t word, std::size_t w) {
  return w - static_cast<std::size_t>(std::popcount(word));
}

inline SpacePtr space(std::size_t w) {
  SUBLINERGO_REQUIRE(w >= 1 && w <= 20, "window length must be in [1, 20]");
  return SampleSpace::indexed(std::size_t{1} << w);
}

/// Product Bernoulli marginal with P(0) = p0; bit i of the index is coordinate i.
inline DiscreteMeasure bernoulli(std::size_t w, double p0) {
  std::vector<double> v(std::size_t{1} << w);
  for (std::uint32_t word = 0; word < v.size(); ++word) {
    const auto z = static_cast<double>(zeros(word, w));
    v[word] = std::pow(p0, z) * std::pow(1.0 - p0, static_cast<double>(w) - z);
  }
  return DiscreteMeasure(std::move(v));
}

/// Uniform measure on the cyclic orbit of a word.
inline DiscreteMeasure orbit(std::size_t w, std::uint32_t word) {
  std::vector<std::uint32_t> pts{word};
  for (std::uint32_t s = shift(word, w); s != word; s = shift(s, w)) pts.push_back(s);
  std::vector<double> v(std::size_t{1} << w, 0.0);
  for (auto p : pts) v[p] += 1.0 / static_cast<double>(pts.size());
  return DiscreteMeasure(std::move(v));
}

}  // namespace window

struct CandidateSet {
  std::string name;
  std::function<bool(std::uint32_t word)> member;
};

namespace candidates {

inline CandidateSet empty() {
  return {"empty", [](std::uint32_t) { return false; }};
}

/// Words whose fraction of zeros lies in [lo, hi]; cyclic-shift invariant.
inline CandidateSet zero_frequency(std::size_t w, double lo, double hi) {
  return {"freq0[" + std::to_string(lo) + "," + std::to_string(hi) + "]", [=](std::uint32_t word) {
            const double f = static_cast<double>(window::zeros(word, w)) / static_cast<double>(w);
            return f >= lo - 1e-12 && f <= hi + 1e-12;
          }};
}

inline CandidateSet cylinder_first(std::uint8_t bit) {
  return {"w0=" + std::to_string(bit), [bit](std::uint32_t word) { return (word & 1u) == bit; }};
}

}  // namespace candidates

struct CapacityVerdict {
  std::string name;
  bool invariant = true;
  std::uint32_t witness = 0;  // word in A whose shift leaves A (or the reverse)
  double c_a = 0.0;
  double c_ac = 0.0;
  bool consistent = false;  // C(A) ~ 0 or C(A^c) ~ 0
};

struct CapacityReport {
  std::vector<CapacityVerdict> verdicts;
  bool ergodic_consistent = true;  // over the invariant candidates
  std::string note = "capacities are maxima over the finite encoded measure set only";
};

/// C(A) = max over the measures of P(A) for each shift-invariant candidate.
inline CapacityReport capacity_ergodicity_check(std::size_t w, const ScenarioSet& s,
                                                const std::vector<CandidateSet>& sets) {
  SUBLINERGO_REQUIRE(s.space()->size() == (std::size_t{1} << w), "scenario set does not live on the window");
  CapacityReport rep;
  for (const auto& a : sets) {
    CapacityVerdict v;
    v.name = a.name;
    for (std::uint32_t word = 0; word < (1u << w); ++word)
      if (a.member(word) != a.member(window::shift(word, w))) {
        v.invariant = false;
        v.witness = word;
        break;
      }
    if (!v.invariant) {
      rep.verdicts.push_back(v);
      continue;
    }
    std::vector<double> ind(std::size_t{1} << w), comp(ind.size());
    for (std::uint32_t word = 0; word < ind.size(); ++word) {
      ind[word] = a.member(word) ? 1.0 : 0.0;
      comp[word] = 1.0 - ind[word];
    }
    v.c_a = eval_sublinear(s, RandomVector::scalar(s.space(), ind)).value;
    v.c_ac = eval_sublinear(s, RandomVector::scalar(s.space(), comp)).value;
    v.consistent = v.c_a <= 1e-9 || v.c_ac <= 1e-9;
    rep.ergodic_consistent = rep.ergodic_consistent && v.consistent;
    rep.verdicts.push_back(v);
  }
  return rep;
}

}  // namespace sublinergo
