// Sequentially independent noise models and the backward dynamic programme
// that evaluates their sublinear expectations exactly.
//
// A model draws noises xi_1, xi_2, ... where xi_{k+1} is independent from
// (xi_1..xi_k): at every step an adversary picks a control (possibly after
// seeing the past) and the noise is drawn from that control's law. Observed
// variables read a window of consecutive noises,
//   X_k = f(xi_k, ..., xi_{k+lag}).
// E-hat[phi(...)] is then the nested max over controls of the one-step
// expectations, evaluated backward.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "common.hpp"
#include "scenario.hpp"

namespace sublinergo {

/// Finite, sorted list of scalar controls with the extremes of Q flagged.
class ControlSet {
 public:
  explicit ControlSet(std::vector<double> values) : values_(std::move(values)) {
    SUBLINERGO_REQUIRE(!values_.empty(), "control set must be nonempty");
    std::sort(values_.begin(), values_.end());
    values_.erase(std::unique(values_.begin(), values_.end()), values_.end());
  }

  /// lo, hi and `interior` equally spaced points strictly between.
  static ControlSet grid(double lo, double hi, int interior) {
    SUBLINERGO_REQUIRE(lo <= hi, "control interval needs lo <= hi");
    std::vector<double> v{lo, hi};
    for (int i = 1; i <= interior; ++i) v.push_back(lo + (hi - lo) * i / (interior + 1));
    return ControlSet(std::move(v));
  }

  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double lo() const { return values_.front(); }
  double hi() const { return values_.back(); }
  bool is_extreme(std::size_t i) const { return i == 0 || i + 1 == values_.size(); }
  bool contains(double q, double tol = 1e-12) const { return q >= lo() - tol && q <= hi() + tol; }

 private:
  std::vector<double> values_;
};

/// Finite one-step law: scalar atoms and one weight vector per control.
struct FiniteStep {
  std::vector<double> atoms;
  std::vector<std::vector<double>> weights;  // [control][atom]

  std::size_t n_atoms() const { return atoms.size(); }
  std::size_t n_controls() const { return weights.size(); }
};

/// One-step noise law of a sequential model.
class StepLaw {
 public:
  enum class Kind { maximal, g_normal, custom };

  /// Gamma-maximal noise on [lo, hi]: controls are points of Gamma, each a
  /// Dirac law. Gamma is discretised to its endpoints plus `interior` points.
  static StepLaw maximal(double lo, double hi, int interior = 33) {
    SUBLINERGO_REQUIRE(lo <= hi, "maximal step needs lo <= hi");
    StepLaw s(Kind::maximal);
    s.lo_ = lo;
    s.hi_ = hi;
    s.interior_ = lo == hi ? 0 : interior;
    return s;
  }

  static StepLaw maximal(const GammaSet& gamma, int interior = 33) {
    SUBLINERGO_REQUIRE(gamma.dim() == 1, "maximal step laws are scalar");
    return maximal(gamma.lo(), gamma.hi(), interior);
  }

  /// G-normal noise with variance range [var_lo, var_hi]; realised by a
  /// two-point +-sqrt(q) law per extreme control.
  static StepLaw g_normal(double var_lo, double var_hi) {
    if (!(var_lo >= 0.0 && var_lo <= var_hi)) throw DomainError("g_normal step needs 0 <= var_lo <= var_hi");
    StepLaw s(Kind::g_normal);
    s.lo_ = var_lo;
    s.hi_ = var_hi;
    return s;
  }

  /// Arbitrary finite law per control; weights[c] is a probability vector over atoms.
  static StepLaw custom(std::vector<double> atoms, std::vector<std::vector<double>> weights) {
    SUBLINERGO_REQUIRE(!atoms.empty() && !weights.empty(), "custom step needs atoms and controls");
    for (const auto& w : weights) {
      SUBLINERGO_REQUIRE(w.size() == atoms.size(), "custom step weights must cover every atom");
      (void)DiscreteMeasure(w);
    }
    StepLaw s(Kind::custom);
    s.finite_.atoms = std::move(atoms);
    s.finite_.weights = std::move(weights);
    return s;
  }

  Kind kind() const { return kind_; }
  bool exact() const { return kind_ != Kind::g_normal; }

  ControlSet controls() const {
    switch (kind_) {
      case Kind::maximal: return ControlSet::grid(lo_, hi_, interior_);
      case Kind::g_normal: return ControlSet({lo_, hi_});
      case Kind::custom: {
        std::vector<double> idx(finite_.weights.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<double>(i);
        return ControlSet(std::move(idx));
      }
    }
    return ControlSet({0.0});
  }

  FiniteStep finite() const {
    if (kind_ == Kind::custom) return finite_;
    FiniteStep f;
    if (kind_ == Kind::maximal) {
      f.atoms = controls().values();
      for (std::size_t c = 0; c < f.atoms.size(); ++c) {
        std::vector<double> w(f.atoms.size(), 0.0);
        w[c] = 1.0;
        f.weights.push_back(std::move(w));
      }
      return f;
    }
    std::vector<double> atoms{-std::sqrt(hi_), -std::sqrt(lo_), std::sqrt(lo_), std::sqrt(hi_)};
    std::sort(atoms.begin(), atoms.end());
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
    f.atoms = atoms;
    for (double q : {lo_, hi_}) {
      std::vector<double> w(atoms.size(), 0.0);
      for (std::size_t a = 0; a < atoms.size(); ++a)
        if (std::abs(std::abs(atoms[a]) - std::sqrt(q)) == 0.0) w[a] += q == 0.0 ? 1.0 : 0.5;
      f.weights.push_back(std::move(w));
    }
    return f;
  }

  /// Gamma = [lo, hi] for maximal laws.
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  explicit StepLaw(Kind k) : kind_(k) {}
  Kind kind_;
  double lo_ = 0.0, hi_ = 0.0;
  int interior_ = 0;
  FiniteStep finite_;
};

/// Sequence X_k = f(xi_k..xi_{k+lag}), k = 1..horizon, of i.i.d. step noises.
class SequentialModel {
 public:
  using Map = std::function<void(std::span<const double> window, std::span<double> out)>;

  SequentialModel(StepLaw step, std::size_t horizon, std::size_t lag, std::size_t dim, Map map,
                  std::optional<std::vector<double>> linear_weights = std::nullopt)
      : step_(std::move(step)),
        horizon_(horizon),
        lag_(lag),
        dim_(dim),
        map_(std::move(map)),
        linear_(std::move(linear_weights)),
        finite_(step_.finite()) {
    SUBLINERGO_REQUIRE(horizon_ >= 1, "model horizon must be >= 1");
    SUBLINERGO_REQUIRE(dim_ >= 1, "model dimension must be >= 1");
    if (linear_) SUBLINERGO_REQUIRE(linear_->size() == lag_ + 1 && dim_ == 1, "linear weights need lag + 1 entries");
    const std::size_t a = finite_.n_atoms();
    std::size_t cells = 1;
    for (std::size_t j = 0; j <= lag_; ++j) {
      cells *= a;
      SUBLINERGO_REQUIRE(cells <= 10'000'000, "state-map table too large");
    }
    table_.assign(cells * dim_, 0.0);
    std::vector<double> window(lag_ + 1);
    for (std::size_t code = 0; code < cells; ++code) {
      std::size_t c = code;
      for (std::size_t j = lag_ + 1; j-- > 0;) {
        window[j] = finite_.atoms[c % a];
        c /= a;
      }
      map_(window, std::span<double>(table_.data() + code * dim_, dim_));
    }
  }

  /// X_k = xi_k.
  static SequentialModel iid(StepLaw step, std::size_t horizon) {
    return moving_sum(std::move(step), horizon, {1.0});
  }

  /// X_k = sum_j w_j xi_{k+j}.
  static SequentialModel moving_sum(StepLaw step, std::size_t horizon, std::vector<double> w) {
    const std::size_t lag = w.size() - 1;
    auto weights = w;
    return SequentialModel(
        std::move(step), horizon, lag, 1,
        [w](std::span<const double> win, std::span<double> out) {
          double s = 0.0;
          for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * win[j];
          out[0] = s;
        },
        std::move(weights));
  }

  const StepLaw& step() const { return step_; }
  const FiniteStep& finite() const { return finite_; }
  std::size_t horizon() const { return horizon_; }
  std::size_t lag() const { return lag_; }
  std::size_t dim() const { return dim_; }
  const std::optional<std::vector<double>>& linear_weights() const { return linear_; }
  const Map& map() const { return map_; }

  /// X value for a window of atom indices (oldest first).
  std::span<const double> value(std::span<const int> window_atoms) const {
    std::size_t code = 0;
    for (int a : window_atoms) code = code * finite_.n_atoms() + static_cast<std::size_t>(a);
    return {table_.data() + code * dim_, dim_};
  }

  const std::vector<double>& table() const { return table_; }

  /// Same noises, horizon replaced.
  SequentialModel with_horizon(std::size_t h) const {
    return SequentialModel(step_, h, lag_, dim_, map_, linear_);
  }

  /// Scalar model <p, X_k>.
  SequentialModel project(std::vector<double> p) const {
    SUBLINERGO_REQUIRE(p.size() == dim_, "projection direction has wrong dimension");
    auto inner = map_;
    const std::size_t d = dim_;
    std::optional<std::vector<double>> lin;
    if (linear_) {
      lin = *linear_;
      for (double& w : *lin) w *= p[0];
    }
    return SequentialModel(
        step_, horizon_, lag_, 1,
        [inner, p, d](std::span<const double> win, std::span<double> out) {
          std::vector<double> x(d);
          inner(win, x);
          double s = 0.0;
          for (std::size_t i = 0; i < d; ++i) s += p[i] * x[i];
          out[0] = s;
        },
        std::move(lin));
  }

 private:
  StepLaw step_;
  std::size_t horizon_, lag_, dim_;
  Map map_;
  std::optional<std::vector<double>> linear_;
  FiniteStep finite_;
  std::vector<double> table_;
};

using CylinderFn = std::function<double(std::span<const double>)>;

namespace detail {

/// Noise positions that some observed index reads, ascending.
inline std::vector<std::size_t> relevant_positions(const std::vector<std::size_t>& idx, std::size_t lag) {
  std::vector<std::size_t> pos;
  for (std::size_t t : idx)
    for (std::size_t j = 0; j <= lag; ++j) pos.push_back(t + j);
  std::sort(pos.begin(), pos.end());
  pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
  return pos;
}

class CylinderDp {
 public:
  CylinderDp(const SequentialModel& m, const std::vector<std::size_t>& idx, const CylinderFn& phi)
      : m_(m), idx_(idx), phi_(phi), pos_(relevant_positions(idx, m.lag())), memo_(pos_.size()) {}

  double run() {
    State s;
    s.window.assign(m_.lag(), -1);
    return rec(0, s);
  }

 private:
  struct State {
    std::vector<double> values;
    std::vector<int> window;  // atoms at the last `lag` positions, -1 when unread
  };

  double rec(std::size_t level, const State& s) {
    if (level == pos_.size()) return phi_(s.values);
    std::vector<double> key(s.values);
    for (int w : s.window) key.push_back(w);
    auto& memo = memo_[level];
    if (auto it = memo.find(key); it != memo.end()) return it->second;

    const std::size_t pos = pos_[level];
    const std::size_t prev = level == 0 ? 0 : pos_[level - 1];
    const std::size_t lag = m_.lag();
    // window after shifting to position pos - 1
    std::vector<int> base(lag, -1);
    const std::size_t shift = pos - prev;
    for (std::size_t j = 0; j < lag; ++j)
      if (j + shift - 1 < lag) base[j] = s.window[j + shift - 1];

    const auto& fs = m_.finite();
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> child_value(fs.n_atoms());
    std::vector<char> done(fs.n_atoms(), 0);
    std::vector<int> full(lag + 1);
    for (std::size_t c = 0; c < fs.n_controls(); ++c) {
      double e = 0.0;
      for (std::size_t a = 0; a < fs.n_atoms(); ++a) {
        const double w = fs.weights[c][a];
        if (w == 0.0) continue;
        if (!done[a]) {
          State next;
          next.values = s.values;
          std::copy(base.begin(), base.end(), full.begin());
          full[lag] = static_cast<int>(a);
          for (std::size_t t : idx_) {
            if (t + lag != pos) continue;
            auto x = m_.value(full);
            next.values.insert(next.values.end(), x.begin(), x.end());
          }
          next.window.assign(full.begin() + 1, full.end());
          child_value[a] = rec(level + 1, next);
          done[a] = 1;
        }
        e += w * child_value[a];
      }
      best = std::max(best, e);
    }
    memo.emplace(std::move(key), best);
    return best;
  }

  const SequentialModel& m_;
  const std::vector<std::size_t>& idx_;
  const CylinderFn& phi_;
  std::vector<std::size_t> pos_;
  std::vector<std::map<std::vector<double>, double>> memo_;
};

}  // namespace detail

/// E-hat[phi(X_{t_1}, ..., X_{t_m})] for 1 <= t_1 < ... < t_m <= horizon.
/// phi receives the m * dim coordinates in index order.
inline double eval_cylinder(const SequentialModel& m, const std::vector<std::size_t>& indices, const CylinderFn& phi) {
  SUBLINERGO_REQUIRE(!indices.empty(), "cylinder needs at least one index");
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 1 || indices[i] > m.horizon()) throw DomainError("cylinder index outside the model horizon");
    if (i > 0 && indices[i] <= indices[i - 1]) throw DomainError("cylinder indices must be strictly increasing");
  }
  detail::CylinderDp dp(m, indices, phi);
  return dp.run();
}

/// Result of an averaged-sum evaluation.
struct DpValue {
  double value = 0.0;
  std::string mode;  // "exact" or "lattice"
};

namespace detail {

struct SparseKey {
  std::int64_t sum;
  std::int64_t window;
  bool operator==(const SparseKey& o) const { return sum == o.sum && window == o.window; }
};

struct SparseKeyHash {
  std::size_t operator()(const SparseKey& k) const noexcept {
    return std::hash<std::int64_t>()(k.sum * 0x9E3779B97F4A7C15ll ^ k.window);
  }
};

}  // namespace detail

/// E-hat[phi( (1/|I|) sum_{t in I} X_t )] for a multiset I of indices (scalar
/// models). Exact integer-lattice state whenever all increments share a
/// rational denominator, otherwise a fine quantised state ("lattice").
inline DpValue block_average_expectation(const SequentialModel& m, std::vector<std::size_t> indices,
                                         const std::function<double(double)>& phi) {
  SUBLINERGO_REQUIRE(m.dim() == 1, "averaged-sum evaluation needs a scalar model");
  SUBLINERGO_REQUIRE(!indices.empty(), "average needs at least one index");
  std::sort(indices.begin(), indices.end());
  for (std::size_t t : indices)
    if (t < 1 || t > m.horizon()) throw DomainError("average index outside the model horizon");

  const auto& fs = m.finite();
  const std::size_t lag = m.lag();
  const auto pos = detail::relevant_positions(indices, lag);
  const double count = static_cast<double>(indices.size());
  std::string mode = m.step().exact() ? "exact" : "lattice";

  // Atoms reachable under some control.
  std::vector<std::size_t> live;
  for (std::size_t a = 0; a < fs.n_atoms(); ++a) {
    bool any = false;
    for (const auto& w : fs.weights) any = any || w[a] > 0.0;
    if (any) live.push_back(a);
  }

  if (m.linear_weights()) {
    // sum = sum_pos c_pos * xi_pos
    std::map<std::size_t, double> coef;
    const auto& w = *m.linear_weights();
    for (std::size_t t : indices)
      for (std::size_t j = 0; j <= lag; ++j) coef[t + j] += w[j];
    std::vector<double> incs;
    for (auto& [p, c] : coef)
      for (std::size_t a : live) incs.push_back(c * fs.atoms[a]);
    std::int64_t den = common_denominator(incs);
    double span = 0.0;
    for (double v : incs) span = std::max(span, std::abs(v));
    span *= static_cast<double>(coef.size());
    bool dense = den > 0 && span * static_cast<double>(den) * 2 + 1 <= 2e7;
    if (dense) {
      const double scale = static_cast<double>(den);
      std::vector<std::vector<std::int64_t>> inc;
      std::vector<std::int64_t> lo{0}, hi{0};
      for (auto& [p, c] : coef) {
        std::vector<std::int64_t> row(fs.n_atoms(), 0);
        std::int64_t mn = std::numeric_limits<std::int64_t>::max(), mx = std::numeric_limits<std::int64_t>::min();
        for (std::size_t a : live) {
          row[a] = std::llround(c * fs.atoms[a] * scale);
          mn = std::min(mn, row[a]);
          mx = std::max(mx, row[a]);
        }
        inc.push_back(std::move(row));
        lo.push_back(lo.back() + mn);
        hi.push_back(hi.back() + mx);
      }
      const std::size_t levels = inc.size();
      std::vector<double> next(static_cast<std::size_t>(hi[levels] - lo[levels] + 1));
      for (std::size_t i = 0; i < next.size(); ++i)
        next[i] = phi(static_cast<double>(lo[levels] + static_cast<std::int64_t>(i)) / scale / count);
      std::vector<double> cur;
      for (std::size_t l = levels; l-- > 0;) {
        cur.assign(static_cast<std::size_t>(hi[l] - lo[l] + 1), 0.0);
        const auto& row = inc[l];
        for (std::size_t i = 0; i < cur.size(); ++i) {
          const std::int64_t s = lo[l] + static_cast<std::int64_t>(i) - lo[l + 1];
          double best = -std::numeric_limits<double>::infinity();
          for (const auto& wc : fs.weights) {
            double e = 0.0;
            for (std::size_t a : live)
              if (wc[a] != 0.0) e += wc[a] * next[static_cast<std::size_t>(s + row[a])];
            best = std::max(best, e);
          }
          cur[i] = best;
        }
        next.swap(cur);
      }
      return {next[0], mode};
    }
  }

  // Sparse state: (scaled partial sum, window code).
  std::int64_t den = common_denominator(m.table());
  double scale = static_cast<double>(den);
  if (den == 0) {
    double mx = 1e-300;
    for (double v : m.table()) mx = std::max(mx, std::abs(v));
    scale = std::ldexp(1.0, 40) / mx;
    mode = "lattice";
  }
  const std::int64_t A = static_cast<std::int64_t>(fs.n_atoms()) + 1;  // code 0 = unread
  std::int64_t window_mod = 1;
  for (std::size_t j = 0; j < lag; ++j) window_mod *= A;

  // multiplicity of each index ending at a position
  std::map<std::size_t, std::int64_t> ends;
  for (std::size_t t : indices) ends[t + lag] += 1;

  using Level = std::unordered_map<detail::SparseKey, std::size_t, detail::SparseKeyHash>;
  std::vector<std::vector<detail::SparseKey>> keys(pos.size() + 1);
  std::vector<Level> index(pos.size() + 1);
  keys[0].push_back({0, 0});
  index[0].emplace(detail::SparseKey{0, 0}, 0);
  // transitions[l][state][atom] -> child slot
  std::vector<std::vector<std::vector<std::size_t>>> child(pos.size());
  std::vector<int> win(lag + 1);
  for (std::size_t l = 0; l < pos.size(); ++l) {
    const std::size_t shift = l == 0 ? pos[0] : pos[l] - pos[l - 1];
    std::int64_t lift = 1;
    for (std::size_t j = 0; j + 1 < shift && j < lag; ++j) lift *= A;
    const bool wipe = shift - 1 >= lag;
    const auto it_end = ends.find(pos[l]);
    const std::int64_t mult = it_end == ends.end() ? 0 : it_end->second;
    child[l].resize(keys[l].size());
    for (std::size_t si = 0; si < keys[l].size(); ++si) {
      const auto k = keys[l][si];
      // shifted window code, oldest digit most significant
      const std::int64_t wcode = wipe ? 0 : (k.window * lift) % window_mod;
      child[l][si].assign(fs.n_atoms(), 0);
      for (std::size_t a : live) {
        std::int64_t sum = k.sum;
        std::int64_t full = wcode * A + static_cast<std::int64_t>(a) + 1;
        if (mult > 0) {
          std::int64_t c = full;
          for (std::size_t j = lag + 1; j-- > 0;) {
            win[j] = static_cast<int>(c % A) - 1;
            c /= A;
          }
          sum += mult * std::llround(m.value(win)[0] * scale);
        }
        const detail::SparseKey nk{sum, lag == 0 ? 0 : full % window_mod};
        auto [it, inserted] = index[l + 1].emplace(nk, keys[l + 1].size());
        if (inserted) keys[l + 1].push_back(nk);
        child[l][si][a] = it->second;
      }
    }
    index[l].clear();
  }
  std::vector<double> next(keys[pos.size()].size());
  for (std::size_t i = 0; i < next.size(); ++i)
    next[i] = phi(static_cast<double>(keys[pos.size()][i].sum) / scale / count);
  for (std::size_t l = pos.size(); l-- > 0;) {
    std::vector<double> cur(keys[l].size());
    for (std::size_t si = 0; si < cur.size(); ++si) {
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& wc : fs.weights) {
        double e = 0.0;
        for (std::size_t a : live)
          if (wc[a] != 0.0) e += wc[a] * next[child[l][si][a]];
        best = std::max(best, e);
      }
      cur[si] = best;
    }
    next.swap(cur);
  }
  return {next[0], mode};
}

/// E-hat[phi(S_n)], S_n = (X_1 + ... + X_n) / n.
inline DpValue lln_expectation(const SequentialModel& m, const std::function<double(double)>& phi, std::size_t n) {
  SUBLINERGO_REQUIRE(n >= 1, "lln_expectation needs n >= 1");
  std::vector<std::size_t> idx(n);
  for (std::size_t k = 0; k < n; ++k) idx[k] = k + 1;
  return block_average_expectation(m, std::move(idx), phi);
}

/// Explicit scenario set of a short model: every adapted control policy over
/// the first `steps` noises gives one product-like measure on noise paths.
struct ExplicitModel {
  ScenarioSet set;
  std::vector<std::vector<int>> paths;  // atom indices per sample point

  /// Noise xi_k (1-based) as a random variable.
  RandomVector noise(const FiniteStep& fs, std::size_t k) const {
    std::vector<double> v(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) v[i] = fs.atoms[paths[i][k - 1]];
    return RandomVector::scalar(set.space(), std::move(v));
  }

  /// Observed X_k of the model (requires k + lag <= steps).
  RandomVector observed(const SequentialModel& m, std::size_t k) const {
    std::vector<double> v;
    for (const auto& p : paths) {
      std::vector<int> w(p.begin() + static_cast<std::ptrdiff_t>(k - 1),
                         p.begin() + static_cast<std::ptrdiff_t>(k + m.lag()));
      auto x = m.value(w);
      v.insert(v.end(), x.begin(), x.end());
    }
    return RandomVector(set.space(), m.dim(), std::move(v));
  }
};

inline ExplicitModel to_scenario_set(const SequentialModel& m, std::size_t steps) {
  SUBLINERGO_REQUIRE(steps >= 1 && steps <= 4, "explicit scenario sets support 1..4 steps");
  const auto& fs = m.finite();
  const std::size_t A = fs.n_atoms(), C = fs.n_controls();
  std::vector<std::vector<int>> paths{{}};
  for (std::size_t s = 0; s < steps; ++s) {
    std::vector<std::vector<int>> next;
    for (const auto& p : paths)
      for (std::size_t a = 0; a < A; ++a) {
        auto q = p;
        q.push_back(static_cast<int>(a));
        next.push_back(std::move(q));
      }
    paths.swap(next);
  }
  // A policy assigns a control to every history of length 0..steps-1.
  std::size_t histories = 0, hcount = 1;
  std::vector<std::size_t> offset;
  for (std::size_t s = 0; s < steps; ++s) {
    offset.push_back(histories);
    histories += hcount;
    hcount *= A;
  }
  double n_policies = std::pow(static_cast<double>(C), static_cast<double>(histories));
  SUBLINERGO_REQUIRE(n_policies <= 2e5, "too many adapted policies to enumerate");
  std::vector<std::size_t> choice(histories, 0);
  std::vector<DiscreteMeasure> measures;
  std::set<std::vector<double>> seen;
  for (std::size_t pi = 0; pi < static_cast<std::size_t>(n_policies); ++pi) {
    std::size_t c = pi;
    for (std::size_t h = 0; h < histories; ++h) {
      choice[h] = c % C;
      c /= C;
    }
    std::vector<double> w(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
      double prob = 1.0;
      std::size_t hist = 0;
      for (std::size_t s = 0; s < steps; ++s) {
        prob *= fs.weights[choice[offset[s] + hist]][paths[i][s]];
        hist = hist * A + static_cast<std::size_t>(paths[i][s]);
      }
      w[i] = prob;
    }
    if (seen.insert(w).second) measures.emplace_back(DiscreteMeasure(w));
  }
  std::vector<std::string> labels;
  for (const auto& p : paths) {
    std::string l;
    for (int a : p) l += (l.empty() ? "" : ",") + std::to_string(a);
    labels.push_back(l);
  }
  auto space = std::make_shared<const SampleSpace>(std::move(labels));
  return {ScenarioSet(space, std::move(measures)), std::move(paths)};
}

}  // namespace sublinergo
