// Shared error types, tolerances and small numeric helpers.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace sublinergo {

inline constexpr const char* kVersion = "0.3.0";

/// Absolute tolerance for claims that are exact in rational arithmetic.
inline constexpr double kExactTol = 1e-9;
/// Weights of a DiscreteMeasure must sum to one within this tolerance.
inline constexpr double kWeightTol = 1e-12;
/// Monte Carlo acceptance multiplier on standard errors.
inline constexpr double kSeMultiplier = 3.0;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, std::size_t step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

#define SUBLINERGO_REQUIRE(cond, msg)                  \
  do {                                                 \
    if (!(cond)) throw ::sublinergo::DomainError(msg); \
  } while (0)

/// A scalar Lipschitz test function with its declared constant.
struct ScalarFn {
  std::string name;
  std::function<double(double)> f;
  double lipschitz = 1.0;

  double operator()(double x) const { return f(x); }
};

/// Mean and standard error of a sample.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

inline MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe r;
  r.n = xs.size();
  if (xs.empty()) return r;
  double s = 0.0;
  for (double x : xs) s += x;
  r.mean = s / static_cast<double>(xs.size());
  if (xs.size() < 2) return r;
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  return r;
}

/// Least squares y = slope * x + intercept.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root mean square residual
  double slope_se = 0.0;
  std::size_t used = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit r;
  const std::size_t n = x.size();
  r.used = n;
  if (n < 2) return r;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  r.slope = sxx > 0 ? sxy / sxx : 0.0;
  r.intercept = my - r.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (r.slope * x[i] + r.intercept);
    ss += e * e;
  }
  r.residual = std::sqrt(ss / n);
  if (n > 2 && sxx > 0) r.slope_se = std::sqrt(ss / (n - 2) / sxx);
  return r;
}

/// 64-bit FNV-1a, stable across platforms.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Process-wide cap on worker threads (`--jobs`).
inline unsigned& max_jobs() {
  static unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  return jobs;
}

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunks write
/// disjoint outputs; callers reduce afterwards in index order.
inline void parallel_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  const unsigned jobs = std::max(1u, std::min<unsigned>(max_jobs(), static_cast<unsigned>(n / 256 + 1)));
  if (jobs <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(jobs);
  const std::size_t chunk = (n + jobs - 1) / jobs;
  for (unsigned j = 0; j < jobs; ++j) {
    const std::size_t b = j * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    workers.emplace_back([&, j, b, e] {
      try {
        body(b, e);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

/// Smallest q <= max_den with |v*q - round(v*q)| small, or 0 if none.
inline std::int64_t rational_denominator(double v, std::int64_t max_den = 100000) {
  for (std::int64_t q = 1; q <= max_den; ++q) {
    const double s = v * static_cast<double>(q);
    if (std::abs(s - std::round(s)) <= 1e-9 * std::max(1.0, std::abs(s))) return q;
  }
  return 0;
}

/// Common denominator of all values, or 0 if it would exceed max_lcm.
inline std::int64_t common_denominator(const std::vector<double>& values, std::int64_t max_lcm = 1'000'000'000) {
  std::int64_t l = 1;
  for (double v : values) {
    const std::int64_t q = rational_denominator(v, std::min<std::int64_t>(max_lcm, 100000));
    if (q == 0) return 0;
    l = std::lcm(l, q);
    if (l > max_lcm) return 0;
  }
  return l;
}

/// Max of a Lipschitz function over [lo, hi] by dense sampling (endpoints included).
inline double max_over_interval(const std::function<double(double)>& f, double lo, double hi, int samples = 20001) {
  double best = std::max(f(lo), f(hi));
  if (hi <= lo) return f(lo);
  for (int i = 1; i < samples - 1; ++i) best = std::max(best, f(lo + (hi - lo) * i / (samples - 1)));
  return best;
}

}  // namespace sublinergo
