#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "sublinergo/lattice.hpp"
#include "sublinergo/models.hpp"

using namespace sublinergo;

namespace {

// Classical binomial walk with N steps of +-sqrt(q/N).
double binomial_oracle(double q, std::size_t n, const std::function<double(double)>& phi) {
  const double s = std::sqrt(q / static_cast<double>(n));
  double e = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double logw = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0);
    e += std::exp(logw) * phi((2.0 * k - static_cast<double>(n)) * s);
  }
  return e;
}

ScalarFn random_phi(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-1, 1);
  const double a = u(gen), b = u(gen), c = u(gen), d = u(gen);
  return {"rand", [=](double x) { return a * std::abs(x - c) + b * x + d * std::sin(x); },
          std::abs(a) + std::abs(b) + std::abs(d)};
}

StepLaw random_step(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> q(-8, 8), wi(1, 4), nc(1, 4);
  std::vector<double> atoms{q(gen) / 4.0};
  while (atoms.size() < 3) {
    const double v = q(gen) / 4.0;
    if (std::find(atoms.begin(), atoms.end(), v) == atoms.end()) atoms.push_back(v);
  }
  std::vector<std::vector<double>> w;
  for (int c = nc(gen); c > 0; --c) {
    std::vector<double> v{double(wi(gen)), double(wi(gen)), double(wi(gen))};
    const double s = v[0] + v[1] + v[2];
    v = {v[0] / s, v[1] / s, 1.0 - v[0] / s - v[1] / s};
    w.push_back(v);
  }
  return StepLaw::custom(atoms, w);
}

}  // namespace

TEST(VnRecursion, LayerZeroIsPhi) {
  ScalarFn phi{"abs", [](double x) { return std::abs(x - 0.1); }, 1.0};
  auto t = v_n_recursion(StepLaw::maximal(-1, 1), phi, 4);
  ASSERT_EQ(t.layers.size(), 5u);
  for (std::size_t i = 0; i < t.nodes(); ++i) EXPECT_EQ(t.layers[0][i], phi(t.x(i)));
}

TEST(VnRecursion, MaximalCollapsesToDirectMax) {
  ScalarFn cvx{"abs", [](double x) { return std::abs(x - 0.2); }, 1.0};
  ScalarFn cav{"cap", [](double x) { return -std::abs(x - 7.0 / 17.0); }, 1.0};
  ScalarFn wig{"sin", [](double x) { return std::sin(4.0 * x); }, 4.0};
  const auto grid = StepLaw::maximal(-1, 1).controls().values();
  for (std::size_t n : {1u, 2u, 5u, 20u}) {
    auto z = StepLaw::maximal(-1, 1);
    EXPECT_NEAR(v_n_recursion(z, cvx, n).at(n, 0.0), 1.2, 1e-12);
    EXPECT_NEAR(v_n_recursion(z, cav, n).at(n, 0.0), 0.0, 1e-12);
    const double w = v_n_recursion(z, wig, n).at(n, 0.0);
    double on_grid = -1e9;
    for (double y : grid) on_grid = std::max(on_grid, wig(y));
    EXPECT_GE(w, on_grid - 1e-12);
    EXPECT_LE(w, max_over_interval(wig.f, -1, 1) + 1e-12);
  }
}

TEST(VnRecursion, OneStepIsExpectation) {
  ScalarFn id{"id", [](double x) { return x; }, 1.0};
  EXPECT_NEAR(v_n_recursion(StepLaw::maximal(-0.5, 0.75), id, 1).at(1, 0.0), 0.75, 1e-12);
  EXPECT_NEAR(v_n_recursion(models::two_scale_coin(), id, 1).at(1, 0.0), 0.0, 1e-12);
}

TEST(VnRecursion, UnderCoverageIsReported) {
  ScalarFn id{"id", [](double x) { return x; }, 1.0};
  LatticeOptions tight;
  tight.extent = 0.25;
  auto t = v_n_recursion(StepLaw::maximal(-1, 1, 1), id, 3, tight);
  EXPECT_GT(t.clipped_fraction(), 0.0);
  EXPECT_FALSE(t.warnings.empty());
  auto ok = v_n_recursion(StepLaw::maximal(-1, 1, 1), id, 3);
  EXPECT_DOUBLE_EQ(ok.at(3, 0.0), 1.0);
}

TEST(VnRecursion, MonotoneStableAndLipschitz) {
  std::mt19937_64 gen(21);
  for (int inst = 0; inst < 200; ++inst) {
    auto z = random_step(gen);
    auto f = random_phi(gen);
    const double bump = std::uniform_real_distribution<double>(0.0, 0.5)(gen);
    ScalarFn g{"g", [f, bump](double x) { return f(x) + bump * std::cos(x) * std::cos(x); }, f.lipschitz + bump};
    const std::size_t n = 1 + inst % 6;
    LatticeOptions opt;
    opt.extent = 3.0;
    auto tf = v_n_recursion(z, f, n, opt);
    auto tg = v_n_recursion(z, g, n, opt);
    for (std::size_t k = 0; k <= n; ++k) {
      for (std::size_t i = 0; i < tf.nodes(); ++i) {
        ASSERT_LE(tf.layers[k][i], tg.layers[k][i] + 1e-12);  // f <= g
        ASSERT_LE(tg.layers[k][i] - tf.layers[k][i], bump + 1e-12);
        if (i > 0) {
          ASSERT_LE(std::abs(tf.layers[k][i] - tf.layers[k][i - 1]), f.lipschitz * tf.dx * (1 + 1e-9) + 1e-12);
        }
      }
    }
  }
}

TEST(VnRecursion, CsvHeader) {
  ScalarFn id{"id", [](double x) { return x; }, 1.0};
  std::ostringstream os;
  v_n_recursion(StepLaw::maximal(0, 1, 0), id, 1).write_csv(os);
  EXPECT_EQ(os.str().substr(0, 14), "layer,x,value\n");
}

TEST(GNormalStep, OddPayoffIsZero) {
  for (std::size_t n : {1u, 7u, 100u}) EXPECT_NEAR(g_normal_step(1, 4, n, [](double x) { return x; }), 0.0, 1e-12);
}

TEST(GNormalStep, SquareIsExactAtEveryN) {
  for (std::size_t n : {1u, 3u, 50u, 500u}) {
    EXPECT_NEAR(g_normal_step(1, 4, n, [](double x) { return x * x; }), 4.0, kExactTol);
    EXPECT_NEAR(-g_normal_step(1, 4, n, [](double x) { return -x * x; }), 1.0, kExactTol);
  }
  // irrational variance ratio falls back to interpolated reads
  EXPECT_NEAR(g_normal_step(2, 3, 40, [](double x) { return x * x; }), 3.0, kExactTol);
}

TEST(GNormalStep, PositivePartNearGaussian) {
  const double v = g_normal_step(1, 4, 2000, [](double x) { return std::max(x, 0.0); });
  EXPECT_NEAR(v, 2.0 / std::sqrt(2.0 * std::numbers::pi), 5e-3);
}

TEST(GNormalStep, RejectsInvertedRange) {
  EXPECT_THROW(g_normal_step(4, 1, 10, [](double x) { return x; }), DomainError);
  EXPECT_THROW(StepLaw::g_normal(2, 1), DomainError);
}

TEST(GNormalStep, SingleVarianceMatchesBinomial) {
  std::mt19937_64 gen(22);
  std::uniform_real_distribution<double> u(0.1, 4.0);
  for (int inst = 0; inst < 200; ++inst) {
    const double q = u(gen);
    const std::size_t n = 1 + inst % 40;
    auto f = random_phi(gen);
    EXPECT_NEAR(g_normal_step(q, q, n, f.f), binomial_oracle(q, n, f.f), 1e-10);
  }
}

TEST(GNormalStep, MonotoneInUpperVarianceForConvex) {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int inst = 0; inst < 200; ++inst) {
    const double c = 2 * u(gen) - 1, a = u(gen);
    auto phi = [=](double x) { return std::abs(x - c) + a * x * x; };
    const double lo = u(gen), hi1 = lo + u(gen), hi2 = hi1 + u(gen);
    const std::size_t n = 5 + inst % 30;
    EXPECT_LE(g_normal_step(lo, hi1, n, phi), g_normal_step(lo, hi2, n, phi) + 1e-9);
  }
}
