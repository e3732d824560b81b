#include <gtest/gtest.h>

#include <sstream>

#include "sublinergo/gbm.hpp"
#include "sublinergo/lattice.hpp"

using namespace sublinergo;

TEST(Philox, KnownAnswers) {
  EXPECT_EQ(rng::philox4x32({0, 0, 0, 0}, {0, 0}), (rng::Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(rng::philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (rng::Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(rng::philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (rng::Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(SimulateGbm, ConstantControlMoments) {
  auto e = simulate_gbm(1, 4, policy::constant(2.0), 0.01, 1.0, 20000, 7);
  const auto ms = mean_se(e.terminal());
  EXPECT_LE(std::abs(ms.mean), 3 * ms.se);
  std::vector<double> sq;
  for (double b : e.terminal()) sq.push_back(b * b);
  const auto v = mean_se(sq);
  EXPECT_LE(std::abs(v.mean - 2.0), 3 * v.se);
}

TEST(SimulateGbm, Reproducible) {
  auto a = simulate_gbm(1, 4, policy::bang_bang(1, 4, [](double, double x) { return x; }), 0.05, 1, 300, 99);
  auto b = simulate_gbm(1, 4, policy::bang_bang(1, 4, [](double, double x) { return x; }), 0.05, 1, 300, 99);
  EXPECT_EQ(a.all_increments(), b.all_increments());
  const unsigned saved = max_jobs();
  max_jobs() = 1;
  auto c = simulate_gbm(1, 4, policy::bang_bang(1, 4, [](double, double x) { return x; }), 0.05, 1, 300, 99);
  max_jobs() = saved;
  EXPECT_EQ(a.all_increments(), c.all_increments());
  auto d = simulate_gbm(1, 4, policy::constant(1), 0.05, 1, 300, 100);
  EXPECT_NE(a.all_increments(), d.all_increments());
}

TEST(SimulateGbm, RejectsPolicyOutsideQ) {
  EXPECT_THROW(simulate_gbm(1, 4, policy::constant(5.0), 0.1, 1, 3, 1), DomainError);
  EXPECT_THROW(simulate_gbm(1, 4, policy::constant(2.0), 0.0, 1, 3, 1), DomainError);
}

TEST(SimulateGbm, ConstantControlsMatchLatticeForConvexPayoff) {
  auto payoff = [](double x) { return std::max(x, 0.0); };
  const double lattice = g_normal_step(1, 4, 2000, payoff);
  double best = -1e9, best_se = 0;
  for (double q : {1.0, 2.5, 4.0}) {
    auto e = simulate_gbm(1, 4, policy::constant(q), 0.02, 1, 40000, 3);
    std::vector<double> v;
    for (double b : e.terminal()) v.push_back(payoff(b));
    const auto ms = mean_se(v);
    if (ms.mean > best) {
      best = ms.mean;
      best_se = ms.se;
    }
  }
  EXPECT_LE(std::abs(best - lattice), 3 * best_se + 5e-3);
}

TEST(SimulateGbm, PolicyFamilyIsALowerBound) {
  // non-convex payoff: the sup needs switching, finite families stay below
  auto payoff = [](double x) { return std::abs(x) < 1.0 ? 1.0 - std::abs(x) : 0.0; };
  const double lattice = g_normal_step(1, 4, 1000, payoff);
  std::vector<ControlPolicy> fam{policy::constant(1), policy::constant(4),
                                 policy::bang_bang(1, 4, [](double, double x) { return std::abs(x) - 1.0; }),
                                 policy::piecewise({0.0, 0.5}, {4.0, 1.0})};
  for (const auto& p : fam) {
    auto e = simulate_gbm(1, 4, p, 0.01, 1, 20000, 5);
    std::vector<double> v;
    for (double b : e.terminal()) v.push_back(payoff(b));
    const auto ms = mean_se(v);
    EXPECT_LE(ms.mean, lattice + 3 * ms.se) << p.name;
  }
}

TEST(QuadraticVariation, IntegratesControl) {
  // sd of the sum of squares is dt * sqrt(2 sum q^2 / dt): 0.028 at dt = 1e-4, so
  // the 5e-2 band is checked at dt = 1e-5 where it is several sd wide
  auto e = simulate_gbm(1, 4, policy::constant(2.0), 1e-5, 1, 4, 11);
  for (std::size_t p = 0; p < 4; ++p) EXPECT_NEAR(quadratic_variation(e.path(p)).back(), 2.0, 5e-2);
  auto two = simulate_gbm(1, 4, policy::piecewise({0.0, 0.5}, {1.0, 4.0}), 1e-5, 1, 4, 12);
  for (std::size_t p = 0; p < 4; ++p) EXPECT_NEAR(quadratic_variation(two.path(p)).back(), 2.5, 5e-2);
  Path zero{0.1, std::vector<double>(10, 0.0)};
  EXPECT_EQ(quadratic_variation(zero).back(), 0.0);
}

TEST(ThetaShift, GroupLaw) {
  auto e = simulate_gbm(1, 4, policy::constant(1.0), 0.01, 2, 3, 13);
  auto p = e.path(1);
  EXPECT_EQ(theta_shift(p, 0.0).values(), p.values());
  auto s = theta_shift(p, 0.37);
  EXPECT_EQ(s.values().front(), 0.0);
  EXPECT_EQ(theta_shift(theta_shift(p, 0.37), 0.5).values(), theta_shift(p, 0.87).values());
  EXPECT_THROW(theta_shift(p, 2.5), DomainError);
  EXPECT_THROW(theta_shift(p, 0.005), DomainError);
}

TEST(ThetaShift, PreservesIncrementLaw) {
  auto e = simulate_gbm(1, 4, policy::constant(3.0), 0.05, 4, 5000, 14);
  std::vector<double> first, shifted;
  for (std::size_t p = 0; p < e.n_paths(); ++p) {
    const auto path = e.path(p);
    first.push_back(path.increments[0]);
    shifted.push_back(theta_shift(path, 2.0).increments[0]);
  }
  const auto a = mean_se(first), b = mean_se(shifted);
  EXPECT_LE(std::abs(a.mean - b.mean), 3 * std::hypot(a.se, b.se));
  std::vector<double> a2, b2;
  for (double x : first) a2.push_back(x * x);
  for (double x : shifted) b2.push_back(x * x);
  const auto va = mean_se(a2), vb = mean_se(b2);
  EXPECT_LE(std::abs(va.mean - vb.mean), 3 * std::hypot(va.se, vb.se));
}

TEST(PathEnsemble, CsvAndBinaryRoundTrip) {
  auto e = simulate_gbm(1, 4, policy::constant(1.5), 0.1, 1, 3, 15);
  std::ostringstream csv;
  e.write_csv(csv);
  EXPECT_EQ(csv.str().rfind("path_id,time,value\n", 0), 0u);
  std::stringstream bin;
  e.write_binary(bin);
  const std::string raw = bin.str();
  EXPECT_EQ(raw.substr(0, 16), "SUBLINERGO-PATHS");
  EXPECT_EQ(raw[16], 1);
  EXPECT_EQ(raw.size(), 16u + 1 + 8 * 4 + 8 * 3 * 10);
  auto back = PathEnsemble::read_binary(bin);
  EXPECT_EQ(back.all_increments(), e.all_increments());
  EXPECT_EQ(back.seed(), 15u);
  std::istringstream bad("NOT-A-PATH-CACHE-AT-ALL");
  EXPECT_THROW(PathEnsemble::read_binary(bad), DomainError);
}

TEST(BmMixing, Examples) {
  auto sgn = [](std::span<const double> w) { return w.back() >= 0 ? 1.0 : -1.0; };
  auto r = bm_mixing_estimate(sgn, sgn, 1.0, {1.0, 3.0}, 20000, 21);
  for (const auto& row : r) EXPECT_LE(std::abs(row.cov), 3 * row.se) << row.t;
  auto end = [](std::span<const double> w) { return w.back(); };
  auto r0 = bm_mixing_estimate(end, end, 1.0, {0.0}, 20000, 22, 2.0);
  EXPECT_LE(std::abs(r0[0].cov - 2.0), 3 * r0[0].se);
  auto capped = [](std::span<const double> w) { return std::min(w.back(), 1.0); };
  auto rc = bm_mixing_estimate(capped, capped, 1.0, {1.0, 2.0, 4.0}, 20000, 23);
  for (const auto& row : rc) EXPECT_LE(std::abs(row.cov), 3 * row.se) << row.t;
}
