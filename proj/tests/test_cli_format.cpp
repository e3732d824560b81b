#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "sublinergo/sublinergo.hpp"

using namespace sublinergo;

namespace {

std::size_t error_line(const std::string& doc, const std::function<void(const text::Document&)>& use = {}) {
  try {
    auto d = text::Document::parse_string(doc);
    if (use) use(d);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

SequentialModel round_trip(const SequentialModel& m) {
  std::ostringstream os;
  text::write_model(os, m);
  const auto d = text::Document::parse_string(os.str());
  return text::read_model(*d.find("model"));
}

}  // namespace

TEST(TextFormat, SectionsListsAndComments) {
  const auto d = text::Document::parse_string(
      "# header\n"
      "seed = 7   # trailing\n"
      "\n"
      "[model]\n"
      "atoms = -1, 0.5 ,2\n"
      "weights = 1, 0, 0 ; 0.25, 0.25, 0.5\n"
      "[vector X]\n"
      "values = 1\n");
  EXPECT_EQ(d.root().uint("seed"), 7u);
  const auto* m = d.find("model");
  ASSERT_NE(m, nullptr);
  EXPECT_EQ(m->list("atoms"), (std::vector<double>{-1.0, 0.5, 2.0}));
  EXPECT_EQ(m->matrix("weights").size(), 2u);
  EXPECT_EQ(m->matrix("weights")[1][2], 0.5);
  EXPECT_EQ(d.all("vector").front()->label, "X");
  EXPECT_EQ(m->num("missing", 3.5), 3.5);
}

TEST(TextFormat, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("a = 1\n[model\n"), 2u);
  EXPECT_EQ(error_line("a = 1\n\nno equals sign\n"), 3u);
  EXPECT_EQ(error_line("a = \n"), 1u);
  EXPECT_EQ(error_line("a = 1\nb = x2\n", [](const auto& d) { d.root().num("b"); }), 2u);
  EXPECT_EQ(error_line("a = 1\na = 2\n", [](const auto& d) { d.root().num("a"); }), 2u);
  EXPECT_EQ(error_line("a = 1\n[other]\n", [](const auto& d) { d.allow({"model"}); }), 2u);
  EXPECT_EQ(error_line("[model]\nstep = custom\natoms = 1\nweights = 1\nhorizon = 2\ncolor = red\n",
                       [](const auto& d) { text::read_model(*d.find("model")); }),
            6u);
  EXPECT_EQ(error_line("[model]\nstep = custom\natoms = 1, 2\nweights = 0.7, 0.7\nhorizon = 2\n",
                       [](const auto& d) { text::read_model(*d.find("model")); }),
            1u);
}

TEST(TextFormat, ModelRoundTripPresets) {
  for (const auto& m : {models::remark_smaller(6, 0), models::remark_smaller(4), models::one_dependent(8),
                        models::maximal_iid(5, -1.0, 2.0, 3), models::fair_coin(3),
                        SequentialModel::iid(StepLaw::g_normal(1.0, 4.0), 4)}) {
    const auto r = round_trip(m);
    EXPECT_EQ(r.step().kind(), m.step().kind());
    EXPECT_EQ(r.horizon(), m.horizon());
    EXPECT_EQ(r.lag(), m.lag());
    EXPECT_EQ(r.table(), m.table());
    EXPECT_EQ(r.finite().atoms, m.finite().atoms);
    EXPECT_EQ(r.finite().weights, m.finite().weights);
    EXPECT_EQ(r.linear_weights().has_value(), m.linear_weights().has_value());
  }
}

TEST(TextFormat, ModelRoundTripRandom) {
  std::mt19937_64 gen(51);
  for (int inst = 0; inst < 200; ++inst) {
    const auto m = oracle::random_model(gen, 4).model;
    const auto r = round_trip(m);
    ASSERT_EQ(r.table(), m.table());
    ASSERT_EQ(r.finite().weights, m.finite().weights);
    auto phi = [](double x) { return std::sin(3.0 * x) + std::abs(x); };
    EXPECT_EQ(lln_expectation(r, phi, 4).value, lln_expectation(m, phi, 4).value);
  }
}

TEST(TextFormat, TableModelMatchesClosedForm) {
  const auto d = text::Document::parse_string(
      "[model]\nstep = maximal\nlo = -1\nhi = 1\ninterior = 0\nhorizon = 2\nlag = 1\n"
      "table = 1, 3, -1, -3\n");
  const auto m = text::read_model(*d.find("model"));
  const auto ref = models::remark_smaller(2, 0);
  EXPECT_EQ(m.table(), ref.table());
  EXPECT_NEAR(lln_expectation(m, [](double x) { return x; }, 2).value, 2.0, 1e-12);
}

TEST(TextFormat, ScenarioRoundTripRandom) {
  std::mt19937_64 gen(52);
  std::uniform_int_distribution<int> na(1, 6), nm(1, 4), wi(0, 5), vi(-9, 9);
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t n = static_cast<std::size_t>(na(gen));
    std::vector<DiscreteMeasure> ms;
    for (int k = nm(gen); k > 0; --k) {
      std::vector<double> w(n);
      double s = 0.0;
      while (s == 0.0) {
        s = 0.0;
        for (auto& v : w) s += (v = wi(gen));
      }
      for (auto& v : w) v /= s;
      double t = 0.0;
      for (std::size_t a = 0; a + 1 < n; ++a) t += w[a];
      w[n - 1] = std::max(0.0, 1.0 - t);
      ms.emplace_back(std::move(w));
    }
    ScenarioSet S(SampleSpace::indexed(n), std::move(ms));
    std::vector<double> xv(n);
    for (auto& v : xv) v = vi(gen) / 3.0;
    const auto X = RandomVector::scalar(S.space(), xv);
    std::ostringstream os;
    text::write_scenario(os, S, {{"X", X}});
    const auto back = text::read_scenario(text::Document::parse_string(os.str()));
    ASSERT_EQ(back.set.size(), S.size());
    for (std::size_t k = 0; k < S.size(); ++k) EXPECT_EQ(back.set.measures()[k].weights(), S.measures()[k].weights());
    EXPECT_EQ(back.vector("X").values(), X.values());
    EXPECT_EQ(eval_sublinear(back.set, back.vector("X")).value, eval_sublinear(S, X).value);
  }
}

TEST(TextFormat, GsdeSections) {
  auto sec = [](const std::string& s) { return *text::Document::parse_string("[gsde]\n" + s).find("gsde"); };
  const auto g = text::read_gsde(sec("preset = gou\na = 2\nsigma = 0.5\n"));
  EXPECT_EQ(g.claimed_alpha, 2.0);
  EXPECT_NEAR(check_dissipativity(g, 200, 3.0, 1).min_margin, 2.0, 1e-12);
  const auto c = text::read_gsde(sec("preset = custom\nb_x = -1, 1\nb_y = 1, -1\nsigma_x = 0\nsigma_y = 1\nalpha = 1\n"));
  EXPECT_NEAR(check_dissipativity(c, 200, 3.0, 2).min_margin, 1.0, 1e-12);
  EXPECT_THROW(text::read_gsde(sec("preset = quartic\n")), ParseError);
  EXPECT_THROW(text::read_gsde(sec("preset = gou\nbeta = 1\n")), ParseError);
}

TEST(TextFormat, ObservablesAndCandidates) {
  auto sec = [](const std::string& name, const std::string& s) {
    return *text::Document::parse_string("[" + name + "]\n" + s).find(name);
  };
  const auto x = text::read_observable(sec("observable", "kind = cylinder\nword = 01\n"));
  const auto w = SymbolicPoint::prefix({0, 1}, SymbolicPoint::Tail::repeat, 64);
  EXPECT_NEAR(birkhoff_average(w, x, 32), 0.5, 1e-12);
  EXPECT_THROW(text::read_observable(sec("observable", "kind = cylinder\nword = 012\n")), ParseError);
  const auto c = text::read_candidate(sec("candidate", "kind = cylinder_first\nbit = 1\n"), 8);
  EXPECT_TRUE(c.member(1u));
  EXPECT_THROW(text::read_candidate(sec("candidate", "kind = cylinder_first\nbit = 2\n"), 8), ParseError);
}

TEST(Presets, CatalogIsComplete) {
  const auto& cat = presets::catalog();
  ASSERT_FALSE(cat.empty());
  for (const char* id : {"remark-smaller", "exA-block", "gou", "cubic", "rotation-golden", "one-dependent"})
    EXPECT_NO_THROW(presets::info(id)) << id;
  for (const auto& p : cat) {
    switch (p.kind) {
      case presets::Kind::sequential: EXPECT_EQ(presets::sequential(p.id, 4).horizon(), 4u); break;
      case presets::Kind::gsde: EXPECT_NO_THROW(presets::gsde(p.id).validate()); break;
      case presets::Kind::symbolic: EXPECT_EQ(presets::symbolic(p.id, 16)[1], 1); break;
      case presets::Kind::rotation: EXPECT_NEAR(presets::rotation(p.id).alpha, 0.6180339887, 1e-9); break;
    }
  }
  EXPECT_THROW(presets::info("nope"), DomainError);
}
