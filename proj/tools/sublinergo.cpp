// sublinergo: config-driven experiment runner.
//
//   sublinergo presets
//   sublinergo run <experiment> [--config FILE] [--out DIR] [--seed N] [--jobs N] [--<key> VALUE ...]
//   sublinergo report --out DIR
//
// Exit codes: 0 success, 1 input error, 2 a check in the experiment failed.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sublinergo/sublinergo.hpp"

namespace fs = std::filesystem;
using namespace sublinergo;

namespace {

constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string dashed(std::string k) {
  std::replace(k.begin(), k.end(), '_', '-');
  return k;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v + 0.0;  // no "-0"
  return os.str();
}

// ---------------------------------------------------------------------------
// Test functions by name

std::function<double(double)> scalar_phi(const std::string& name) {
  if (name == "identity") return [](double x) { return x; };
  if (name == "abs") return [](double x) { return std::abs(x); };
  if (name == "square") return [](double x) { return x * x; };
  if (name == "clamp") return [](double x) { return std::clamp(x, -1.0, 1.0); };
  if (name == "positive") return [](double x) { return std::max(x, 0.0); };
  throw DomainError("unknown test function '" + name + "' (identity, abs, square, clamp, positive)");
}

double phi_lipschitz(const std::string& name) { return name == "square" ? 0.0 : 1.0; }

std::function<double(double, double)> pair_phi(const std::string& name) {
  if (name == "clamp-product") return [](double x, double y) { return std::clamp(x * y, -1.0, 1.0); };
  if (name == "abs-difference") return [](double x, double y) { return std::abs(x - y); };
  if (name == "sin-sum") return [](double x, double y) { return std::sin(x + y); };
  throw DomainError("unknown pair function '" + name + "' (clamp-product, abs-difference, sin-sum)");
}

// ---------------------------------------------------------------------------
// Experiments

struct Param {
  std::string key, def, help;
};

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

struct Context {
  text::Section cfg;   // effective root keys
  text::Document doc;  // config file, for model sections
  std::vector<std::pair<std::string, std::string>> outputs;
  std::vector<std::string> summary;
  std::vector<Check> checks;

  std::string str(const std::string& k) const { return cfg.str(k); }
  double num(const std::string& k) const { return cfg.num(k); }
  std::size_t size(const std::string& k) const { return cfg.uint(k); }
  std::vector<double> list(const std::string& k) const { return cfg.list(k); }
  std::vector<std::size_t> sizes(const std::string& k) const { return cfg.uint_list(k); }
  std::uint64_t seed() const { return cfg.uint("seed"); }

  void line(const std::string& s) { summary.push_back(s); }
  void check(std::string name, bool pass, std::string detail) {
    checks.push_back({std::move(name), pass, std::move(detail)});
  }
  void output(std::string name, std::string content) { outputs.emplace_back(std::move(name), std::move(content)); }
};

struct Experiment {
  std::string name;
  bool stochastic;
  std::vector<Param> params;
  std::vector<std::string_view> sections;
  std::function<void(Context&)> run;
};

SequentialModel sequential_model(Context& c, std::size_t horizon) {
  const text::Section* s = c.doc.find("model");
  if (s) {
    if (c.cfg.has("preset") && !c.str("preset").empty())
      throw DomainError("give either a preset or a [model] section, not both");
    text::Section copy = *s;
    copy.set("horizon", std::to_string(horizon));
    return text::read_model(copy);
  }
  const std::string id = c.str("preset");
  if (presets::info(id).kind != presets::Kind::sequential) throw DomainError("preset '" + id + "' is not a sequential model");
  return presets::sequential(id, horizon);
}

void write_model_note(Context& c, const SequentialModel& m) {
  std::ostringstream os;
  text::write_model(os, m);
  c.output("model.txt", os.str());
}

void run_lln(Context& c) {
  const auto grid = c.sizes("n");
  const std::string mode = c.str("mode");
  const auto phi = ScalarFn{c.str("phi"), scalar_phi(c.str("phi")), phi_lipschitz(c.str("phi"))};
  const std::size_t n_star = c.size("n_star");
  RateTable t;
  if (mode == "plain" || mode == "mean-certain") {
    const auto m = sequential_model(c, std::max(grid.back(), n_star));
    write_model_note(c, m);
    if (mode == "plain") {
      const auto star = gamma_star(m, n_star);
      c.line("gamma_star = [" + num(star.set.lo()) + ", " + num(star.set.hi()) + "] (n_max " + std::to_string(n_star) +
             (star.converged ? ", converged)" : ", not converged)"));
      t = lln_experiment(m, phi, grid, star.set);
    } else {
      t = mean_certain_convergence(m, grid);
    }
  } else if (mode == "subsequence") {
    const auto spec = SubsequenceSpec::polynomial(c.list("poly"));
    if (spec.degree() < 2) throw DomainError("subsequence mode needs a polynomial of degree >= 2");
    const auto m = sequential_model(c, std::max<std::size_t>(spec.index(grid.back()), 1));
    write_model_note(c, m);
    t = subsequence_lln_experiment(m, phi, spec, grid);
  } else {
    throw DomainError("mode must be plain, subsequence or mean-certain");
  }
  std::ostringstream os;
  t.write_csv(os);
  c.output("lln.csv", os.str());
  for (const auto& r : t.rows)
    c.line("n = " + std::to_string(r.n) + "  value = " + num(r.value) + "  error = " + num(r.abs_error) + "  [" +
           r.mode + "]");
  c.line("fit (top half): " + (t.fit.degenerate ? std::string("degenerate") : "slope " + num(t.fit.slope)));
  c.line("fit (all rows): " + (t.fit_full.degenerate ? std::string("degenerate") : "slope " + num(t.fit_full.slope)));
  if (const auto ms = c.str("max_slope"); !ms.empty()) {
    const double bound = text::to_double(ms, 0);
    c.check("rate slope <= " + ms, !t.fit.degenerate && t.fit.slope <= bound, "slope " + num(t.fit.slope));
  }
}

void run_slln(Context& c) {
  const std::size_t N = c.size("horizon"), trials = c.size("trials"), n_star = c.size("n_star");
  const auto m = sequential_model(c, std::max(N, n_star));
  write_model_note(c, m);
  const auto star = gamma_star(m, n_star).set;
  const auto fam = sampling::default_family(m);
  const auto rep = slln_experiment(m, fam, star, N, trials, c.seed(), c.num("bracket_slack"));
  std::ostringstream os;
  os << "n,envelope,envelope_monotone\n";
  os.precision(17);
  for (std::size_t i = 0; i < rep.checkpoints.size(); ++i)
    os << rep.checkpoints[i] << ',' << rep.envelope[i] << ',' << rep.envelope_monotone[i] << '\n';
  c.output("slln.csv", os.str());
  std::ostringstream tr;
  tr << "measure,trial,n,dist\n";
  tr.precision(17);
  for (const auto& t : rep.trajectories)
    for (std::size_t i = 0; i < t.dist.size(); ++i)
      tr << t.measure << ',' << t.trial << ',' << rep.checkpoints[i] << ',' << t.dist[i] << '\n';
  c.output("slln_trajectories.csv", tr.str());
  c.line("gamma_star = [" + num(star.lo()) + ", " + num(star.hi()) + "]");
  c.line("measures = " + std::to_string(fam.size()) + ", trials = " + std::to_string(trials));
  c.line(rep.note);
  c.line("final envelope = " + num(rep.final_value));
  c.check("final dist <= tol", rep.final_value <= c.num("tol"), num(rep.final_value));
  if (rep.scalar) {
    c.line("tail range = [" + num(rep.observed_lo) + ", " + num(rep.observed_hi) + "], bracket = [" +
           num(rep.bracket_lo) + ", " + num(rep.bracket_hi) + "]");
    c.check("bracket", rep.bracket_ok, "[" + num(rep.observed_lo) + ", " + num(rep.observed_hi) + "]");
  }
}

void run_gnormal(Context& c) {
  const double lo = c.num("sigma_low"), hi = c.num("sigma_high");
  const std::size_t steps = c.size("steps");
  const auto phi = scalar_phi(c.str("phi"));
  const double up = g_normal_step(lo, hi, steps, phi);
  const double down = -g_normal_step(lo, hi, steps, [&](double x) { return -phi(x); });
  std::ostringstream os;
  os.precision(17);
  os << "steps,upper,lower\n" << steps << ',' << up << ',' << down << '\n';
  c.output("gnormal.csv", os.str());
  c.line("E-hat[phi(B_1)] = " + num(up));
  c.line("-E-hat[-phi(B_1)] = " + num(down));
  std::cout << num(up) << '\n';
  c.check("upper >= lower", up >= down - 1e-12, num(up - down));
}

void run_gbm(Context& c) {
  const double lo = c.num("sigma_low"), hi = c.num("sigma_high");
  const std::string pol = c.str("policy");
  ControlPolicy p = pol == "constant" ? policy::constant(c.num("q"))
                    : pol == "bang-bang"
                        ? policy::bang_bang(lo, hi, [](double, double x) { return x; })
                        : throw DomainError("policy must be constant or bang-bang");
  const double T = c.num("horizon_time");
  auto e = simulate_gbm(lo, hi, p, c.num("dt"), T, c.size("paths"), c.seed());
  std::ostringstream os;
  e.write_csv(os);
  c.output("gbm_paths.csv", os.str());
  std::ostringstream q;
  q << "path_id,qv\n";
  q.precision(17);
  std::vector<double> qv;
  for (std::size_t i = 0; i < e.n_paths(); ++i) {
    qv.push_back(quadratic_variation(e.path(i)).back());
    q << i << ',' << qv.back() << '\n';
  }
  c.output("gbm_qv.csv", q.str());
  const auto ms = mean_se(qv);
  c.line("policy = " + p.name);
  c.line("mean quadratic variation = " + num(ms.mean) + " (se " + num(ms.se) + ")");
  if (pol == "constant") {
    const double target = c.num("q") * T;
    c.check("QV matches q T", std::abs(ms.mean - target) <= 4.0 * ms.se + 1e-12,
            num(ms.mean) + " vs " + num(target));
  } else {
    c.check("QV inside [lo T, hi T]", ms.mean >= lo * T - 4 * ms.se && ms.mean <= hi * T + 4 * ms.se, num(ms.mean));
  }
}

GSDEModel gsde_model(Context& c) {
  if (const text::Section* s = c.doc.find("gsde")) {
    if (!c.str("preset").empty()) throw DomainError("give either a preset or a [gsde] section, not both");
    return text::read_gsde(*s);
  }
  const std::string id = c.str("preset");
  if (presets::info(id).kind != presets::Kind::gsde) throw DomainError("preset '" + id + "' is not a G-SDE");
  return presets::gsde(id);
}

void run_gsde(Context& c) {
  const auto m = gsde_model(c);
  const double dt = c.num("dt");
  const std::size_t paths = c.size("paths");
  const auto seed = c.seed();
  const auto fam = gsde_policy::default_family(m);
  const auto dis = check_dissipativity(m, 4000, 5.0, seed);
  c.line("model = " + m.name + ", claimed alpha = " + num(m.claimed_alpha));
  c.line("dissipativity margin = " + num(dis.min_margin) + " over " + std::to_string(dis.pairs_used) + " pairs");
  c.check("dissipativity", dis.passed, num(dis.min_margin));

  Vec x(1), y(1);
  x << c.num("x");
  y << c.num("y");
  const auto rows = contraction_test(m, x, y, c.list("t"), fam, dt, paths, seed);
  std::ostringstream ct;
  ct << "policy,t,ratio,se,bound,ok\n";
  ct.precision(17);
  bool all_ok = true;
  for (const auto& r : rows) {
    ct << r.policy << ',' << r.t << ',' << r.ratio << ',' << r.se << ',' << r.bound << ',' << (r.ok ? 1 : 0) << '\n';
    all_ok = all_ok && r.ok;
  }
  c.output("contraction.csv", ct.str());
  c.check("contraction", all_ok, std::to_string(rows.size()) + " rows");

  const std::string pn = c.str("phi");
  const auto f = scalar_phi(pn);
  TestFunction phi{pn, [f](std::span<const double> v) { return f(v[0]); }, phi_lipschitz(pn)};
  PullbackOptions po;
  po.dt = dt;
  po.n_paths = paths;
  po.seed = seed;
  const auto st = pullback_stationary(m, {phi}, fam, c.num("tol"), po);
  const auto& inv = st.value(pn);
  c.line("stationary E-hat[" + pn + "] = " + num(inv.value) + " (se " + num(inv.se) + ", policy " + inv.policy +
         ", horizon " + num(st.horizon) + (st.converged ? ", converged)" : ", not converged)"));
  c.check("pullback converged", st.converged, num(st.horizon));
  if (m.scalar) {
    MarkovOptions mo;
    mo.dt = dt;
    const auto fit = invariance_decay_fit(m, phi, x, c.list("t"), inv.value, inv.se, MarkovMethod::dp, mo);
    std::ostringstream d;
    fit.write_csv(d);
    c.output("decay.csv", d.str());
    c.line("decay fit: " + (fit.degenerate ? "degenerate (" + fit.note + ")" : "alpha_hat = " + num(fit.alpha_hat)));
  } else {
    c.line("decay fit skipped: the lattice evaluator is scalar only; policy-max values are lower bounds");
  }
}

void run_ergodic(Context& c) {
  const std::string id = c.str("preset");
  const auto kind = presets::info(id).kind;
  const auto grid = c.sizes("n");
  std::ostringstream os;
  os.precision(17);
  if (kind == presets::Kind::symbolic) {
    const SymObservable x = c.doc.find("observable") ? text::read_observable(*c.doc.find("observable"))
                                                     : observables::zero_at_origin();
    std::size_t top = 0;
    for (auto n : grid) top = std::max(top, n + n / 2);
    const auto w = presets::symbolic(id, std::max(kDefaultWindow, top + x.footprint));
    const auto series = birkhoff_series(w, x, top);
    os << "n,average\n";
    double osc_lo = 1e300, osc_hi = -1e300;
    for (auto n : grid) {
      if (n < 2) throw DomainError("ergodic n must be >= 2");
      for (std::size_t k : {n, n + n / 2}) {
        os << k << ',' << series[k - 1] << '\n';
        c.line("A_" + std::to_string(k) + " = " + num(series[k - 1]));
        osc_lo = std::min(osc_lo, series[k - 1]);
        osc_hi = std::max(osc_hi, series[k - 1]);
      }
    }
    c.output("ergodic.csv", os.str());
    c.line("observable = " + x.name);
    c.check("averages oscillate", osc_hi - osc_lo >= c.num("min_oscillation"), num(osc_hi - osc_lo));
  } else if (kind == presets::Kind::rotation) {
    const auto r = presets::rotation(id);
    auto f = [](double w) { return std::cos(2.0 * M_PI * w); };
    const auto rows = unique_ergodicity_test(r, f, grid, uniform_points(c.size("points")));
    const double denom = std::abs(std::complex<double>(1.0, 0.0) - std::polar(1.0, 2.0 * M_PI * r.alpha));
    os << "n,sup_dev,bound\n";
    bool ok = true;
    for (const auto& row : rows) {
      const double bound = 1.1 * 2.0 / (static_cast<double>(row.n) * denom);
      os << row.n << ',' << row.sup_dev << ',' << bound << '\n';
      c.line("n = " + std::to_string(row.n) + "  sup deviation = " + num(row.sup_dev) + "  bound = " + num(bound));
      ok = ok && row.sup_dev <= bound;
    }
    c.output("ergodic.csv", os.str());
    c.check("uniform deviation bound", ok, "cos(2 pi w)");
  } else {
    throw DomainError("preset '" + id + "' is not an ergodic system");
  }
}

void run_mixing(Context& c) {
  const std::size_t block = c.size("block");
  const auto gaps = c.sizes("gaps");
  if (block == 0 || gaps.empty()) throw DomainError("mixing needs block >= 1 and a gap list");
  std::size_t horizon = 0;
  for (auto g : gaps) horizon = std::max(horizon, 2 * block + g);
  const auto m = sequential_model(c, horizon);
  write_model_note(c, m);
  const auto phi = pair_phi(c.str("phi"));
  std::ostringstream os;
  os << "gap,lhs,joint,nested\n";
  os.precision(17);
  bool zero_ok = true;
  for (auto g : gaps) {
    if (g == 0) throw DomainError("mixing gaps must be >= 1");
    MixingProbe p;
    for (std::size_t i = 1; i <= block; ++i) p.lambda1.push_back(i);
    for (std::size_t i = 0; i < block; ++i) p.lambda2.push_back(block + g + i);
    p.phi = phi;
    const auto v = alpha_mixing_lhs(m, p);
    os << g << ',' << v.lhs << ',' << v.joint << ',' << v.nested << '\n';
    c.line("gap = " + std::to_string(g) + "  lhs = " + num(v.lhs));
    if (g > m.lag() && v.lhs > 1e-9) zero_ok = false;
  }
  c.output("mixing.csv", os.str());
  c.check("zero beyond the model lag", zero_ok, "lag " + std::to_string(m.lag()));
}

const std::vector<Experiment>& experiments() {
  static const std::vector<Experiment> e{
      {"lln",
       false,
       {{"preset", "remark-smaller", "sequential preset (or a [model] section)"},
        {"n", "1,2,4,8,16", "n grid"},
        {"phi", "identity", "identity, abs, square, clamp, positive"},
        {"mode", "plain", "plain, subsequence or mean-certain"},
        {"poly", "0,0,1", "subsequence polynomial coefficients a0,a1,..."},
        {"n_star", "16", "n_max for Gamma_*"},
        {"max_slope", "", "fail when the fitted slope exceeds this"}},
       {"model"},
       run_lln},
      {"slln",
       true,
       {{"preset", "one-dependent", "sequential preset (or a [model] section)"},
        {"horizon", "65536", "trajectory length N"},
        {"trials", "10", "trials per measure"},
        {"n_star", "16", "n_max for Gamma_*"},
        {"tol", "0.1", "bound on the final envelope"},
        {"bracket_slack", "0.1", "slack on the mean bracket"}},
       {"model"},
       run_slln},
      {"gnormal",
       false,
       {{"sigma_low", "1", "lower variance"},
        {"sigma_high", "4", "upper variance"},
        {"phi", "square", "identity, abs, square, clamp, positive"},
        {"steps", "100", "lattice steps"}},
       {},
       run_gnormal},
      {"gbm",
       true,
       {{"sigma_low", "1", "lower variance"},
        {"sigma_high", "4", "upper variance"},
        {"policy", "constant", "constant or bang-bang"},
        {"q", "2", "control for the constant policy"},
        {"dt", "0.01", "time step"},
        {"horizon_time", "1", "final time"},
        {"paths", "200", "number of paths"}},
       {},
       run_gbm},
      {"gsde",
       true,
       {{"preset", "gou", "G-SDE preset (or a [gsde] section)"},
        {"x", "1", "first start point"},
        {"y", "-1", "second start point"},
        {"t", "0.5,1,2", "time grid"},
        {"dt", "0.01", "Euler step"},
        {"paths", "2000", "paths per policy"},
        {"phi", "identity", "identity, abs, square, clamp, positive"},
        {"tol", "0.05", "pullback Cauchy tolerance"}},
       {"gsde"},
       run_gsde},
      {"ergodic",
       false,
       {{"preset", "exA-block", "exA-block or rotation-golden"},
        {"n", "1024", "checkpoints"},
        {"points", "64", "start points for the rotation"},
        {"min_oscillation", "0.1", "symbolic points: required spread of the averages"}},
       {"observable"},
       run_ergodic},
      {"mixing",
       false,
       {{"preset", "one-dependent", "sequential preset (or a [model] section)"},
        {"block", "2", "block length of both index sets"},
        {"gaps", "1,2,3,4", "gaps to probe"},
        {"phi", "clamp-product", "clamp-product, abs-difference, sin-sum"}},
       {"model"},
       run_mixing},
  };
  return e;
}

const Experiment& find_experiment(const std::string& name) {
  for (const auto& e : experiments())
    if (e.name == name) return e;
  throw DomainError("unknown experiment '" + name + "'");
}

std::string timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int run(const std::string& name, const std::string& config_path, const std::map<std::string, std::string>& flags) {
  const Experiment& ex = find_experiment(name);
  Context c;
  std::map<std::string, std::string> eff;
  for (const auto& p : ex.params) eff[p.key] = p.def;
  eff["seed"] = "";
  eff["out"] = "";
  if (!config_path.empty()) {
    c.doc = text::Document::parse_file(config_path);
    c.doc.allow(ex.sections);
    for (const auto& e : c.doc.root().entries) {
      if (e.key == "experiment") {
        if (e.value != name) throw ParseError("config is for experiment '" + e.value + "'", e.line);
        continue;
      }
      if (!eff.count(e.key)) throw ParseError("unknown key '" + e.key + "' for experiment " + name, e.line);
      eff[e.key] = e.value;
    }
    if (c.doc.find("model") || c.doc.find("gsde")) {
      bool preset_in_file = false;
      for (const auto& e : c.doc.root().entries) preset_in_file = preset_in_file || e.key == "preset";
      if (!preset_in_file && !flags.count("preset")) eff["preset"] = "";
    }
  }
  if (const char* env = std::getenv("SUBLINERGO_OUT"); env && *env) eff["out"] = env;
  for (const auto& [k, v] : flags) {
    if (!eff.count(k)) throw DomainError("option --" + dashed(k) + " does not apply to experiment " + name);
    eff[k] = v;
  }
  if (ex.stochastic && eff["seed"].empty()) throw DomainError("experiment " + name + " needs --seed");
  if (eff["out"].empty()) eff["out"] = "sublinergo-out/" + name;

  for (const auto& [k, v] : eff) c.cfg.entries.push_back({k, v, 0});
  if (!eff["seed"].empty()) (void)c.cfg.uint("seed");

  // config hash over everything that shapes the results
  std::string canon = "experiment=" + name + "\n";
  for (const auto& [k, v] : eff)
    if (k != "out") canon += k + "=" + v + "\n";
  for (std::size_t i = 1; i < c.doc.sections.size(); ++i) {
    const auto& s = c.doc.sections[i];
    canon += "[" + s.name + " " + s.label + "]\n";
    for (const auto& e : s.entries) canon += e.key + "=" + e.value + "\n";
  }

  ex.run(c);

  const fs::path out = eff["out"];
  fs::create_directories(out);
  nlohmann::ordered_json files = nlohmann::ordered_json::object();
  std::uint64_t all = 0xcbf29ce484222325ULL;
  for (const auto& [fname, content] : c.outputs) {
    std::ofstream(out / fname, std::ios::binary) << content;
    const auto h = fnv1a(content);
    files[fname] = hex(h);
    all = fnv1a(fname + '\0' + hex(h) + '\n', all);
  }
  bool ok = true;
  std::ostringstream sum;
  sum << "experiment: " << name << "\nversion: " << kVersion << "\n\n[config]\n";
  for (const auto& [k, v] : eff) sum << k << " = " << v << '\n';
  sum << "\n[results]\n";
  for (const auto& l : c.summary) sum << l << '\n';
  sum << "\n[checks]\n";
  for (const auto& ch : c.checks) {
    sum << (ch.pass ? "PASS " : "FAIL ") << ch.name << ": " << ch.detail << '\n';
    ok = ok && ch.pass;
  }
  std::ofstream(out / "summary.txt") << sum.str();

  nlohmann::ordered_json man;
  man["version"] = kVersion;
  man["experiment"] = name;
  man["seed"] = eff["seed"].empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(c.seed());
  man["config_hash"] = hex(fnv1a(canon));
  man["outputs"] = files;
  man["outputs_hash"] = hex(all);
  man["timestamp"] = timestamp();
  std::ofstream(out / "manifest.json") << man.dump(2) << '\n';

  for (const auto& ch : c.checks)
    std::cerr << (ch.pass ? "PASS " : "FAIL ") << ch.name << ": " << ch.detail << '\n';
  std::cerr << "wrote " << out.string() << '\n';
  return ok ? 0 : 2;
}

int report(const std::string& dir) {
  const fs::path p = fs::path(dir) / "manifest.json";
  std::ifstream in(p);
  if (!in) throw DomainError("no manifest.json in '" + dir + "'");
  const auto man = nlohmann::json::parse(in);
  std::uint64_t all = 0xcbf29ce484222325ULL;
  bool ok = true;
  std::cout << "experiment " << man.at("experiment").get<std::string>() << ", version "
            << man.at("version").get<std::string>() << ", config " << man.at("config_hash").get<std::string>()
            << '\n';
  for (const auto& [fname, h] : man.at("outputs").items()) {
    std::ifstream f(fs::path(dir) / fname, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    const std::string now = f ? hex(fnv1a(ss.str())) : "missing";
    const bool same = now == h.get<std::string>();
    ok = ok && same;
    all = fnv1a(fname + '\0' + h.get<std::string>() + '\n', all);
    std::cout << (same ? "ok       " : "CHANGED  ") << fname << ' ' << now << '\n';
  }
  if (hex(all) != man.at("outputs_hash").get<std::string>()) {
    std::cout << "outputs_hash does not match the file list\n";
    ok = false;
  }
  std::ifstream s(fs::path(dir) / "summary.txt");
  for (std::string line; std::getline(s, line);)
    if (line.rfind("FAIL ", 0) == 0) {
      std::cout << line << '\n';
      ok = false;
    }
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sublinear expectation experiments"};
  app.require_subcommand(1);
  auto* pre = app.add_subcommand("presets", "list model presets");
  auto* rn = app.add_subcommand("run", "run one experiment");
  auto* rep = app.add_subcommand("report", "verify an output directory against its manifest");

  std::string exp, config, report_dir;
  unsigned jobs = 0;
  rn->add_option("experiment", exp, "lln, slln, gnormal, gbm, gsde, ergodic, mixing")->required();
  rn->add_option("--config", config, "plain-text config file");
  rn->add_option("--jobs", jobs, "worker threads");
  std::map<std::string, std::string> raw;
  std::map<std::string, std::pair<std::string, std::string>> keys{
      {"seed", {"RNG seed", ""}}, {"out", {"output directory", ""}}};
  for (const auto& e : experiments()) {
    if (e.stochastic) {
      auto& used = keys["seed"].second;
      used += (used.empty() ? "" : ", ") + e.name;
    }
    for (const auto& p : e.params) {
      auto& [help, used] = keys[p.key];
      if (help.find(p.help) == std::string::npos) help += (help.empty() ? "" : "; ") + p.help;
      used += (used.empty() ? "" : ", ") + e.name;
    }
  }
  for (const auto& [k, h] : keys)
    rn->add_option("--" + dashed(k), raw[k], h.second.empty() ? h.first : h.first + " [" + h.second + "]");
  rep->add_option("--out", report_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*pre) {
      for (const auto& p : presets::catalog()) std::cout << std::left << std::setw(16) << p.id << p.summary << '\n';
      return 0;
    }
    if (*rep) return report(report_dir);
    if (jobs > 0) max_jobs() = jobs;
    std::map<std::string, std::string> flags;
    for (const auto& [k, h] : keys)
      if (rn->count("--" + dashed(k)) > 0) flags[k] = raw[k];
    return run(exp, config, flags);
  } catch (const ParseError& e) {
    std::cerr << "error: " << (config.empty() ? "" : config + ": ") << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
