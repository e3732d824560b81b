// Plain-text structured format shared by models, scenario sets, G-SDE
// coefficients, ergodic observables/candidates and experiment configs.
//
//   # comment
//   key = value
//   [section]          or   [section label]
//   key = 1, 2, 3      lists are comma separated
//   key = 1, 0 ; 0, 1  matrices are ';'-separated rows
//
// Keys before the first section belong to the root section (name "").
#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "ergodic.hpp"
#include "gsde.hpp"
#include "scenario.hpp"
#include "sequential.hpp"

namespace sublinergo::text {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto p = s.find(sep, start);
    out.push_back(trim(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start)));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

inline double to_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty()) throw ParseError("not a number: '" + s + "'", line);
  return v;
}

inline std::uint64_t to_uint(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty()) throw ParseError("not a nonnegative integer: '" + s + "'", line);
  return v;
}

struct Entry {
  std::string key, value;
  std::size_t line = 0;
};

struct Section {
  std::string name, label;
  std::size_t line = 0;
  std::vector<Entry> entries;

  std::vector<const Entry*> all(const std::string& key) const {
    std::vector<const Entry*> out;
    for (const auto& e : entries)
      if (e.key == key) out.push_back(&e);
    return out;
  }

  const Entry* find(const std::string& key) const {
    const auto v = all(key);
    if (v.size() > 1) throw ParseError("duplicate key '" + key + "'", v[1]->line);
    return v.empty() ? nullptr : v[0];
  }

  bool has(const std::string& key) const { return find(key) != nullptr; }

  const Entry& require(const std::string& key) const {
    if (const Entry* e = find(key)) return *e;
    throw ParseError("missing key '" + key + "' in [" + name + "]", line);
  }

  /// Rejects keys outside `known`.
  void allow(std::initializer_list<std::string_view> known) const {
    for (const auto& e : entries)
      if (std::find(known.begin(), known.end(), e.key) == known.end())
        throw ParseError("unknown key '" + e.key + "'" + (name.empty() ? "" : " in [" + name + "]"), e.line);
  }

  std::string str(const std::string& key, std::string def) const {
    const Entry* e = find(key);
    return e ? e->value : def;
  }
  std::string str(const std::string& key) const { return require(key).value; }

  double num(const std::string& key) const {
    const auto& e = require(key);
    return to_double(e.value, e.line);
  }
  double num(const std::string& key, double def) const { return has(key) ? num(key) : def; }

  std::uint64_t uint(const std::string& key) const {
    const auto& e = require(key);
    return to_uint(e.value, e.line);
  }
  std::uint64_t uint(const std::string& key, std::uint64_t def) const { return has(key) ? uint(key) : def; }

  static std::vector<double> list_of(const Entry& e) {
    std::vector<double> v;
    for (const auto& s : split(e.value, ',')) v.push_back(to_double(s, e.line));
    return v;
  }
  std::vector<double> list(const std::string& key) const { return list_of(require(key)); }

  static std::vector<std::size_t> uint_list_of(const Entry& e) {
    std::vector<std::size_t> v;
    for (const auto& s : split(e.value, ',')) v.push_back(static_cast<std::size_t>(to_uint(s, e.line)));
    return v;
  }
  std::vector<std::size_t> uint_list(const std::string& key) const { return uint_list_of(require(key)); }

  std::vector<std::vector<double>> matrix(const std::string& key) const {
    const auto& e = require(key);
    std::vector<std::vector<double>> rows;
    for (const auto& r : split(e.value, ';')) rows.push_back(list_of(Entry{key, r, e.line}));
    return rows;
  }

  void set(const std::string& key, std::string value) {
    for (auto& e : entries)
      if (e.key == key) {
        e.value = std::move(value);
        return;
      }
    entries.push_back({key, std::move(value), 0});
  }
};

struct Document {
  std::vector<Section> sections;  // sections[0] is the root

  static Document parse(std::istream& in) {
    Document d;
    d.sections.push_back({"", "", 1, {}});
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
      ++line;
      if (const auto h = raw.find('#'); h != std::string::npos) raw.resize(h);
      const std::string s = trim(raw);
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') throw ParseError("unterminated section header", line);
        const auto parts = split(trim(std::string_view(s).substr(1, s.size() - 2)), ' ');
        std::vector<std::string> words;
        for (const auto& p : parts)
          if (!p.empty()) words.push_back(p);
        if (words.empty() || words.size() > 2) throw ParseError("section header needs a name and optional label", line);
        d.sections.push_back({words[0], words.size() == 2 ? words[1] : "", line, {}});
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ParseError("expected 'key = value'", line);
      Entry e{trim(std::string_view(s).substr(0, eq)), trim(std::string_view(s).substr(eq + 1)), line};
      if (e.key.empty()) throw ParseError("empty key", line);
      if (e.value.empty()) throw ParseError("empty value for '" + e.key + "'", line);
      d.sections.back().entries.push_back(std::move(e));
    }
    return d;
  }

  static Document parse_string(const std::string& s) {
    std::istringstream in(s);
    return parse(in);
  }

  static Document parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'", 0);
    return parse(in);
  }

  Section& root() { return sections.front(); }
  const Section& root() const { return sections.front(); }

  std::vector<const Section*> all(const std::string& name) const {
    std::vector<const Section*> out;
    for (std::size_t i = 1; i < sections.size(); ++i)
      if (sections[i].name == name) out.push_back(&sections[i]);
    return out;
  }

  const Section* find(const std::string& name) const {
    const auto v = all(name);
    if (v.size() > 1) throw ParseError("duplicate section [" + name + "]", v[1]->line);
    return v.empty() ? nullptr : v[0];
  }

  /// Rejects sections outside `known`.
  void allow(std::initializer_list<std::string_view> known) const {
    allow(std::vector<std::string_view>(known));
  }
  void allow(const std::vector<std::string_view>& known) const {
    for (std::size_t i = 1; i < sections.size(); ++i)
      if (std::find(known.begin(), known.end(), sections[i].name) == known.end())
        throw ParseError("unknown section [" + sections[i].name + "]", sections[i].line);
  }
};

// ---------------------------------------------------------------------------
// Writers

inline std::string fmt(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

inline std::string join(const std::vector<double>& v, const char* sep = ", ") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + fmt(v[i]);
  return s;
}

inline std::string join_rows(const std::vector<std::vector<double>>& rows) {
  std::string s;
  for (std::size_t i = 0; i < rows.size(); ++i) s += (i ? " ; " : "") + join(rows[i]);
  return s;
}

// ---------------------------------------------------------------------------
// Sequential models
//
//   [model]
//   step = custom | maximal | g_normal
//   atoms = ...            weights = row ; row      (custom)
//   lo = ..  hi = ..  interior = ..                  (maximal, g_normal)
//   horizon = N
//   window = w_0, ..., w_lag                         (moving sum; default 1)
//   or lag = L, dim = D, table = ...                 (value per window of atoms,
//                                                    lexicographic, first atom most significant)

inline SequentialModel read_model(const Section& s) {
  s.allow({"step", "atoms", "weights", "lo", "hi", "interior", "horizon", "window", "lag", "dim", "table"});
  const std::string kind = s.str("step", "custom");
  const auto make_step = [&] {
    if (kind == "custom") return StepLaw::custom(s.list("atoms"), s.matrix("weights"));
    if (kind == "maximal") return StepLaw::maximal(s.num("lo"), s.num("hi"), static_cast<int>(s.uint("interior", 33)));
    if (kind == "g_normal") return StepLaw::g_normal(s.num("lo"), s.num("hi"));
    throw ParseError("unknown step law '" + kind + "'", s.require("step").line);
  };
  const std::size_t horizon = s.uint("horizon");
  try {
    StepLaw step = make_step();
    if (s.has("table")) {
      if (s.has("window")) throw ParseError("give either 'window' or 'table', not both", s.require("table").line);
      const std::size_t lag = s.uint("lag", 0), dim = s.uint("dim", 1);
      std::vector<double> table = s.list("table");
      const std::size_t a = step.finite().n_atoms();
      std::size_t cells = 1;
      for (std::size_t j = 0; j <= lag; ++j) cells *= a;
      if (table.size() != cells * dim)
        throw ParseError("table needs " + std::to_string(cells * dim) + " values", s.require("table").line);
      const auto atoms = step.finite().atoms;
      return SequentialModel(std::move(step), horizon, lag, dim,
                             [table, atoms, dim](std::span<const double> w, std::span<double> out) {
                               std::size_t code = 0;
                               for (double v : w) {
                                 const auto it = std::find(atoms.begin(), atoms.end(), v);
                                 code = code * atoms.size() + static_cast<std::size_t>(it - atoms.begin());
                               }
                               for (std::size_t i = 0; i < dim; ++i) out[i] = table[code * dim + i];
                             });
    }
    return SequentialModel::moving_sum(std::move(step), horizon, s.has("window") ? s.list("window") : std::vector{1.0});
  } catch (const DomainError& e) {
    throw ParseError(e.what(), s.line);
  }
}

inline void write_model(std::ostream& os, const SequentialModel& m, const std::string& label = "") {
  os << "[model" << (label.empty() ? "" : " " + label) << "]\n";
  const auto& st = m.step();
  switch (st.kind()) {
    case StepLaw::Kind::maximal:
      os << "step = maximal\nlo = " << fmt(st.lo()) << "\nhi = " << fmt(st.hi())
         << "\ninterior = " << (st.controls().size() - 2) << '\n';
      break;
    case StepLaw::Kind::g_normal:
      os << "step = g_normal\nlo = " << fmt(st.lo()) << "\nhi = " << fmt(st.hi()) << '\n';
      break;
    case StepLaw::Kind::custom:
      os << "step = custom\natoms = " << join(m.finite().atoms) << "\nweights = " << join_rows(m.finite().weights)
         << '\n';
      break;
  }
  os << "horizon = " << m.horizon() << '\n';
  if (m.linear_weights()) {
    os << "window = " << join(*m.linear_weights()) << '\n';
  } else {
    os << "lag = " << m.lag() << "\ndim = " << m.dim() << "\ntable = " << join(m.table()) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Scenario sets
//
//   [scenario]
//   atoms = a, b, c        labels (or: points = n)
//   measure = w...         one line per measure
//   [vector X]
//   dim = 1
//   values = ...           row-major, dim values per atom

struct ScenarioDoc {
  ScenarioSet set;
  std::vector<std::pair<std::string, RandomVector>> vectors;

  const RandomVector& vector(const std::string& name) const {
    for (const auto& [n, v] : vectors)
      if (n == name) return v;
    throw DomainError("no random vector named '" + name + "'");
  }
};

inline ScenarioDoc read_scenario(const Document& d) {
  const Section* s = d.find("scenario");
  if (!s) throw ParseError("missing [scenario] section", 1);
  s->allow({"atoms", "points", "measure"});
  SpacePtr space;
  try {
    if (s->has("atoms")) {
      space = std::make_shared<const SampleSpace>(split(s->str("atoms"), ','));
    } else {
      space = SampleSpace::indexed(s->uint("points"));
    }
  } catch (const DomainError& e) {
    throw ParseError(e.what(), s->line);
  }
  std::vector<DiscreteMeasure> ms;
  for (const Entry* e : s->all("measure")) {
    try {
      auto w = Section::list_of(*e);
      if (w.size() != space->size()) throw DomainError("measure needs one weight per atom");
      ms.emplace_back(std::move(w));
    } catch (const DomainError& err) {
      throw ParseError(err.what(), e->line);
    }
  }
  if (ms.empty()) throw ParseError("scenario set needs at least one measure", s->line);
  ScenarioDoc out{ScenarioSet(space, std::move(ms)), {}};
  for (const Section* v : d.all("vector")) {
    v->allow({"dim", "values"});
    if (v->label.empty()) throw ParseError("[vector] needs a name", v->line);
    try {
      out.vectors.emplace_back(v->label, RandomVector(space, v->uint("dim", 1), v->list("values")));
    } catch (const DomainError& e) {
      throw ParseError(e.what(), v->line);
    }
  }
  return out;
}

inline void write_scenario(std::ostream& os, const ScenarioSet& s,
                           const std::vector<std::pair<std::string, RandomVector>>& vectors = {}) {
  os << "[scenario]\natoms = ";
  const auto& labels = s.space()->labels();
  for (std::size_t i = 0; i < labels.size(); ++i) os << (i ? ", " : "") << labels[i];
  os << '\n';
  for (const auto& m : s.measures()) os << "measure = " << join(m.weights()) << '\n';
  for (const auto& [name, v] : vectors)
    os << "[vector " << name << "]\ndim = " << v.dim() << "\nvalues = " << join(v.values()) << '\n';
}

// ---------------------------------------------------------------------------
// G-SDE coefficients
//
//   [gsde]
//   preset = gou | cubic | custom
//   a, sigma (gou); q_lo, q_hi
//   b_x, b_y, sigma_x, sigma_y, h_x, h_y, alpha (custom breakpoint tables)

inline GSDEModel read_gsde(const Section& s) {
  s.allow({"preset", "a", "sigma", "q_lo", "q_hi", "b_x", "b_y", "sigma_x", "sigma_y", "h_x", "h_y", "alpha"});
  const std::string p = s.str("preset", "gou");
  const double qlo = s.num("q_lo", 1.0), qhi = s.num("q_hi", 4.0);
  try {
    if (p == "gou") return gsde_presets::gou(s.num("a", 1.0), s.num("sigma", 1.0), qlo, qhi);
    if (p == "cubic") return gsde_presets::cubic(qlo, qhi);
    if (p == "custom") {
      std::vector<double> hx, hy;
      if (s.has("h_x")) {
        hx = s.list("h_x");
        hy = s.list("h_y");
      }
      auto m = gsde_presets::custom(s.list("b_x"), s.list("b_y"), s.list("sigma_x"), s.list("sigma_y"), hx, hy, qlo,
                                    qhi, s.num("alpha"));
      m.validate();
      return m;
    }
  } catch (const DomainError& e) {
    throw ParseError(e.what(), s.line);
  }
  throw ParseError("unknown G-SDE preset '" + p + "'", s.require("preset").line);
}

// ---------------------------------------------------------------------------
// Ergodic observables and candidate sets
//
//   [observable]  kind = zero_at_origin | constant | cylinder ; value = c ; word = 0110
//   [candidate]   kind = empty | zero_frequency | cylinder_first ; lo, hi ; bit

inline std::vector<std::uint8_t> read_word(const Entry& e) {
  std::vector<std::uint8_t> w;
  for (char c : e.value) {
    if (c != '0' && c != '1') throw ParseError("binary word expected, got '" + e.value + "'", e.line);
    w.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return w;
}

inline SymObservable read_observable(const Section& s) {
  s.allow({"kind", "value", "word"});
  const std::string k = s.str("kind");
  if (k == "zero_at_origin") return observables::zero_at_origin();
  if (k == "constant") return observables::constant(s.num("value"));
  if (k == "cylinder") return observables::cylinder(read_word(s.require("word")));
  throw ParseError("unknown observable kind '" + k + "'", s.require("kind").line);
}

inline CandidateSet read_candidate(const Section& s, std::size_t window) {
  s.allow({"kind", "lo", "hi", "bit"});
  const std::string k = s.str("kind");
  if (k == "empty") return candidates::empty();
  if (k == "zero_frequency") return candidates::zero_frequency(window, s.num("lo"), s.num("hi"));
  if (k == "cylinder_first") {
    const auto b = s.uint("bit");
    if (b > 1) throw ParseError("bit must be 0 or 1", s.require("bit").line);
    return candidates::cylinder_first(static_cast<std::uint8_t>(b));
  }
  throw ParseError("unknown candidate kind '" + k + "'", s.require("kind").line);
}

}  // namespace sublinergo::text
