#include "spec_file.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <set>
#include <sstream>

#include "nilcube/linear.hpp"

namespace nilcube::cli {

std::string ParseError::diagnostic() const {
  std::ostringstream os;
  os << file_ << ':' << line_ << ':' << column_ << ": error: " << what();
  return os.str();
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

}  // namespace

IniDocument parse_ini(const std::string& text, const std::string& file, const std::vector<std::string>& data_sections) {
  IniDocument doc;
  doc.file = file;
  doc.sections.push_back(IniSection{"", 1, {}, {}});
  auto fail = [&](int line, int col, const std::string& what) -> void { throw ParseError(file, line, col, what); };
  auto takes_data = [&](const std::string& name) {
    return std::any_of(data_sections.begin(), data_sections.end(),
                       [&](const std::string& p) { return name.rfind(p, 0) == 0; });
  };

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw.substr(0, raw.find('#'));
    std::size_t b = 0;
    while (b < line.size() && is_space(line[b])) ++b;
    std::size_t e = line.size();
    while (e > b && is_space(line[e - 1])) --e;
    if (b == e) continue;
    const int col = static_cast<int>(b) + 1;
    std::string body = line.substr(b, e - b);
    if (body.front() == '[') {
      if (body.back() != ']') fail(lineno, col + static_cast<int>(body.size()) - 1, "section header must end with ']'");
      std::string name = body.substr(1, body.size() - 2);
      std::size_t nb = 0, ne = name.size();
      while (nb < ne && is_space(name[nb])) ++nb;
      while (ne > nb && is_space(name[ne - 1])) --ne;
      name = name.substr(nb, ne - nb);
      if (name.empty()) fail(lineno, col, "empty section name");
      for (const auto& s : doc.sections)
        if (s.name == name) fail(lineno, col, "section [" + name + "] appears twice (first on line " + std::to_string(s.line) + ")");
      doc.sections.push_back(IniSection{name, lineno, {}, {}});
      continue;
    }
    IniSection& sec = doc.sections.back();
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      if (!takes_data(sec.name)) fail(lineno, col, "expected 'key = value'");
      sec.data.push_back(IniLine{body, lineno, col});
      continue;
    }
    std::string key = body.substr(0, eq);
    while (!key.empty() && is_space(key.back())) key.pop_back();
    if (key.empty()) fail(lineno, col, "missing key before '='");
    for (char c : key)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
        fail(lineno, col, "invalid character in key '" + key + "'");
    std::size_t vb = eq + 1;
    while (vb < body.size() && is_space(body[vb])) ++vb;
    for (const auto& prev : sec.entries)
      if (prev.key == key) fail(lineno, col, "key '" + key + "' repeated (first on line " + std::to_string(prev.line) + ")");
    sec.entries.push_back(IniEntry{key, body.substr(vb), lineno, col, col + static_cast<int>(vb)});
  }
  if (doc.sections.size() == 1 && doc.sections[0].entries.empty() && doc.sections[0].data.empty())
    fail(1, 1, "empty specification");
  return doc;
}

Caps caps_from_env(const char* value, Caps base) {
  if (!value) return base;
  std::string s(value);
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::Parse, "NILCUBE_CAPS: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
    std::uint64_t v = 0;
    try {
      std::size_t used = 0;
      v = std::stoull(val, &used);
      if (used != val.size() || v == 0) throw std::invalid_argument(val);
    } catch (const std::exception&) {
      throw Error(ErrorKind::Parse, "NILCUBE_CAPS: '" + key + "' needs a positive integer");
    }
    if (key == "max_dim")
      base.max_dim = static_cast<int>(std::min<std::uint64_t>(v, kHardMaxDim));
    else if (key == "max_points")
      base.max_points = v;
    else if (key == "cube_cap")
      base.cube_cap = v;
    else if (key == "node_budget")
      base.node_budget = v;
    else
      throw Error(ErrorKind::Parse, "NILCUBE_CAPS: unknown cap '" + key + "'");
  }
  return base;
}

namespace {

class SpecReader {
 public:
  explicit SpecReader(const IniDocument& doc) : doc_(doc) {}

  [[noreturn]] void fail(int line, int col, const std::string& what) const { throw ParseError(doc_.file, line, col, what); }
  [[noreturn]] void fail(const IniEntry& e, const std::string& what) const { fail(e.line, e.value_column, what); }

  const IniSection* section(const std::string& name) const {
    for (const auto& s : doc_.sections)
      if (s.name == name) return &s;
    return nullptr;
  }
  static const IniEntry* entry(const IniSection& s, const std::string& key) {
    for (const auto& e : s.entries)
      if (e.key == key) return &e;
    return nullptr;
  }
  const IniEntry& require(const IniSection& s, const std::string& key) const {
    if (auto e = entry(s, key)) return *e;
    fail(s.line, 1, "section [" + s.name + "] needs '" + key + "'");
  }
  void allow_only(const IniSection& s, const std::set<std::string>& keys) const {
    for (const auto& e : s.entries)
      if (!keys.count(e.key)) fail(e.line, e.key_column, "unknown key '" + e.key + "' in [" + s.name + "]");
  }

  // Integer tokens separated by commas and/or blanks, with their columns.
  std::vector<std::pair<std::int64_t, int>> integers(const std::string& text, int line, int col0) const {
    std::vector<std::pair<std::int64_t, int>> out;
    std::size_t i = 0;
    while (i < text.size()) {
      if (is_space(text[i]) || text[i] == ',') {
        ++i;
        continue;
      }
      std::size_t j = i;
      if (text[j] == '-' || text[j] == '+') ++j;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      const int col = col0 + static_cast<int>(i);
      if (j == i || (j == i + 1 && !std::isdigit(static_cast<unsigned char>(text[i]))))
        fail(line, col, "expected an integer");
      if (j < text.size() && !is_space(text[j]) && text[j] != ',') fail(line, col0 + static_cast<int>(j), "unexpected character '" + std::string(1, text[j]) + "'");
      try {
        out.push_back({std::stoll(text.substr(i, j - i)), col});
      } catch (const std::out_of_range&) {
        fail(line, col, "integer out of range");
      }
      i = j;
    }
    return out;
  }
  std::int64_t integer(const IniEntry& e, std::int64_t lo, std::int64_t hi) const {
    auto v = integers(e.value, e.line, e.value_column);
    if (v.size() != 1) fail(e, "'" + e.key + "' needs exactly one integer");
    if (v[0].first < lo || v[0].first > hi)
      fail(e.line, v[0].second, "'" + e.key + "' must lie in " + std::to_string(lo) + ".." + std::to_string(hi));
    return v[0].first;
  }
  std::vector<std::int64_t> moduli(const IniEntry& e) const {
    auto v = integers(e.value, e.line, e.value_column);
    if (v.empty()) fail(e, "'" + e.key + "' needs at least one modulus");
    std::vector<std::int64_t> out;
    for (auto [m, col] : v) {
      if (m < 2 || m > 1000) fail(e.line, col, "moduli must lie in 2..1000");
      out.push_back(m);
    }
    return out;
  }
  // "(a,b,c) (d,e,f)" with a fixed arity
  std::vector<std::vector<std::int64_t>> tuples(const IniEntry& e, std::size_t arity) const {
    std::vector<std::vector<std::int64_t>> out;
    const std::string& t = e.value;
    std::size_t i = 0;
    while (i < t.size()) {
      if (is_space(t[i]) || t[i] == ',' || t[i] == ';') {
        ++i;
        continue;
      }
      const int col = e.value_column + static_cast<int>(i);
      if (t[i] != '(') fail(e.line, col, "expected '(' to start a tuple");
      const auto close = t.find(')', i);
      if (close == std::string::npos) fail(e.line, col, "unclosed tuple");
      auto v = integers(t.substr(i + 1, close - i - 1), e.line, col + 1);
      if (v.size() != arity) fail(e.line, col, "tuple needs " + std::to_string(arity) + " coordinates");
      std::vector<std::int64_t> tup;
      for (auto [x, c] : v) tup.push_back(x);
      out.push_back(std::move(tup));
      i = close + 1;
    }
    return out;
  }

 private:
  const IniDocument& doc_;
};

}  // namespace

SpaceSpec parse_space_spec(const std::string& text, const std::string& file, const Caps& defaults) {
  IniDocument doc = parse_ini(text, file, {"cubes"});
  SpecReader rd(doc);
  SpaceSpec spec;
  spec.caps = defaults;

  const IniSection& top = doc.sections.front();
  if (!top.entries.empty()) rd.fail(top.entries.front().line, 1, "entry outside of any section");
  for (const auto& s : doc.sections) {
    if (s.name.empty()) continue;
    if (s.name != "space" && s.name != "caps" && s.name != "filtration" && s.name.rfind("cubes", 0) != 0)
      rd.fail(s.line, 1, "unknown section [" + s.name + "]");
  }
  const IniSection* space = rd.section("space");
  if (!space) rd.fail(1, 1, "missing [space] section");

  const IniEntry& kind = rd.require(*space, "kind");
  spec.kind = kind.value;
  if (auto n = SpecReader::entry(*space, "name")) spec.name = n->value;

  if (spec.kind == "dk") {
    rd.allow_only(*space, {"kind", "name", "moduli", "degree"});
    spec.moduli = rd.moduli(rd.require(*space, "moduli"));
    spec.degree = static_cast<int>(rd.integer(rd.require(*space, "degree"), 1, 8));
  } else if (spec.kind == "heisenberg-nilmanifold") {
    rd.allow_only(*space, {"kind", "name", "modulus", "lattice", "degree"});
    spec.modulus = rd.integer(rd.require(*space, "modulus"), 2, 12);
    if (auto d = SpecReader::entry(*space, "degree")) rd.integer(*d, 2, 2);
    spec.degree = 2;
    if (auto l = SpecReader::entry(*space, "lattice")) spec.lattice = rd.tuples(*l, 3);
  } else if (spec.kind == "abelian-nilmanifold") {
    rd.allow_only(*space, {"kind", "name", "moduli", "degree", "lattice"});
    spec.moduli = rd.moduli(rd.require(*space, "moduli"));
    spec.degree = static_cast<int>(rd.integer(rd.require(*space, "degree"), 1, 8));
    if (auto l = SpecReader::entry(*space, "lattice")) spec.lattice = rd.tuples(*l, spec.moduli.size());
    spec.levels.assign(static_cast<std::size_t>(*spec.degree - 1), std::nullopt);
    if (const IniSection* filt = rd.section("filtration")) {
      for (const auto& e : filt->entries) {
        int i = 0;
        if (e.key.size() > 5 && e.key.rfind("level", 0) == 0 &&
            std::all_of(e.key.begin() + 5, e.key.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
          i = std::stoi(e.key.substr(5));
        if (i < 2 || i > *spec.degree)
          rd.fail(e.line, e.key_column, "filtration keys are level2..level" + std::to_string(*spec.degree));
        spec.levels[i - 2] = rd.tuples(e, spec.moduli.size());
      }
    }
  } else if (spec.kind == "table") {
    rd.allow_only(*space, {"kind", "name", "points", "degree"});
    spec.points = static_cast<std::size_t>(rd.integer(rd.require(*space, "points"), 1, 4096));
    if (auto d = SpecReader::entry(*space, "degree")) spec.degree = static_cast<int>(rd.integer(*d, 0, 8));
    int top_dim = 0;
    std::vector<const IniSection*> by_dim(kHardMaxDim + 1, nullptr);
    for (const auto& s : doc.sections) {
      if (s.name.rfind("cubes", 0) != 0) continue;
      if (!s.entries.empty()) rd.fail(s.entries.front().line, s.entries.front().key_column, "cube sections hold data lines only");
      int n = 0;
      try {
        std::size_t used = 0;
        std::string rest = s.name.substr(5);
        while (!rest.empty() && is_space(rest.front())) rest.erase(rest.begin());
        n = std::stoi(rest, &used);
        if (used != rest.size()) n = 0;
      } catch (const std::exception&) {
        n = 0;
      }
      if (n < 1 || n > 8) rd.fail(s.line, 1, "cube sections are named [cubes N] with 1 <= N <= 8");
      by_dim[n] = &s;
      top_dim = std::max(top_dim, n);
    }
    spec.cubes.assign(static_cast<std::size_t>(top_dim) + 1, {});
    for (int n = 1; n <= top_dim; ++n) {
      if (!by_dim[n]) continue;
      for (const auto& d : by_dim[n]->data) {
        auto v = rd.integers(d.text, d.line, d.column);
        if (v.size() != vertex_count(n))
          rd.fail(d.line, d.column, "a " + std::to_string(n) + "-cube lists " + std::to_string(vertex_count(n)) + " points");
        Configuration c = Configuration::constant(n, 0);
        for (Vertex u = 0; u < c.size(); ++u) {
          if (v[u].first < 0 || static_cast<std::size_t>(v[u].first) >= spec.points)
            rd.fail(d.line, v[u].second, "point out of range 0.." + std::to_string(spec.points - 1));
          c[u] = static_cast<Point>(v[u].first);
        }
        spec.cubes[n].push_back(c);
      }
    }
  } else {
    rd.fail(kind, "unknown kind '" + kind.value + "' (expected dk, heisenberg-nilmanifold, abelian-nilmanifold or table)");
  }

  if (const IniSection* caps = rd.section("caps")) {
    rd.allow_only(*caps, {"max_dim", "max_points", "cube_cap", "node_budget"});
    const auto big = std::numeric_limits<std::int64_t>::max();
    if (auto e = SpecReader::entry(*caps, "max_dim")) spec.caps.max_dim = static_cast<int>(rd.integer(*e, 1, kHardMaxDim));
    if (auto e = SpecReader::entry(*caps, "max_points")) spec.caps.max_points = rd.integer(*e, 1, big);
    if (auto e = SpecReader::entry(*caps, "cube_cap")) spec.caps.cube_cap = rd.integer(*e, 1, big);
    if (auto e = SpecReader::entry(*caps, "node_budget")) spec.caps.node_budget = rd.integer(*e, 1, big);
  }
  if (spec.kind == "table" && spec.cubes.size() > 1)
    spec.caps.max_dim = std::min<int>(spec.caps.max_dim, static_cast<int>(spec.cubes.size()) - 1);
  if (spec.name.empty()) spec.name = spec.kind;
  return spec;
}

namespace {

// Rebuilds `inner` with the spec's caps, keeping its membership oracle.
CubeSpacePtr with_caps(const CubeSpacePtr& inner, const SpaceSpec& spec, std::optional<int> degree) {
  SpaceOptions opts;
  opts.max_dim = spec.caps.max_dim;
  opts.degree = degree;
  opts.cube_cap = spec.caps.cube_cap;
  return make_space(spec.name, inner->size(), [inner](const Configuration& c) { return inner->oracle(c); }, opts);
}

std::vector<Elem> lattice_elements(const FiniteGroup& g, const std::vector<std::vector<std::int64_t>>& gens) {
  std::vector<Elem> ids;
  for (auto c : gens) {
    const auto m = g.kind() == FiniteGroup::Kind::Heisenberg ? std::vector<std::int64_t>(3, g.heisenberg_modulus())
                                                              : g.moduli();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = mod(c[i], m[i]);
    ids.push_back(g.from_coords(c));
  }
  return generate_subgroup(g, ids);
}

}  // namespace

BuiltSpace build_space(const SpaceSpec& spec) {
  BuiltSpace out;
  const int max_dim = spec.caps.max_dim;
  if (spec.kind == "dk") {
    out.space = with_caps(dk_space(spec.moduli, *spec.degree, max_dim), spec, spec.degree);
  } else if (spec.kind == "heisenberg-nilmanifold" || spec.kind == "abelian-nilmanifold") {
    std::optional<Filtration> f;
    if (spec.kind == "heisenberg-nilmanifold") {
      f = make_heisenberg(spec.modulus);
    } else {
      const FiniteGroup g = FiniteGroup::abelian(spec.moduli);
      std::vector<Elem> all(g.order());
      for (Elem a = 0; a < g.order(); ++a) all[a] = a;
      std::vector<std::vector<Elem>> levels{all, all};
      for (const auto& gens : spec.levels) levels.push_back(gens ? lattice_elements(g, *gens) : all);
      f.emplace(g, levels);
    }
    NilmanifoldSpace nm = nilmanifold_space(*f, lattice_elements(f->group(), spec.lattice), max_dim);
    out.space = with_caps(nm.space, spec, nm.space->degree());
    nm.space = out.space;
    out.nilmanifold = std::move(nm);
  } else {
    std::vector<std::vector<Configuration>> lists = spec.cubes;
    lists.resize(static_cast<std::size_t>(max_dim) + 1);
    SpaceOptions opts;
    opts.max_dim = max_dim;
    opts.degree = spec.degree;
    opts.cube_cap = spec.caps.cube_cap;
    out.space = table_space(spec.name, spec.points, lists, opts);
  }
  return out;
}

}  // namespace nilcube::cli
