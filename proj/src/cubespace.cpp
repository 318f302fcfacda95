#include "nilcube/cubespace.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "nilcube/translations.hpp"

namespace nilcube {

namespace {

std::uint64_t config_count(std::size_t points, int n) {
  unsigned __int128 acc = 1;
  for (std::size_t v = 0; v < vertex_count(n); ++v) {
    acc *= points;
    if (acc > (unsigned __int128)UINT64_MAX) return UINT64_MAX;
  }
  return static_cast<std::uint64_t>(acc);
}

std::vector<Point> all_points(std::size_t n) {
  std::vector<Point> out(n);
  std::iota(out.begin(), out.end(), Point{0});
  return out;
}

}  // namespace

CubeSpace::CubeSpace(std::string name, std::size_t points, Oracle oracle, SpaceOptions opts)
    : name_(std::move(name)), points_(points), oracle_(std::move(oracle)), opts_(opts) {
  if (points == 0) throw Error(ErrorKind::InvalidArgument, "a cubespace needs at least one point");
  if (opts.max_dim < 0 || opts.max_dim > kHardMaxDim)
    throw Error(ErrorKind::InvalidArgument, "max_dim out of range");
  levels_ = std::make_unique<Level[]>(static_cast<std::size_t>(opts.max_dim) + 1);
  for (int n = 0; n <= opts.max_dim; ++n) small_.push_back(config_count(points, n) <= opts.explicit_threshold);
}

void CubeSpace::check_dim(int n) const {
  if (n < 0 || n > opts_.max_dim) {
    std::ostringstream os;
    os << name_ << ": dimension " << n << " is above the cap " << opts_.max_dim;
    throw Error(ErrorKind::CapExceeded, os.str());
  }
}

bool CubeSpace::stores_explicitly(int n) const {
  check_dim(n);
  return small_[n] && !levels_[n].too_many.load();
}

bool CubeSpace::is_cube(const Configuration& c) const {
  check_dim(c.dim);
  for (Point x : c.values)
    if (x >= points_) return false;
  if (c.dim == 0) return true;
  // a list built on request is used even above the threshold
  if (levels_[c.dim].built.load()) {
    const auto& list = levels_[c.dim].cubes;
    return std::binary_search(list.begin(), list.end(), c);
  }
  if (stores_explicitly(c.dim)) {
    try {
      const auto& list = cubes(c.dim);
      return std::binary_search(list.begin(), list.end(), c);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::CapExceeded) throw;
      levels_[c.dim].too_many = true;
    }
  }
  return oracle_(c);
}

const std::vector<Configuration>& CubeSpace::cubes(int n) const {
  check_dim(n);
  Level& level = levels_[n];
  std::call_once(level.once, [&] {
    const auto pts = all_points(points_);
    std::vector<Configuration> out;
    ConfigSearch search;
    search.n = n;
    search.last = static_cast<Vertex>(vertex_count(n));
    search.candidates = [&](Vertex, const Configuration&) -> const std::vector<Point>& { return pts; };
    search.face_ok = [&](const Configuration& f) { return f.dim == n ? oracle_(f) : is_cube(f); };
    search.visit = [&](const Configuration& c) {
      if (out.size() >= opts_.cube_cap) {
        std::ostringstream os;
        os << name_ << ": more than " << opts_.cube_cap << " cubes of dimension " << n;
        throw Error(ErrorKind::CapExceeded, os.str());
      }
      out.push_back(c);
      return true;
    };
    search.run();
    level.cubes = std::move(out);
    level.built = true;
  });
  return level.cubes;
}

std::optional<std::size_t> CubeSpace::cube_id(const Configuration& c) const {
  const auto& list = cubes(c.dim);
  auto it = std::lower_bound(list.begin(), list.end(), c);
  if (it == list.end() || *it != c) return std::nullopt;
  return static_cast<std::size_t>(it - list.begin());
}

CubeSpacePtr make_space(std::string name, std::size_t points, CubeSpace::Oracle oracle, SpaceOptions opts) {
  return std::make_shared<const CubeSpace>(std::move(name), points, std::move(oracle), opts);
}

std::vector<std::vector<Vertex>> cube_symmetries(int n) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<Vertex>> out;
  do {
    for (Vertex r = 0; r < vertex_count(n); ++r) {
      std::vector<Vertex> map(vertex_count(n));
      for (Vertex v = 0; v < map.size(); ++v) {
        Vertex w = 0;
        for (int j = 0; j < n; ++j)
          if (v & (1u << j)) w |= 1u << perm[j];
        map[v] = w ^ r;
      }
      out.push_back(std::move(map));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

CubeSpacePtr table_space(std::string name, std::size_t points, const std::vector<std::vector<Configuration>>& cubes,
                         SpaceOptions opts) {
  if (cubes.empty()) throw Error(ErrorKind::InvalidArgument, "table_space: no cube lists");
  opts.max_dim = std::min<int>(opts.max_dim, static_cast<int>(cubes.size()) - 1);
  std::vector<std::set<Configuration>> sets(cubes.size());
  for (std::size_t n = 1; n < cubes.size(); ++n) {
    const auto syms = cube_symmetries(static_cast<int>(n));
    for (const auto& c : cubes[n]) {
      if (c.dim != static_cast<int>(n)) throw Error(ErrorKind::DimensionMismatch, "table_space: cube in the wrong list");
      for (Point x : c.values)
        if (x >= points) throw Error(ErrorKind::InvalidArgument, "table_space: point out of range");
      for (const auto& s : syms) {
        Configuration d = c;
        for (Vertex v = 0; v < c.size(); ++v) d[v] = c[s[v]];
        sets[n].insert(std::move(d));
      }
    }
    for (Point x = 0; x < points; ++x) sets[n].insert(Configuration::constant(static_cast<int>(n), x));
  }
  auto oracle = [sets = std::move(sets)](const Configuration& c) {
    if (c.dim == 0) return true;
    return sets[c.dim].count(c) > 0;
  };
  return make_space(std::move(name), points, oracle, opts);
}

CubeSpacePtr one_point_space(int max_dim) {
  SpaceOptions opts;
  opts.max_dim = max_dim;
  opts.degree = 0;
  return make_space("point", 1, [](const Configuration&) { return true; }, opts);
}

CubeSpacePtr product_space(const CubeSpacePtr& a, const CubeSpacePtr& b) {
  const std::size_t nb = b->size();
  SpaceOptions opts;
  opts.max_dim = std::min(a->max_dim(), b->max_dim());
  if (a->degree() && b->degree()) opts.degree = std::max(*a->degree(), *b->degree());
  auto oracle = [a, b, nb](const Configuration& c) {
    Configuration ca = c, cb = c;
    for (Vertex v = 0; v < c.size(); ++v) ca[v] = c[v] / nb, cb[v] = c[v] % nb;
    return a->is_cube(ca) && b->is_cube(cb);
  };
  return make_space(a->name() + " x " + b->name(), a->size() * nb, oracle, opts);
}

// ---------------------------------------------------------------------------

void ConfigSearch::run() const {
  const Vertex full = static_cast<Vertex>(vertex_count(n) - 1);
  std::vector<std::vector<Face>> tops(last);
  for (Vertex v = 0; v < last; ++v) {
    for (Vertex S = v; S != 0; S = (S - 1) & v) tops[v].push_back(Face{n, full & ~S, v & ~S});
    std::stable_sort(tops[v].begin(), tops[v].end(),
                     [](const Face& x, const Face& y) { return x.free_dim() < y.free_dim(); });
  }
  Configuration c = Configuration::constant(n, 0);
  Configuration buf;
  std::function<bool(Vertex)> rec = [&](Vertex v) -> bool {
    if (v == last) return visit(c);
    const std::vector<Point>& cand = candidates(v, c);
    for (Point x : cand) {
      c[v] = x;
      bool ok = true;
      for (const Face& f : tops[v]) {
        restrict_into(c, f, buf);
        if (!face_ok(buf)) {
          ok = false;
          break;
        }
      }
      if (ok && !rec(v + 1)) return false;
    }
    return true;
  };
  rec(0);
}

namespace {

std::vector<std::vector<Point>> lift_candidates(const std::vector<std::vector<Point>>& fibers,
                                                const Configuration& target, const Configuration* prefer) {
  std::vector<std::vector<Point>> cand(target.size());
  for (Vertex v = 0; v < target.size(); ++v) {
    if (target[v] >= fibers.size()) throw Error(ErrorKind::InvalidArgument, "lift: target point out of range");
    cand[v] = fibers[target[v]];
    if (prefer) {
      auto it = std::find(cand[v].begin(), cand[v].end(), (*prefer)[v]);
      if (it != cand[v].end()) std::rotate(cand[v].begin(), it, it + 1);
    }
  }
  return cand;
}

}  // namespace

std::optional<Configuration> find_lift(const CubeSpace& X, const std::vector<std::vector<Point>>& fibers,
                                       const Configuration& target, const Configuration* prefer) {
  const auto cand = lift_candidates(fibers, target, prefer);
  std::optional<Configuration> found;
  ConfigSearch search;
  search.n = target.dim;
  search.last = static_cast<Vertex>(target.size());
  search.candidates = [&](Vertex v, const Configuration&) -> const std::vector<Point>& { return cand[v]; };
  search.face_ok = [&](const Configuration& f) { return X.is_cube(f); };
  search.visit = [&](const Configuration& c) {
    found = c;
    return false;
  };
  if (target.dim == 0) {
    if (!cand[0].empty()) found = Configuration(0, {cand[0][0]});
    return found;
  }
  search.run();
  return found;
}

std::vector<Configuration> all_lifts(const CubeSpace& X, const std::vector<std::vector<Point>>& fibers,
                                     const Configuration& target, std::size_t cap) {
  const auto cand = lift_candidates(fibers, target, nullptr);
  std::vector<Configuration> out;
  ConfigSearch search;
  search.n = target.dim;
  search.last = static_cast<Vertex>(target.size());
  search.candidates = [&](Vertex v, const Configuration&) -> const std::vector<Point>& { return cand[v]; };
  search.face_ok = [&](const Configuration& f) { return X.is_cube(f); };
  search.visit = [&](const Configuration& c) {
    if (out.size() >= cap) throw Error(ErrorKind::CapExceeded, "all_lifts: too many lifts");
    out.push_back(c);
    return true;
  };
  search.run();
  return out;
}

// ---------------------------------------------------------------------------

CheckResult check_ergodic(const CubeSpace& X) {
  CheckResult r;
  r.name = "ergodic";
  for (Point x = 0; x < X.size(); ++x)
    for (Point y = 0; y < X.size(); ++y) {
      ++r.examined;
      Configuration c(1, {x, y});
      if (!X.is_cube(c)) {
        r.pass = false;
        r.witness = {c};
        return r;
      }
    }
  return r;
}

CheckResult check_glueing(const CubeSpace& X, int max_dim) {
  CheckResult r;
  r.name = "glueing";
  if (max_dim < 0) max_dim = X.max_dim();
  for (int n = 1; n <= max_dim; ++n) {
    const auto& list = X.cubes(n);
    for (int k = 1; k <= n; ++k) {
      const Face f0 = coordinate_face(n, k, 0), f1 = coordinate_face(n, k, 1);
      std::map<Configuration, std::vector<Configuration>> left, right;  // keyed by the shared face
      for (const auto& c : list) {
        auto a = restrict(c, f0), b = restrict(c, f1);
        left[b].push_back(a);
        right[a].push_back(b);
      }
      for (const auto& [mid, lows] : left) {
        auto it = right.find(mid);
        if (it == right.end()) continue;
        for (const auto& c1 : lows)
          for (const auto& c3 : it->second) {
            ++r.examined;
            if (!X.is_cube(concat(c1, c3, k))) {
              r.pass = false;
              r.witness = {c1, mid, c3};
              r.coordinate = k;
              return r;
            }
          }
      }
    }
  }
  return r;
}

CheckResult check_uniqueness(const CubeSpace& X, int k) {
  CheckResult r;
  r.name = "uniqueness";
  r.coordinate = k;
  const auto& list = X.cubes(k);
  r.examined = list.size();
  for (std::size_t i = 1; i < list.size(); ++i) {
    const auto& a = list[i - 1].values;
    const auto& b = list[i].values;
    if (std::equal(a.begin(), a.end() - 1, b.begin())) {
      r.pass = false;
      r.witness = {list[i - 1], list[i]};
      return r;
    }
  }
  return r;
}

CheckResult check_completion(const CubeSpace& X, int n) {
  CheckResult r;
  r.name = "completion";
  r.coordinate = n;
  if (n < 1) return r;
  X.is_cube(Configuration::constant(n, 0));  // dimension check
  const auto pts = all_points(X.size());
  const Vertex top = static_cast<Vertex>(vertex_count(n) - 1);
  ConfigSearch search;
  search.n = n;
  search.last = top;
  search.candidates = [&](Vertex, const Configuration&) -> const std::vector<Point>& { return pts; };
  search.face_ok = [&](const Configuration& f) { return X.is_cube(f); };
  search.visit = [&](const Configuration& corner) {
    if (++r.examined > X.options().cube_cap)
      throw Error(ErrorKind::CapExceeded, "check_completion: too many corners");
    Configuration c = corner;
    for (Point x : pts) {
      c[top] = x;
      if (X.is_cube(c)) return true;
    }
    r.pass = false;
    c[top] = 0;
    r.witness = {c};
    return false;
  };
  search.run();
  return r;
}

// ---------------------------------------------------------------------------

Configuration FactorMap::project(const Configuration& c) const {
  Configuration out = c;
  for (auto& x : out.values) x = assignment.at(x);
  return out;
}

FactorMap identity_factor(const CubeSpacePtr& X) {
  FactorMap f;
  f.source = X;
  f.target = X;
  f.assignment = all_points(X->size());
  for (Point x = 0; x < X->size(); ++x) f.fibers.push_back({x});
  return f;
}

FactorMap canonical_factor(const CubeSpacePtr& X, int k) {
  if (k < 0) throw Error(ErrorKind::InvalidArgument, "canonical_factor: negative level");
  const std::size_t N = X->size();
  std::vector<std::vector<char>> rel(N, std::vector<char>(N));
  for (Point x = 0; x < N; ++x)
    for (Point y = 0; y < N; ++y) rel[x][y] = X->is_cube(corner(x, y, k + 1));
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::NotANilspace, "canonical_factor(" + X->name() + "): " + what);
  };
  for (Point x = 0; x < N; ++x)
    if (!rel[x][x]) fail("relation not reflexive at " + std::to_string(x));
  for (Point x = 0; x < N; ++x)
    for (Point y = 0; y < N; ++y)
      if (rel[x][y] != rel[y][x]) fail("relation not symmetric at " + std::to_string(x) + "," + std::to_string(y));
  for (Point x = 0; x < N; ++x)
    for (Point y = 0; y < N; ++y) {
      if (!rel[x][y]) continue;
      for (Point z = 0; z < N; ++z)
        if (rel[y][z] && !rel[x][z])
          fail("relation not transitive at " + std::to_string(x) + "," + std::to_string(y) + "," +
               std::to_string(z));
    }
  FactorMap f;
  f.source = X;
  f.assignment.assign(N, static_cast<Point>(-1));
  for (Point x = 0; x < N; ++x) {
    if (f.assignment[x] != static_cast<Point>(-1)) continue;
    const Point cls = static_cast<Point>(f.fibers.size());
    f.fibers.emplace_back();
    for (Point y = x; y < N; ++y)
      if (rel[x][y]) f.assignment[y] = cls, f.fibers.back().push_back(y);
  }
  if (f.fibers.size() == N) {
    f.target = X;
    return f;
  }
  SpaceOptions opts;
  opts.max_dim = X->max_dim();
  opts.degree = X->degree() ? std::min(*X->degree(), k) : k;
  if (f.fibers.size() == 1) opts.degree = 0;
  auto fibers = f.fibers;
  auto oracle = [X, fibers](const Configuration& c) { return find_lift(*X, fibers, c).has_value(); };
  f.target = make_space("pi_" + std::to_string(k) + "(" + X->name() + ")", f.fibers.size(), oracle, opts);
  return f;
}

Elem StructureGroup::diff(Point x, Point y) const {
  Elem a = difference.at(x).at(y);
  if (a == kNone) throw Error(ErrorKind::InvalidArgument, "points lie in different fibers");
  return a;
}

StructureGroup structure_group(const CubeSpacePtr& X, int s) {
  if (s < 1) throw Error(ErrorKind::InvalidArgument, "structure_group: degree must be at least 1");
  StructureGroup sg;
  sg.space = X;
  sg.degree = s;
  sg.factor = canonical_factor(X, s - 1);
  const auto assignment = sg.factor.assignment;
  EnumerationOptions opts;
  opts.allowed = [assignment](Point x, Point y) { return assignment[x] == assignment[y]; };
  TranslationGroup tg = enumerate_translations(X, s, opts);
  sg.group = FiniteGroup::from_permutations(tg.elements);
  const auto& G = sg.group;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::StructureExtraction, "structure_group(" + X->name() + "): " + what);
  };
  if (!G.is_abelian()) fail("fiber-preserving translations do not commute");
  for (Elem a = 0; a < G.order(); ++a) {
    if (a == G.identity()) continue;
    const auto& p = G.permutation(a);
    for (Point x = 0; x < p.size(); ++x)
      if (p[x] == x) fail("action is not free");
  }
  const std::size_t N = X->size();
  sg.difference.assign(N, std::vector<Elem>(N, StructureGroup::kNone));
  for (Point x = 0; x < N; ++x)
    for (Elem a = 0; a < G.order(); ++a) sg.difference[x][G.permutation(a)[x]] = a;
  for (const auto& fiber : sg.factor.fibers)
    for (Point y : fiber)
      if (sg.difference[fiber.front()][y] == StructureGroup::kNone) fail("action is not transitive on a fiber");
  sg.coords = decompose_abelian(G);
  return sg;
}

NilspaceTower build_tower(const CubeSpacePtr& X, int s) {
  NilspaceTower t;
  CubeSpacePtr cur = X;
  for (int i = s; i >= 1; --i) {
    t.levels.push_back(structure_group(cur, i));
    cur = t.levels.back().factor.target;
  }
  if (cur->size() != 1)
    throw Error(ErrorKind::StructureExtraction, "build_tower: bottom of the tower is not a point");
  return t;
}

}  // namespace nilcube
