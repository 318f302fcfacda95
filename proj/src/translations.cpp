#include "nilcube/translations.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace nilcube {

PointMap identity_map(std::size_t n) {
  PointMap p(n);
  std::iota(p.begin(), p.end(), Point{0});
  return p;
}

PointMap compose(const PointMap& a, const PointMap& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "compose: maps on different sets");
  PointMap r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[b[i]];
  return r;
}

PointMap inverse(const PointMap& a) {
  if (!is_bijection(a, a.size())) throw Error(ErrorKind::NotBijective, "inverse: map is not a bijection");
  PointMap r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[a[i]] = static_cast<Point>(i);
  return r;
}

bool is_bijection(const PointMap& a, std::size_t n) {
  if (a.size() != n) return false;
  std::vector<char> hit(n, 0);
  for (Point x : a) {
    if (x >= n || hit[x]) return false;
    hit[x] = 1;
  }
  return true;
}

std::string to_string(const PointMap& a) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < a.size(); ++i) os << (i ? " " : "") << a[i];
  os << ']';
  return os.str();
}

namespace {

// Corner-path parameters: phi is a k-translation iff the corner of c and
// phi(c) lies in C^m for every c in C^{m-k}.
int corner_dim(const CubeSpace& X, int k) { return std::max(*X.degree() + 1, k); }

bool corner_path(const CubeSpace& X, const PointMap& phi, int k) {
  const int m = corner_dim(X, k);
  for (const auto& c : X.cubes(m - k))
    if (!X.is_cube(corner(c, nilcube::apply(phi, c), k))) return false;
  return true;
}

bool definition_path(const CubeSpace& X, const PointMap& phi, int k, int max_dim) {
  if (max_dim < 0) max_dim = X.max_dim();
  for (int n = std::max(k, 1); n <= max_dim; ++n) {
    const auto fs = faces(n, k);
    for (const auto& c : X.cubes(n))
      for (const auto& f : fs)
        if (!X.is_cube(apply_on_face(phi, f, c))) return false;
  }
  return true;
}

}  // namespace

bool is_k_translation(const CubeSpace& X, const PointMap& phi, int k, TranslationMethod method, int max_dim) {
  if (!is_bijection(phi, X.size())) throw Error(ErrorKind::NotBijective, "is_k_translation: map is not a bijection");
  if (k < 0) throw Error(ErrorKind::InvalidArgument, "is_k_translation: negative level");
  if (method == TranslationMethod::Auto)
    method = X.degree() ? TranslationMethod::Corner : TranslationMethod::Definition;
  if (method == TranslationMethod::Corner) {
    if (!X.degree()) throw Error(ErrorKind::Precondition, "corner test needs the degree of the space");
    return corner_path(X, phi, k);
  }
  return definition_path(X, phi, k, max_dim);
}

bool TranslationGroup::contains(const PointMap& p) const {
  return std::binary_search(elements.begin(), elements.end(), p);
}

std::vector<PointMap> TranslationGroup::generators() const {
  std::vector<PointMap> gens;
  std::set<PointMap> span;
  if (!elements.empty()) span.insert(identity_map(elements.front().size()));
  for (const auto& p : elements) {
    if (span.count(p)) continue;
    gens.push_back(p);
    std::vector<PointMap> queue(span.begin(), span.end());
    for (std::size_t i = 0; i < queue.size(); ++i)
      for (const auto& g : gens) {
        auto q = compose(queue[i], g);
        if (span.insert(q).second) queue.push_back(q);
      }
  }
  return gens;
}

namespace {

constexpr std::size_t kMaxGroupOrder = 200'000;

TranslationGroup generated_group(const CubeSpacePtr& X, int k, const std::vector<PointMap>& found) {
  std::set<PointMap> span{identity_map(X->size())};
  std::vector<PointMap> queue(span.begin(), span.end());
  for (std::size_t i = 0; i < queue.size() && span.size() < kMaxGroupOrder; ++i)
    for (const auto& g : found) {
      auto q = compose(queue[i], g);
      if (span.insert(q).second) queue.push_back(q);
    }
  return TranslationGroup{X, k, std::vector<PointMap>(span.begin(), span.end())};
}

struct Constraint {
  Configuration cube;
  Face face;  // Definition mode: the face phi is applied on
};

}  // namespace

TranslationGroup enumerate_translations(const CubeSpacePtr& Xp, int k, const EnumerationOptions& opts) {
  const CubeSpace& X = *Xp;
  const std::size_t N = X.size();
  if (k < 0) throw Error(ErrorKind::InvalidArgument, "enumerate_translations: negative level");
  if (N > opts.point_cap) {
    std::ostringstream os;
    os << "enumerate_translations: " << N << " points exceed the cap " << opts.point_cap;
    throw PartialResult(os.str(), TranslationGroup{Xp, k, {identity_map(N)}});
  }
  TranslationMethod method = opts.method;
  if (method == TranslationMethod::Auto)
    method = X.degree() ? TranslationMethod::Corner : TranslationMethod::Definition;
  const bool corner_mode = method == TranslationMethod::Corner;

  // constraints bucketed by the largest point they involve
  std::vector<std::vector<Constraint>> bucket(N);
  auto add = [&](const Configuration& c, const Face& f) {
    Point hi = 0;
    for (Vertex v = 0; v < c.size(); ++v)
      if (corner_mode || f.contains(v)) hi = std::max(hi, c[v]);
    bucket[hi].push_back({c, f});
  };
  if (corner_mode) {
    const int m = corner_dim(X, k);
    for (const auto& c : X.cubes(m - k)) add(c, Face{});
  } else {
    for (int n = std::max(k, 1); n <= std::min(opts.prune_max_dim, X.max_dim()); ++n) {
      const std::vector<Configuration>* list = nullptr;
      try {
        list = &X.cubes(n);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::CapExceeded) throw;
        break;
      }
      if (list->size() > opts.prune_cube_cap) break;
      for (const auto& c : *list)
        for (const auto& f : faces(n, k)) add(c, f);
    }
  }

  PointMap phi(N, 0);
  std::vector<char> used(N, 0);
  std::vector<PointMap> found;
  std::uint64_t nodes = 0;
  const int m = corner_mode ? corner_dim(X, k) : 0;

  Configuration buf = Configuration::constant(std::max(m, 1), 0);
  auto satisfied = [&](const Constraint& con) {
    const Configuration& c = con.cube;
    if (corner_mode) {
      // corner of c and phi(c) in dimension m, written in place
      const int low_dim = c.dim;
      const Vertex top = static_cast<Vertex>(vertex_count(m - low_dim) - 1);
      const Vertex low = static_cast<Vertex>(vertex_count(low_dim) - 1);
      buf.dim = m;
      buf.values.resize(vertex_count(m));
      for (Vertex v = 0; v < buf.size(); ++v)
        buf[v] = (v >> low_dim) == top ? phi[c[v & low]] : c[v & low];
    } else {
      buf = c;
      for (Vertex v = 0; v < c.size(); ++v)
        if (con.face.contains(v)) buf[v] = phi[c[v]];
    }
    return X.is_cube(buf);
  };
  auto consistent = [&](Point x) {
    for (const auto& con : bucket[x])
      if (!satisfied(con)) return false;
    return true;
  };
  // First completion of the current prefix phi[0..x-1], if any.
  std::function<bool(Point)> rec = [&](Point x) -> bool {
    if (x == N) return corner_mode || is_k_translation(X, phi, k, method);
    for (Point y = 0; y < N; ++y) {
      if (used[y] || (opts.allowed && !opts.allowed(x, y))) continue;
      if (++nodes > opts.node_budget)
        throw PartialResult("enumerate_translations: node budget exhausted", generated_group(Xp, k, found));
      phi[x] = y;
      if (!consistent(x)) continue;
      used[y] = 1;
      bool done = rec(x + 1);
      used[y] = 0;
      if (done) return true;
    }
    return false;
  };

  // The k-translations form a group, so it is enough to find one element of
  // each coset of the successive point stabilizers: for every i and every
  // image y of i not yet reached, look for a translation fixing 0..i-1 and
  // sending i to y.
  TranslationGroup group = generated_group(Xp, k, {});
  for (Point i = 0; i < N; ++i) {
    std::vector<char> reached(N, 0);
    auto refresh = [&] {
      std::fill(reached.begin(), reached.end(), 0);
      for (const auto& h : group.elements) {
        bool fixes = true;
        for (Point j = 0; j < i && fixes; ++j) fixes = h[j] == j;
        if (fixes) reached[h[i]] = 1;
      }
    };
    refresh();
    for (Point y = 0; y < N; ++y) {
      if (reached[y] || (opts.allowed && !opts.allowed(i, y))) continue;
      std::fill(used.begin(), used.end(), 0);
      bool ok = true;
      for (Point j = 0; j < i && ok; ++j) phi[j] = j, used[j] = 1, ok = consistent(j);
      if (!ok || used[y]) continue;
      phi[i] = y;
      if (!consistent(i)) continue;
      used[y] = 1;
      if (!rec(i + 1)) continue;
      found.push_back(phi);
      group = generated_group(Xp, k, found);
      if (group.order() >= kMaxGroupOrder)
        throw PartialResult("enumerate_translations: group exceeds the order cap", group);
      refresh();
    }
  }
  return group;
}

std::vector<PointMap> enumerate_translations_bruteforce(const CubeSpace& X, int k, TranslationMethod method) {
  if (X.size() > 9) throw Error(ErrorKind::CapExceeded, "bruteforce enumeration is limited to 9 points");
  std::vector<PointMap> out;
  PointMap p = identity_map(X.size());
  do {
    if (is_k_translation(X, p, k, method)) out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

std::optional<FiltrationWitness> check_filtration_property(const std::vector<TranslationGroup>& groups) {
  if (groups.empty()) return std::nullopt;
  const int base = groups.front().level;
  const int top = base + static_cast<int>(groups.size()) - 1;
  const CubeSpace& X = *groups.front().space;
  for (std::size_t t = 0; t < groups.size(); ++t)
    if (groups[t].level != base + static_cast<int>(t))
      throw Error(ErrorKind::InvalidArgument, "check_filtration_property: levels are not consecutive");
  for (std::size_t t = 0; t + 1 < groups.size(); ++t)
    for (const auto& p : groups[t + 1].elements)
      if (!groups[t].contains(p)) {
        FiltrationWitness w;
        w.i = groups[t + 1].level;
        w.j = groups[t].level;
        w.a = p;
        w.reason = "Aut_" + std::to_string(w.i) + " is not contained in Aut_" + std::to_string(w.j);
        return w;
      }
  const PointMap id = identity_map(X.size());
  for (std::size_t ti = 0; ti < groups.size(); ++ti)
    for (std::size_t tj = ti; tj < groups.size(); ++tj) {
      const int i = groups[ti].level, j = groups[tj].level, L = i + j;
      for (const auto& a : groups[ti].elements)
        for (const auto& b : groups[tj].elements) {
          PointMap c = compose(compose(a, b), compose(inverse(a), inverse(b)));
          bool ok;
          if (L <= top)
            ok = groups[L - base].contains(c);
          else if (c == id)
            ok = true;
          else if (X.degree() && L > *X.degree())
            ok = false;
          else
            ok = is_k_translation(X, c, L);
          if (!ok) return FiltrationWitness{i, j, a, b, c, "commutator leaves Aut_" + std::to_string(L)};
        }
    }
  return std::nullopt;
}

PointMap pushforward(const FactorMap& pi, const PointMap& phi) {
  if (!is_bijection(phi, pi.assignment.size())) throw Error(ErrorKind::NotBijective, "pushforward: not a bijection");
  PointMap out(pi.fibers.size());
  for (Point y = 0; y < pi.fibers.size(); ++y) {
    const Point image = pi.assignment[phi[pi.fibers[y].front()]];
    for (Point x : pi.fibers[y])
      if (pi.assignment[phi[x]] != image) {
        std::ostringstream os;
        os << "pushforward: fiber " << y << " is sent to several fibers";
        throw Error(ErrorKind::RepresentativeDependence, os.str());
      }
    out[y] = image;
  }
  if (!is_bijection(out, out.size())) throw Error(ErrorKind::NotBijective, "pushforward: induced map is not a bijection");
  return out;
}

Elem TranslationFiltration::element(const PointMap& p) const {
  auto e = group.find_permutation(p);
  if (!e) throw Error(ErrorKind::InvalidArgument, "map is not a 1-translation");
  return *e;
}

TranslationFiltration translation_filtration(const CubeSpacePtr& X, int top_level, const EnumerationOptions& opts) {
  if (top_level < 0) top_level = X->degree() ? *X->degree() + 1 : X->max_dim();
  top_level = std::max(top_level, 1);
  TranslationFiltration tf;
  tf.space = X;
  for (int k = 1; k <= top_level; ++k) tf.levels.push_back(enumerate_translations(X, k, opts));
  tf.group = FiniteGroup::from_permutations(tf.levels.front().elements);
  std::vector<std::vector<Elem>> levels;
  std::vector<Elem> all(tf.group.order());
  std::iota(all.begin(), all.end(), Elem{0});
  levels.push_back(all);
  for (const auto& lvl : tf.levels) {
    std::vector<Elem> ids;
    for (const auto& p : lvl.elements) {
      auto e = tf.group.find_permutation(p);
      if (!e) throw Error(ErrorKind::InternalInvariant, "translation_filtration: levels are not nested");
      ids.push_back(*e);
    }
    levels.push_back(std::move(ids));
  }
  tf.filtration = std::make_shared<const Filtration>(tf.group, levels);
  return tf;
}

Configuration hk_act(const TranslationFiltration& tf, const GroupConfiguration& Phi, const Configuration& c) {
  if (Phi.dim != c.dim) throw Error(ErrorKind::DimensionMismatch, "hk_act: dimensions differ");
  if (!tf.space->is_cube(c)) throw Error(ErrorKind::Precondition, "hk_act: configuration is not a cube");
  if (!hk_membership(*tf.filtration, Phi)) throw Error(ErrorKind::HKMembership, "hk_act: not a Host-Kra cube");
  Configuration out = c;
  for (Vertex v = 0; v < c.size(); ++v) out[v] = tf.group.permutation(Phi[v])[c[v]];
  if (!tf.space->is_cube(out)) throw Error(ErrorKind::InternalInvariant, "hk_act: image is not a cube");
  return out;
}

}  // namespace nilcube
