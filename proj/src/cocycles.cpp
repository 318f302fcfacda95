#include "nilcube/cocycles.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "nilcube/translations.hpp"

namespace nilcube {

const ValuePoint& Cocycle::at(const Configuration& c) const {
  if (c.dim != order) throw Error(ErrorKind::DimensionMismatch, "cocycle evaluated on a cube of another dimension");
  auto id = space->cube_id(c);
  if (!id) throw Error(ErrorKind::InvalidArgument, "cocycle evaluated off the cubes: " + to_string(c));
  return values[*id];
}

Cocycle make_cocycle(const CubeSpacePtr& X, int order, const ValueGroup& group,
                     const std::function<ValuePoint(const Configuration&)>& value) {
  if (order < 0) throw Error(ErrorKind::InvalidArgument, "make_cocycle: negative order");
  Cocycle rho{X, order, group, {}};
  const auto& cubes = X->cubes(order);
  rho.values.reserve(cubes.size());
  for (const auto& c : cubes) {
    rho.values.push_back(value(c));
    group.check(rho.values.back());
  }
  return rho;
}

bool operator==(const Cocycle& a, const Cocycle& b) {
  return a.space == b.space && a.order == b.order && a.group == b.group && a.values == b.values;
}

// ---------------------------------------------------------------------------

namespace {

std::pair<Configuration, Configuration> split(const Configuration& c, int k) {
  return {restrict(c, coordinate_face(c.dim, k, 0)), restrict(c, coordinate_face(c.dim, k, 1))};
}

}  // namespace

CocycleCheck check_cocycle(const Cocycle& rho, const CocycleCheckOptions& opts) {
  CocycleCheck out;
  const int l = rho.order;
  if (rho.space->cubes(l).size() != rho.values.size())
    throw Error(ErrorKind::DimensionMismatch, "check_cocycle: value table does not match the cubes");
  if (l == 0) return out;
  const CubeSpace& X = *rho.space;
  const ValueGroup& g = rho.group;
  const auto& cubes = X.cubes(l);
  auto fail = [&](const char* axiom, int k, std::vector<Configuration> w) {
    out.pass = false;
    out.axiom = axiom;
    out.coordinate = k;
    out.witness = std::move(w);
    return out;
  };
  std::mt19937_64 rng(opts.seed);

  const auto& lower_cubes = X.cubes(l - 1);
  const std::uint64_t M = lower_cubes.size();
  for (int k = 1; k <= l; ++k) {
    // every cube is [c1, c2]_k with c1, c2 cubes of dimension l-1; work with their ids
    std::vector<std::size_t> lo(cubes.size()), hi(cubes.size());
    std::unordered_map<std::uint64_t, std::size_t> by_halves;
    by_halves.reserve(cubes.size());
    for (std::size_t i = 0; i < cubes.size(); ++i) {
      auto [c1, c2] = split(cubes[i], k);
      auto a = X.cube_id(c1), b = X.cube_id(c2);
      if (!a || !b) throw Error(ErrorKind::NotANilspace, "check_cocycle: a face of a cube is not a cube");
      lo[i] = *a;
      hi[i] = *b;
      by_halves.emplace(lo[i] * M + hi[i], i);
    }
    auto find = [&](std::size_t a, std::size_t b) -> std::optional<std::size_t> {
      auto it = by_halves.find(a * M + b);
      if (it == by_halves.end()) return std::nullopt;
      return it->second;
    };
    for (std::size_t j = 0; j < M; ++j) {
      ++out.examined;
      auto id = find(j, j);
      if (id && !g.is_zero(rho.values[*id])) return fail("degeneracy", k, {lower_cubes[j]});
    }
    for (std::size_t i = 0; i < cubes.size(); ++i) {
      ++out.examined;
      auto j = find(hi[i], lo[i]);
      if (j && !g.is_zero(g.add(rho.values[i], rho.values[*j]))) return fail("reflection", k, {cubes[i]});
    }

    // right[c1] = ids of the cubes [c1, c2]_k; [c0, c1]_k is the reflection of [c1, c0]_k
    std::vector<std::vector<std::size_t>> right(M);
    for (std::size_t i = 0; i < cubes.size(); ++i) right[lo[i]].push_back(i);
    std::size_t triples = 0;
    for (const auto& ids : right) triples += ids.size() * ids.size();

    auto check_triple = [&](std::size_t c1, std::size_t id10, std::size_t id12) -> bool {
      ++out.examined;
      auto id01 = find(hi[id10], c1);
      auto id02 = find(hi[id10], hi[id12]);
      if (!id01 || !id02) return true;  // glueing fails in X; no constraint
      return g.add(rho.values[*id01], rho.values[id12]) == rho.values[*id02];
    };
    auto witness = [&](std::size_t c1, std::size_t a, std::size_t b) {
      return std::vector<Configuration>{concat(lower_cubes[hi[a]], lower_cubes[c1], k), cubes[b]};
    };
    if (triples <= opts.exhaustive_limit) {
      for (std::size_t c1 = 0; c1 < M; ++c1)
        for (std::size_t a : right[c1])
          for (std::size_t b : right[c1])
            if (!check_triple(c1, a, b)) return fail("additivity", k, witness(c1, a, b));
    } else {
      out.exhaustive = false;
      std::uniform_int_distribution<std::size_t> pick(0, cubes.size() - 1);
      for (std::size_t n = 0; n < opts.samples; ++n) {
        const std::size_t a = pick(rng);
        const auto& ids = right[lo[a]];
        const std::size_t b = ids[std::uniform_int_distribution<std::size_t>(0, ids.size() - 1)(rng)];
        if (!check_triple(lo[a], a, b)) return fail("additivity", k, witness(lo[a], a, b));
      }
    }
  }
  return out;
}

Cocycle coboundary(const CubeSpacePtr& X, const ValueGroup& group, const PointFunction& f, int l) {
  if (f.size() != X->size()) throw Error(ErrorKind::DimensionMismatch, "coboundary: function size");
  for (const auto& v : f) group.check(v);
  return make_cocycle(X, l, group, [&](const Configuration& c) {
    ValuePoint acc = group.zero();
    for (Vertex v = 0; v < c.size(); ++v) acc = (weight(v) & 1) ? group.sub(acc, f[c[v]]) : group.add(acc, f[c[v]]);
    return acc;
  });
}

Cocycle directional_derivative(const Cocycle& rho, int k) {
  if (k < 1 || k > rho.order + 1) throw Error(ErrorKind::InvalidArgument, "directional_derivative: coordinate");
  return make_cocycle(rho.space, rho.order + 1, rho.group, [&](const Configuration& c) {
    auto [c1, c2] = split(c, k);
    return rho.group.sub(rho.at(c1), rho.at(c2));
  });
}

// ---------------------------------------------------------------------------

namespace {

// The projection of c, after checking that it is a factor cube.
Configuration checked_base(const StructureGroup& sg, const Configuration& c) {
  const int s = sg.degree;
  if (c.dim != s + 1) throw Error(ErrorKind::DimensionMismatch, "discrepancy: configuration must have dimension s+1");
  for (Point x : c.values)
    if (x >= sg.space->size()) throw Error(ErrorKind::InvalidArgument, "discrepancy: point out of range");
  Configuration target = sg.factor.project(c);
  if (!sg.factor.target->is_cube(target))
    throw Error(ErrorKind::NotAFactorCube, "discrepancy: projection is not a cube of the factor");
  return target;
}

Elem alternating_difference(const StructureGroup& sg, const Configuration& ref, const Configuration& c) {
  const auto& G = sg.group;
  Elem acc = G.identity();
  for (Vertex v = 0; v < c.size(); ++v) {
    Elem a = sg.diff(ref[v], c[v]);
    acc = G.mul(acc, (weight(v) & 1) ? G.inv(a) : a);
  }
  return acc;
}

}  // namespace

ReferenceCube::ReferenceCube(const StructureGroup& sg, Configuration cube)
    : cube_(std::move(cube)), base_(checked_base(sg, cube_)) {
  if (!sg.space->is_cube(cube_)) throw Error(ErrorKind::InvalidArgument, "discrepancy: reference is not a cube");
}

Elem discrepancy(const StructureGroup& sg, const Configuration& c) {
  const Configuration target = checked_base(sg, c);
  const auto found = find_lift(*sg.space, sg.factor.fibers, target, &c);
  if (!found) throw Error(ErrorKind::NotAFactorCube, "discrepancy: no cube lies over the projection");
  return alternating_difference(sg, *found, c);
}

Elem discrepancy(const StructureGroup& sg, const Configuration& c, const ReferenceCube& reference) {
  if (c.dim != reference.base().dim)
    throw Error(ErrorKind::DimensionMismatch, "discrepancy: configuration must have dimension s+1");
  for (Vertex v = 0; v < c.size(); ++v)
    if (c[v] >= sg.space->size() || sg.factor.assignment[c[v]] != reference.base()[v])
      throw Error(ErrorKind::InvalidArgument, "discrepancy: reference lies over a different factor cube");
  return alternating_difference(sg, reference.cube(), c);
}

Elem discrepancy_all_references(const StructureGroup& sg, const Configuration& c) {
  const Elem first = discrepancy(sg, c);
  const auto refs = all_lifts(*sg.space, sg.factor.fibers, sg.factor.project(c));
  for (const auto& r : refs)
    if (alternating_difference(sg, r, c) != first)
      throw Error(ErrorKind::RepresentativeDependence, "discrepancy depends on the reference cube " + to_string(r));
  return first;
}

ValueGroup structure_value_group(const StructureGroup& sg) { return ValueGroup(0, sg.coords.moduli); }

ValuePoint structure_value(const StructureGroup& sg, Elem a) {
  return ValuePoint{{}, sg.coords.coords_of.at(a)};
}

Elem structure_element(const StructureGroup& sg, const ValuePoint& p) {
  structure_value_group(sg).check(p);
  return sg.coords.element(p.finite);
}

Cocycle rho_chi(const StructureGroup& sg, const PointMap& chi, int k) {
  const int s = sg.degree;
  if (k < 0 || k > s + 1) throw Error(ErrorKind::InvalidArgument, "rho_chi: level out of range");
  const CubeSpace& X = *sg.space;
  if (!is_bijection(chi, X.size())) throw Error(ErrorKind::NotABundleMap, "rho_chi: map is not a bijection");
  for (Elem a = 0; a < sg.order(); ++a)
    for (Point x = 0; x < X.size(); ++x)
      if (chi[sg.act(a, x)] != sg.act(a, chi[x]))
        throw Error(ErrorKind::NotABundleMap, "rho_chi: map does not commute with the structure group");
  try {
    pushforward(sg.factor, chi);
  } catch (const Error& e) {
    throw Error(ErrorKind::NotABundleMap, std::string("rho_chi: ") + e.what());
  }
  return make_cocycle(sg.space, s + 1 - k, structure_value_group(sg), [&](const Configuration& c) {
    return structure_value(sg, discrepancy(sg, corner(c, nilcube::apply(chi, c), k)));
  });
}

// ---------------------------------------------------------------------------

bool ds_is_cube(const FiniteGroup& A, int s, const GroupConfiguration& c) {
  if (!A.is_abelian()) throw Error(ErrorKind::GroupMismatch, "ds_is_cube: group must be abelian");
  const int n = c.dim;
  if (n <= s) return true;
  for (const Face& f : faces(n, n - s - 1)) {
    Elem acc = A.identity();
    for (std::uint32_t u = 0; u < vertex_count(s + 1); ++u) {
      Elem x = c[f.embed(u)];
      acc = A.mul(acc, (weight(u) & 1) ? A.inv(x) : x);
    }
    if (acc != A.identity()) return false;
  }
  return true;
}

namespace {

constexpr std::uint64_t kMaxCompletionConfigs = 4'000'000;

// Every configuration on {0,1}^n with entries in A, filtered, in lexicographic order.
std::vector<GroupConfiguration> filter_configs(const FiniteGroup& A, int n,
                                               const std::function<bool(const GroupConfiguration&)>& keep) {
  const std::size_t N = vertex_count(n);
  unsigned __int128 total = 1;
  for (std::size_t i = 0; i < N; ++i) {
    total *= A.order();
    if (total > kMaxCompletionConfigs) throw Error(ErrorKind::CapExceeded, "completion group search is too large");
  }
  std::vector<GroupConfiguration> out;
  auto c = GroupConfiguration::constant(n, 0);
  // odometer with the last vertex fastest, which gives lexicographic order
  while (true) {
    if (keep(c)) out.push_back(c);
    std::size_t v = N;
    while (v > 0) {
      --v;
      if (++c[static_cast<Vertex>(v)] < A.order()) break;
      c[static_cast<Vertex>(v)] = 0;
      if (v == 0) return out;
    }
  }
}

GroupConfiguration add_configs(const FiniteGroup& A, const GroupConfiguration& a, const GroupConfiguration& b) {
  return pointwise_mul(A, a, b);
}

}  // namespace

std::vector<GroupConfiguration> t1_subgroup(const FiniteGroup& A, int s, int l) {
  if (l < 1) throw Error(ErrorKind::InvalidArgument, "t1_subgroup: l must be at least 1");
  const auto zero = GroupConfiguration::constant(l - 1, A.identity());
  return filter_configs(A, l - 1, [&](const GroupConfiguration& t) { return ds_is_cube(A, s, concat(zero, t, l)); });
}

std::vector<GroupConfiguration> t2_subgroup(const FiniteGroup& A, int s, int l) {
  if (l < 2) throw Error(ErrorKind::InvalidArgument, "t2_subgroup: l must be at least 2");
  const auto zero = GroupConfiguration::constant(l - 2, A.identity());
  const auto lower = concat(zero, zero, l - 1);
  return filter_configs(A, l - 2, [&](const GroupConfiguration& t) {
    return ds_is_cube(A, s, concat(lower, concat(zero, t, l - 1), l));
  });
}

TDecomposition verify_t_decomposition(const FiniteGroup& A, int s, int l) {
  const auto T1 = t1_subgroup(A, s, l);
  const auto T1lower = t1_subgroup(A, s, l - 1);
  const auto T2 = t2_subgroup(A, s, l);
  TDecomposition out{T1.size(), T1lower.size(), T2.size(), false};
  auto in = [](const std::vector<GroupConfiguration>& set, const GroupConfiguration& x) {
    return std::binary_search(set.begin(), set.end(), x);
  };
  const auto zero = GroupConfiguration::constant(l - 2, A.identity());
  std::vector<GroupConfiguration> image;
  for (const auto& v : T1lower)
    for (const auto& u : T2) {
      auto t = add_configs(A, concat(v, v, l - 1), concat(zero, u, l - 1));
      if (!in(T1, t)) return out;
      image.push_back(std::move(t));
    }
  std::sort(image.begin(), image.end());
  if (std::adjacent_find(image.begin(), image.end()) != image.end() || image.size() != T1.size()) return out;
  // and back: v = t on {omega_{l-1} = 0}, u = t1 - t0
  for (const auto& t : T1) {
    const auto t0 = restrict(t, coordinate_face(l - 1, l - 1, 0));
    const auto t1 = restrict(t, coordinate_face(l - 1, l - 1, 1));
    if (!in(T1lower, t0) || !in(T2, pointwise_mul(A, t1, pointwise_inv(A, t0)))) return out;
  }
  out.bijective = true;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

Cocycle subtract(const Cocycle& a, const Cocycle& b) {
  Cocycle out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = a.group.sub(a.values[i], b.values[i]);
  return out;
}

class AveragingSolver {
 public:
  AveragingSolver(const NilspaceTower& tower, const ValueGroup& vg, const mpq_class& window, AveragingReport& report)
      : tower_(tower), vg_(vg), window_(window), report_(report) {}

  PointFunction solve(std::size_t level, const Cocycle& rho) {
    const int l = rho.order;
    const CubeSpace& X = *rho.space;
    if (l == 0) {
      PointFunction f(X.size(), vg_.zero());
      const auto& pts = X.cubes(0);
      for (std::size_t i = 0; i < pts.size(); ++i) f[pts[i][0]] = rho.values[i];
      return f;
    }
    if (level == tower_.levels.size()) {
      for (const auto& v : rho.values)
        if (!vg_.is_zero(v)) throw Error(ErrorKind::InternalInvariant, "averaging: nonzero cocycle on the point");
      return PointFunction(X.size(), vg_.zero());
    }
    const StructureGroup& sg = tower_.levels[level];
    const auto& T1 = t1(level, sg, l);

    PointFunction f(X.size(), vg_.zero());
    Cocycle rest = rho;
    for (int k = 1; k <= l; ++k) {
      Cocycle prime = make_cocycle(rho.space, l - 1, vg_, [&](const Configuration& c) {
        std::vector<ValuePoint> pts;
        pts.reserve(T1.size());
        for (const auto& t : T1) pts.push_back(rest.at(concat(c, act(sg, t, c), k)));
        ++report_.averages;
        try {
          return uniform_window_average(vg_, pts, window_);
        } catch (const Error& e) {
          if (e.kind() == ErrorKind::WindowViolation || e.kind() == ErrorKind::MixedFiniteComponents)
            throw Error(ErrorKind::SmallnessBudgetExceeded, std::string("averaging: ") + e.what());
          throw;
        }
      });
      if (l - 1 >= 1 && !check_cocycle(prime).pass)
        throw Error(ErrorKind::InternalInvariant, "averaging: the averaged function is not a cocycle");
      rest = subtract(rest, directional_derivative(prime, k));
      check_invariant(sg, rest, T1, k);
      const PointFunction g = solve(level, prime);
      for (std::size_t x = 0; x < f.size(); ++x) f[x] = vg_.add(f[x], g[x]);
    }
    for (int k = 1; k <= l; ++k) check_invariant(sg, rest, T1, k);

    // rest is now constant on fibers of the factor map; push it down
    const FactorMap& pi = sg.factor;
    const CubeSpace& Y = *pi.target;
    std::vector<std::optional<ValuePoint>> down(Y.cubes(l).size());
    const auto& cubes = X.cubes(l);
    for (std::size_t i = 0; i < cubes.size(); ++i) {
      auto id = Y.cube_id(pi.project(cubes[i]));
      if (!id) throw Error(ErrorKind::InternalInvariant, "averaging: a cube projects outside the factor cubes");
      if (down[*id] && *down[*id] != rest.values[i])
        throw Error(ErrorKind::InternalInvariant, "averaging: residual is not constant on fibers");
      down[*id] = rest.values[i];
    }
    Cocycle residual{pi.target, l, vg_, {}};
    for (auto& v : down) {
      if (!v) throw Error(ErrorKind::InternalInvariant, "averaging: a factor cube has no lift");
      residual.values.push_back(*v);
    }
    const PointFunction h = solve(level + 1, residual);
    for (std::size_t x = 0; x < f.size(); ++x) f[x] = vg_.add(f[x], h[pi.assignment[x]]);

    if (coboundary(rho.space, vg_, f, l).values != rho.values)
      throw Error(ErrorKind::InternalInvariant, "averaging: the result does not reproduce the cocycle");
    return f;
  }

 private:
  static Configuration act(const StructureGroup& sg, const GroupConfiguration& t, const Configuration& c) {
    Configuration out = c;
    for (Vertex v = 0; v < c.size(); ++v) out[v] = sg.act(t[v], c[v]);
    return out;
  }

  const std::vector<GroupConfiguration>& t1(std::size_t level, const StructureGroup& sg, int l) {
    auto key = std::make_pair(level, l);
    auto it = t1_cache_.find(key);
    if (it == t1_cache_.end()) {
      auto T = t1_subgroup(sg.group, sg.degree, l);
      // the identity configuration goes first: it is the averaging anchor
      std::stable_partition(T.begin(), T.end(), [&](const GroupConfiguration& t) {
        return std::all_of(t.values.begin(), t.values.end(), [&](Elem a) { return a == sg.group.identity(); });
      });
      it = t1_cache_.emplace(key, std::move(T)).first;
    }
    return it->second;
  }

  // rest([c1, t.c2]_k) = rest([c1, c2]_k) for t in T_1
  void check_invariant(const StructureGroup& sg, const Cocycle& rest, const std::vector<GroupConfiguration>& T1, int k) {
    const auto& cubes = rest.space->cubes(rest.order);
    for (std::size_t i = 0; i < cubes.size(); ++i) {
      auto [c1, c2] = split(cubes[i], k);
      for (const auto& t : T1) {
        ++report_.invariance_checks;
        if (rest.at(concat(c1, act(sg, t, c2), k)) != rest.values[i])
          throw Error(ErrorKind::InternalInvariant, "averaging: remainder is not invariant under [0, T_1]");
      }
    }
  }

  const NilspaceTower& tower_;
  ValueGroup vg_;
  mpq_class window_;
  AveragingReport& report_;
  std::map<std::pair<std::size_t, int>, std::vector<GroupConfiguration>> t1_cache_;
};

}  // namespace

CoboundaryWitness solve_coboundary_averaging(const NilspaceTower& tower, const Cocycle& rho, const mpq_class& window) {
  if (tower.levels.empty()) throw Error(ErrorKind::InvalidArgument, "averaging: empty tower");
  if (rho.space != tower.top().space)
    throw Error(ErrorKind::InvalidArgument, "averaging: cocycle lives on another space than the tower");
  if (rho.order >= 1) {
    auto chk = check_cocycle(rho);
    if (!chk.pass) throw Error(ErrorKind::Precondition, "averaging: input fails the " + chk.axiom + " axiom");
  }
  CoboundaryWitness out;
  out.report.input_spread = spread(rho.group, rho.values);
  AveragingSolver solver(tower, rho.group, window, out.report);
  out.f = solver.solve(0, rho);
  out.report.output_spread = spread(rho.group, out.f);
  if (out.report.input_spread != 0) out.report.ratio = out.report.output_spread / out.report.input_spread;
  return out;
}

PointFunction integrate_order_one(const Cocycle& rho, const mpq_class& window) {
  if (rho.order != 1) throw Error(ErrorKind::InvalidArgument, "integrate_order_one: cocycle must have order 1");
  const CubeSpace& X = *rho.space;
  const std::size_t N = X.size();
  if (X.cubes(1).size() != N * N) throw Error(ErrorKind::Precondition, "integrate_order_one: space is not ergodic");
  PointFunction f(N);
  for (Point x = 0; x < N; ++x) {
    std::vector<ValuePoint> pts;
    pts.push_back(rho.at(Configuration(1, {x, x})));
    for (Point y = 0; y < N; ++y)
      if (y != x) pts.push_back(rho.at(Configuration(1, {x, y})));
    try {
      f[x] = uniform_window_average(rho.group, pts, window);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::WindowViolation || e.kind() == ErrorKind::MixedFiniteComponents)
        throw Error(ErrorKind::SmallnessBudgetExceeded, std::string("integrate_order_one: ") + e.what());
      throw;
    }
  }
  if (coboundary(rho.space, rho.group, f, 1).values != rho.values)
    throw Error(ErrorKind::InternalInvariant, "integrate_order_one: the result does not reproduce the cocycle");
  return f;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::int64_t> coboundary_row(const Configuration& c, std::size_t points, std::int64_t m) {
  std::vector<std::int64_t> row(points, 0);
  for (Vertex v = 0; v < c.size(); ++v) row[c[v]] += sign(v);
  for (auto& x : row) x = mod(x, m);
  return row;
}

}  // namespace

LinearSolution solve_coboundary_linear(const Cocycle& rho) {
  const ValueGroup& g = rho.group;
  if (g.torus_rank() != 0)
    throw Error(ErrorKind::Precondition, "solve_coboundary_linear: value group has a torus part; use torus_to_finite");
  const CubeSpace& X = *rho.space;
  const auto& cubes = X.cubes(rho.order);
  const auto& moduli = g.finite_moduli();
  LinearSolution out;
  PointFunction f(X.size(), g.zero());
  for (std::size_t j = 0; j < moduli.size(); ++j) {
    const std::int64_t m = moduli[j];
    if (m == 1) continue;
    auto run = [&](bool track) {
      ModularSystem sys(X.size(), m, track);
      for (std::size_t i = 0; i < cubes.size(); ++i) {
        ++out.equations;
        if (!sys.add_equation(coboundary_row(cubes[i], X.size(), m), rho.values[i].finite[j], i)) break;
      }
      return sys;
    };
    ModularSystem sys = run(false);
    if (!sys.consistent()) {
      ModularSystem tracked = run(true);
      out.obstruction = LinearObstruction{j, m, *tracked.certificate()};
      return out;
    }
    auto sol = sys.solve();
    if (!sol) throw Error(ErrorKind::InternalInvariant, "solve_coboundary_linear: consistent system without solution");
    for (std::size_t x = 0; x < X.size(); ++x) f[x].finite[j] = (*sol)[x];
  }
  if (coboundary(rho.space, g, f, rho.order).values != rho.values)
    throw Error(ErrorKind::InternalInvariant, "solve_coboundary_linear: solution does not reproduce the cocycle");
  out.f = std::move(f);
  return out;
}

bool verify_obstruction(const Cocycle& rho, const LinearObstruction& obs) {
  const auto& moduli = rho.group.finite_moduli();
  if (obs.component >= moduli.size() || moduli[obs.component] != obs.modulus) return false;
  const std::int64_t m = obs.modulus;
  const auto& cubes = rho.space->cubes(rho.order);
  std::vector<std::int64_t> total(rho.space->size(), 0);
  std::int64_t value = 0;
  for (auto [label, coef] : obs.certificate.combination) {
    if (label >= cubes.size()) return false;
    auto row = coboundary_row(cubes[label], rho.space->size(), m);
    for (std::size_t x = 0; x < row.size(); ++x) total[x] = mod(total[x] + mod(coef, m) * row[x], m);
    value = mod(value + mod(coef, m) * rho.values[label].finite[obs.component], m);
  }
  for (auto x : total)
    if (x != 0) return false;
  return value != 0 && value == mod(obs.certificate.value, m);
}

Cocycle torus_to_finite(const Cocycle& rho, std::int64_t modulus) {
  if (modulus < 1) throw Error(ErrorKind::InvalidArgument, "torus_to_finite: modulus must be positive");
  std::vector<std::int64_t> moduli(rho.group.torus_rank(), modulus);
  for (auto k : rho.group.finite_moduli()) moduli.push_back(k);
  Cocycle out{rho.space, rho.order, ValueGroup(0, moduli), {}};
  for (const auto& v : rho.values) {
    ValuePoint p;
    for (const auto& t : v.torus) {
      mpq_class x = t * modulus;
      if (x.get_den() != 1) throw Error(ErrorKind::InvalidArgument, "torus_to_finite: value outside (1/modulus)Z/Z");
      p.finite.push_back(mod(x.get_num().get_si(), modulus));
    }
    for (auto k : v.finite) p.finite.push_back(k);
    out.values.push_back(std::move(p));
  }
  return out;
}

PointFunction finite_to_torus(const PointFunction& f, int torus_rank, std::int64_t modulus) {
  PointFunction out;
  for (const auto& v : f) {
    if (static_cast<int>(v.finite.size()) < torus_rank || !v.torus.empty())
      throw Error(ErrorKind::InvalidArgument, "finite_to_torus: value shape");
    ValuePoint p;
    for (int i = 0; i < torus_rank; ++i) {
      mpq_class q(mod(v.finite[i], modulus), modulus);
      q.canonicalize();
      p.torus.push_back(q);
    }
    p.finite.assign(v.finite.begin() + torus_rank, v.finite.end());
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

bool is_constant(const PointFunction& f) {
  return std::all_of(f.begin(), f.end(), [&](const ValuePoint& v) { return v == f.front(); });
}

std::string key_of(const PointFunction& f) {
  std::string k;
  for (const auto& v : f) k += to_string(v) + '|';
  return k;
}

PointFunction difference(const FiniteGroup& G, const ValueGroup& vg, const PointFunction& gamma, Elem t) {
  PointFunction out(gamma.size());
  for (Elem x = 0; x < gamma.size(); ++x) out[x] = vg.sub(gamma[x], gamma[G.mul(x, t)]);
  return out;
}

mpq_class power4(int e) {
  mpq_class out = 1;
  for (int i = 0; i < e; ++i) out *= 4;
  return out;
}

// The inductive argument for d^l gamma = 0 and small gamma: every difference
// gamma_t is constant alpha(t) by induction, alpha is a homomorphism with
// small image, hence trivial, hence gamma is constant. Returns false if a
// step fails (which would contradict the argument).
class ConstancyChain {
 public:
  ConstancyChain(const FiniteGroup& G, const ValueGroup& vg) : G_(G), vg_(vg) {}

  bool run(const PointFunction& gamma, int l, std::vector<std::string>& log) {
    const std::string key = key_of(gamma) + "#" + std::to_string(l);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    bool ok = step(gamma, l, log);
    memo_.emplace(key, ok);
    return ok;
  }

 private:
  bool step(const PointFunction& gamma, int l, std::vector<std::string>& log) {
    if (l <= 1) return is_constant(gamma);
    std::vector<ValuePoint> alpha(G_.order());
    for (Elem t = 0; t < G_.order(); ++t) {
      PointFunction gt = difference(G_, vg_, gamma, t);
      if (!run(gt, l - 1, log)) return false;
      alpha[t] = gt.front();
    }
    for (Elem t = 0; t < G_.order(); ++t)
      for (Elem u = 0; u < G_.order(); ++u)
        if (vg_.add(alpha[t], alpha[u]) != alpha[G_.mul(t, u)]) return false;
    for (const auto& a : alpha)
      if (!vg_.is_zero(a)) return false;
    if (logged_.insert(l).second) {
      std::ostringstream os;
      os << "order " << l << ": differences constant; alpha is a homomorphism; alpha is trivial; gamma constant";
      log.push_back(os.str());
    }
    return is_constant(gamma);
  }

  const FiniteGroup& G_;
  const ValueGroup& vg_;
  std::map<std::string, bool> memo_;
  std::set<int> logged_;
};

}  // namespace

DegreeReport polynomial_degree(const FiniteGroup& G, const ValueGroup& vg, const PointFunction& gamma, int cap,
                               const mpq_class& window) {
  if (!G.is_abelian()) throw Error(ErrorKind::GroupMismatch, "polynomial_degree: group must be abelian");
  if (gamma.size() != G.order()) throw Error(ErrorKind::DimensionMismatch, "polynomial_degree: function size");
  for (const auto& v : gamma) vg.check(v);
  DegreeReport out;
  out.constant = is_constant(gamma);

  // level j holds the distinct j-fold difference functions; d^l gamma = 0
  // exactly when every function on level l-1 is constant
  std::vector<PointFunction> level{gamma};
  for (int l = 1; l <= cap; ++l) {
    if (std::all_of(level.begin(), level.end(), is_constant)) {
      out.degree = l;
      break;
    }
    std::map<std::string, PointFunction> next;
    for (const auto& h : level)
      for (Elem t = 0; t < G.order(); ++t) {
        auto d = difference(G, vg, h, t);
        next.emplace(key_of(d), std::move(d));
      }
    level.clear();
    for (auto& [k, h] : next) level.push_back(std::move(h));
  }
  if (!out.degree) return out;

  const int l = *out.degree;
  out.small = spread(vg, gamma) * power4(l - 1) <= window * window;
  if (out.small) {
    ConstancyChain chain(G, vg);
    if (!chain.run(gamma, l, out.chain))
      throw Error(ErrorKind::InternalInvariant, "polynomial_degree: constancy argument failed on a small function");
    out.constancy_asserted = true;
    if (!out.constant)
      throw Error(ErrorKind::InternalInvariant, "polynomial_degree: argument asserts constancy of a non-constant map");
    out.chain.push_back("order 1: gamma constant");
  }
  return out;
}

std::optional<int> direct_degree(const FiniteGroup& G, const ValueGroup& vg, const PointFunction& gamma, int cap) {
  if (!G.is_abelian()) throw Error(ErrorKind::GroupMismatch, "direct_degree: group must be abelian");
  const std::size_t n = G.order();
  // table[x + n*(h1 + n*(h2 ...))] = d^l gamma on the cube x + sum omega_i h_i
  std::vector<ValuePoint> table = gamma;
  for (int l = 0; l <= cap; ++l) {
    if (l >= 1 && std::all_of(table.begin(), table.end(), [&](const ValuePoint& v) { return vg.is_zero(v); }))
      return l;
    if (l == cap) break;
    if (table.size() * n > 4'000'000) throw Error(ErrorKind::CapExceeded, "direct_degree: table too large");
    const std::size_t stride = table.size() / n;  // number of (h_1..h_l) tuples
    std::vector<ValuePoint> next(table.size() * n);
    for (Elem h = 0; h < n; ++h)
      for (std::size_t rest = 0; rest < stride; ++rest)
        for (Elem x = 0; x < n; ++x)
          next[x + n * (rest + stride * h)] = vg.sub(table[x + n * rest], table[G.mul(x, h) + n * rest]);
    table = std::move(next);
  }
  return std::nullopt;
}

UniquenessReport check_uniqueness_theorem(const NilspaceTower& tower, const ValueGroup& vg, const PointFunction& f,
                                          int l, const mpq_class& window) {
  if (l < 1) throw Error(ErrorKind::InvalidArgument, "check_uniqueness_theorem: l must be at least 1");
  if (tower.levels.empty()) throw Error(ErrorKind::InvalidArgument, "check_uniqueness_theorem: empty tower");
  const CubeSpacePtr& X = tower.top().space;
  if (f.size() != X->size()) throw Error(ErrorKind::DimensionMismatch, "check_uniqueness_theorem: function size");
  if (spread(vg, f) * power4(l - 1) > window * window)
    throw Error(ErrorKind::Precondition, "check_uniqueness_theorem: image is not small");
  for (const auto& v : coboundary(X, vg, f, l).values)
    if (!vg.is_zero(v)) throw Error(ErrorKind::Precondition, "check_uniqueness_theorem: d^l f is not zero");

  UniquenessReport out;
  out.direct = is_constant(f);

  PointFunction cur = f;
  bool ok = true;
  for (std::size_t i = 0; i < tower.levels.size() && ok; ++i) {
    const StructureGroup& sg = tower.levels[i];
    const FactorMap& pi = sg.factor;
    PointFunction down(pi.fibers.size());
    for (Point y = 0; y < pi.fibers.size() && ok; ++y) {
      const Point x0 = pi.fibers[y].front();
      PointFunction gamma(sg.order());
      for (Elem a = 0; a < sg.order(); ++a) gamma[a] = cur[sg.act(a, x0)];
      DegreeReport d = polynomial_degree(sg.group, vg, gamma, l, window);
      if (!d.degree || *d.degree > l || !d.constancy_asserted) {
        ok = false;
        out.steps.push_back("level " + std::to_string(sg.degree) + ", fiber " + std::to_string(y) +
                            ": constancy argument does not apply");
        break;
      }
      down[y] = gamma.front();
      for (Point x : pi.fibers[y])
        if (cur[x] != down[y]) ok = false;
    }
    if (ok)
      out.steps.push_back("level " + std::to_string(sg.degree) + ": constant on all " +
                          std::to_string(pi.fibers.size()) + " fibers of the structure group");
    cur = std::move(down);
  }
  out.descent = ok && cur.size() == 1;
  if (out.descent != out.direct)
    throw Error(ErrorKind::InternalInvariant, "check_uniqueness_theorem: descent and direct inspection disagree");
  out.pass = out.direct;
  return out;
}

}  // namespace nilcube
