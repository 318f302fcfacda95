#include "nilcube/groups.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

#include "nilcube/linear.hpp"

namespace nilcube {

struct FiniteGroup::Data {
  Kind kind = Kind::Table;
  std::size_t order = 0;
  Elem identity = 0;
  std::vector<Elem> table;  // order*order, empty when a structured rule is used
  std::vector<Elem> inverse;
  std::vector<std::int64_t> moduli;
  std::vector<std::int64_t> strides;
  std::int64_t heis = 0;
  std::vector<PointMap> perms;
  std::map<PointMap, Elem> perm_index;
  bool abelian = false;

  void tabulate_small() {
    if (order > 1024) return;
    std::vector<Elem> t(order * order);
    for (Elem a = 0; a < order; ++a)
      for (Elem b = 0; b < order; ++b) t[a * order + b] = rule_mul(a, b);
    table = std::move(t);
  }

  Elem rule_mul(Elem a, Elem b) const {
    switch (kind) {
      case Kind::Abelian: {
        Elem out = 0;
        for (std::size_t i = 0; i < moduli.size(); ++i) {
          std::int64_t x = (a / strides[i]) % moduli[i];
          std::int64_t y = (b / strides[i]) % moduli[i];
          out += static_cast<Elem>(((x + y) % moduli[i]) * strides[i]);
        }
        return out;
      }
      case Kind::Heisenberg: {
        const std::int64_t n = heis;
        std::int64_t x = a / (n * n), y = (a / n) % n, z = a % n;
        std::int64_t x2 = b / (n * n), y2 = (b / n) % n, z2 = b % n;
        std::int64_t rx = (x + x2) % n, ry = (y + y2) % n, rz = (z + z2 + x * y2) % n;
        return static_cast<Elem>(rx * n * n + ry * n + rz);
      }
      case Kind::Permutation: {
        const PointMap& p = perms[a];
        const PointMap& q = perms[b];
        PointMap r(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) r[i] = p[q[i]];
        return perm_index.at(r);
      }
      case Kind::Table: break;
    }
    return table[a * order + b];
  }
};

FiniteGroup FiniteGroup::from_table(const std::vector<Elem>& table, std::size_t order) {
  if (order == 0 || order > kMaxTableOrder)
    throw Error(ErrorKind::InvalidArgument, "table group order must be in 1..256");
  if (table.size() != order * order)
    throw Error(ErrorKind::InvalidArgument, "table size does not match order");
  for (Elem x : table)
    if (x >= order) throw Error(ErrorKind::InvalidArgument, "table entry out of range");
  auto d = std::make_shared<Data>();
  d->kind = Kind::Table;
  d->order = order;
  d->table = table;
  auto m = [&](Elem a, Elem b) { return table[a * order + b]; };
  bool found = false;
  for (Elem e = 0; e < order && !found; ++e) {
    bool ok = true;
    for (Elem a = 0; a < order && ok; ++a) ok = m(e, a) == a && m(a, e) == a;
    if (ok) d->identity = e, found = true;
  }
  if (!found) throw Error(ErrorKind::InvalidArgument, "table has no identity");
  for (Elem a = 0; a < order; ++a)
    for (Elem b = 0; b < order; ++b)
      for (Elem c = 0; c < order; ++c)
        if (m(m(a, b), c) != m(a, m(b, c))) throw Error(ErrorKind::InvalidArgument, "table is not associative");
  d->inverse.assign(order, 0);
  for (Elem a = 0; a < order; ++a) {
    bool ok = false;
    for (Elem b = 0; b < order && !ok; ++b)
      if (m(a, b) == d->identity && m(b, a) == d->identity) d->inverse[a] = b, ok = true;
    if (!ok) throw Error(ErrorKind::InvalidArgument, "table element without inverse");
  }
  d->abelian = true;
  for (Elem a = 0; a < order && d->abelian; ++a)
    for (Elem b = 0; b < order; ++b)
      if (m(a, b) != m(b, a)) {
        d->abelian = false;
        break;
      }
  return FiniteGroup(std::move(d));
}

FiniteGroup FiniteGroup::abelian(const std::vector<std::int64_t>& moduli) {
  auto d = std::make_shared<Data>();
  d->kind = Kind::Abelian;
  d->moduli = moduli;
  std::size_t order = 1;
  for (auto m : moduli) {
    if (m < 1) throw Error(ErrorKind::InvalidArgument, "abelian group: moduli must be positive");
    order *= static_cast<std::size_t>(m);
    if (order > (std::size_t{1} << 31)) throw Error(ErrorKind::CapExceeded, "abelian group too large");
  }
  d->order = order;
  d->strides.assign(moduli.size(), 1);
  for (std::size_t i = moduli.size(); i-- > 1;) d->strides[i - 1] = d->strides[i] * moduli[i];
  d->identity = 0;
  d->abelian = true;
  d->inverse.resize(order);
  for (Elem a = 0; a < order; ++a) {
    Elem out = 0;
    for (std::size_t i = 0; i < moduli.size(); ++i) {
      std::int64_t x = (a / d->strides[i]) % moduli[i];
      out += static_cast<Elem>(((moduli[i] - x) % moduli[i]) * d->strides[i]);
    }
    d->inverse[a] = out;
  }
  d->tabulate_small();
  return FiniteGroup(std::move(d));
}

FiniteGroup FiniteGroup::heisenberg(std::int64_t n) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "Heisenberg modulus must be at least 2");
  if (n > 1000) throw Error(ErrorKind::CapExceeded, "Heisenberg modulus too large");
  auto d = std::make_shared<Data>();
  d->kind = Kind::Heisenberg;
  d->heis = n;
  d->order = static_cast<std::size_t>(n * n * n);
  d->identity = 0;
  d->abelian = false;
  d->inverse.resize(d->order);
  for (Elem a = 0; a < d->order; ++a) {
    std::int64_t x = a / (n * n), y = (a / n) % n, z = a % n;
    // (x,y,z)^{-1} = (-x, -y, -z + x*y)
    std::int64_t ix = (n - x) % n, iy = (n - y) % n, iz = mod(-z + x * y, n);
    d->inverse[a] = static_cast<Elem>(ix * n * n + iy * n + iz);
  }
  d->tabulate_small();
  return FiniteGroup(std::move(d));
}

FiniteGroup FiniteGroup::from_permutations(std::vector<PointMap> perms) {
  if (perms.empty()) throw Error(ErrorKind::InvalidArgument, "permutation group needs elements");
  std::sort(perms.begin(), perms.end());
  perms.erase(std::unique(perms.begin(), perms.end()), perms.end());
  auto d = std::make_shared<Data>();
  d->kind = Kind::Permutation;
  d->order = perms.size();
  const std::size_t npts = perms.front().size();
  PointMap id(npts);
  std::iota(id.begin(), id.end(), Point{0});
  for (std::size_t i = 0; i < perms.size(); ++i) {
    if (perms[i].size() != npts) throw Error(ErrorKind::InvalidArgument, "permutations on different sets");
    d->perm_index.emplace(perms[i], static_cast<Elem>(i));
  }
  auto it = d->perm_index.find(id);
  if (it == d->perm_index.end()) throw Error(ErrorKind::InvalidArgument, "permutation set lacks the identity");
  d->identity = it->second;
  d->perms = std::move(perms);
  const std::size_t n = d->order;
  const bool tabulate = n <= 1024;
  if (tabulate) d->table.resize(n * n);
  PointMap r(npts);
  for (Elem a = 0; a < n; ++a)
    for (Elem b = 0; b < n; ++b) {
      const PointMap& p = d->perms[a];
      const PointMap& q = d->perms[b];
      for (std::size_t i = 0; i < npts; ++i) r[i] = p[q[i]];
      auto f = d->perm_index.find(r);
      if (f == d->perm_index.end())
        throw Error(ErrorKind::InvalidArgument, "permutation set is not closed under composition");
      if (tabulate) d->table[a * n + b] = f->second;
    }
  d->inverse.resize(n);
  for (Elem a = 0; a < n; ++a) {
    PointMap inv(npts);
    for (std::size_t i = 0; i < npts; ++i) inv[d->perms[a][i]] = static_cast<Point>(i);
    auto f = d->perm_index.find(inv);
    if (f == d->perm_index.end()) throw Error(ErrorKind::InvalidArgument, "permutation set not closed under inverse");
    d->inverse[a] = f->second;
  }
  d->abelian = true;
  for (Elem a = 0; a < n && d->abelian; ++a)
    for (Elem b = a + 1; b < n; ++b)
      if (d->rule_mul(a, b) != d->rule_mul(b, a)) {
        d->abelian = false;
        break;
      }
  return FiniteGroup(std::move(d));
}

FiniteGroup::Kind FiniteGroup::kind() const { return d_->kind; }
std::size_t FiniteGroup::order() const { return d_->order; }
Elem FiniteGroup::identity() const { return d_->identity; }
Elem FiniteGroup::inv(Elem a) const { return d_->inverse[a]; }
bool FiniteGroup::is_abelian() const { return d_->abelian; }

Elem FiniteGroup::mul(Elem a, Elem b) const {
  if (!d_->table.empty()) return d_->table[a * d_->order + b];
  return d_->rule_mul(a, b);
}

const std::vector<std::int64_t>& FiniteGroup::moduli() const {
  if (d_->kind != Kind::Abelian) throw Error(ErrorKind::UnsupportedCarrier, "moduli: not an abelian-product group");
  return d_->moduli;
}

std::int64_t FiniteGroup::heisenberg_modulus() const {
  if (d_->kind != Kind::Heisenberg) throw Error(ErrorKind::UnsupportedCarrier, "not a Heisenberg group");
  return d_->heis;
}

std::vector<std::int64_t> FiniteGroup::coords(Elem a) const {
  if (d_->kind == Kind::Abelian) {
    std::vector<std::int64_t> c(d_->moduli.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = (a / d_->strides[i]) % d_->moduli[i];
    return c;
  }
  if (d_->kind == Kind::Heisenberg) {
    const std::int64_t n = d_->heis;
    return {a / (n * n), (a / n) % n, a % n};
  }
  throw Error(ErrorKind::UnsupportedCarrier, "coords: group has no coordinate rule");
}

Elem FiniteGroup::from_coords(const std::vector<std::int64_t>& c) const {
  if (d_->kind == Kind::Abelian) {
    if (c.size() != d_->moduli.size()) throw Error(ErrorKind::DimensionMismatch, "from_coords: arity");
    Elem out = 0;
    for (std::size_t i = 0; i < c.size(); ++i)
      out += static_cast<Elem>(mod(c[i], d_->moduli[i]) * d_->strides[i]);
    return out;
  }
  if (d_->kind == Kind::Heisenberg) {
    if (c.size() != 3) throw Error(ErrorKind::DimensionMismatch, "from_coords: Heisenberg needs 3 coordinates");
    const std::int64_t n = d_->heis;
    return static_cast<Elem>(mod(c[0], n) * n * n + mod(c[1], n) * n + mod(c[2], n));
  }
  throw Error(ErrorKind::UnsupportedCarrier, "from_coords: group has no coordinate rule");
}

const PointMap& FiniteGroup::permutation(Elem a) const {
  if (d_->kind != Kind::Permutation) throw Error(ErrorKind::UnsupportedCarrier, "not a permutation group");
  return d_->perms[a];
}

std::optional<Elem> FiniteGroup::find_permutation(const PointMap& p) const {
  auto it = d_->perm_index.find(p);
  if (it == d_->perm_index.end()) return std::nullopt;
  return it->second;
}

std::string FiniteGroup::describe(Elem a) const {
  std::ostringstream os;
  if (d_->kind == Kind::Abelian || d_->kind == Kind::Heisenberg) {
    auto c = coords(a);
    os << '(';
    for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
    os << ')';
  } else if (d_->kind == Kind::Permutation) {
    os << '[';
    const auto& p = d_->perms[a];
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? " " : "") << p[i];
    os << ']';
  } else {
    os << a;
  }
  return os.str();
}

std::vector<Elem> generate_subgroup(const FiniteGroup& g, const std::vector<Elem>& gens) {
  std::vector<char> seen(g.order(), 0);
  std::vector<Elem> out{g.identity()};
  seen[g.identity()] = 1;
  for (std::size_t i = 0; i < out.size(); ++i)
    for (Elem s : gens) {
      Elem x = g.mul(out[i], s);
      if (!seen[x]) seen[x] = 1, out.push_back(x);
    }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_subgroup(const FiniteGroup& g, const std::vector<Elem>& elems) {
  if (elems.empty()) return false;
  std::vector<char> in(g.order(), 0);
  for (Elem x : elems) {
    if (x >= g.order()) return false;
    in[x] = 1;
  }
  if (!in[g.identity()]) return false;
  for (Elem a : elems) {
    if (!in[g.inv(a)]) return false;
    for (Elem b : elems)
      if (!in[g.mul(a, b)]) return false;
  }
  return true;
}

std::vector<Elem> center(const FiniteGroup& g) {
  std::vector<Elem> out;
  for (Elem a = 0; a < g.order(); ++a) {
    bool central = true;
    for (Elem b = 0; b < g.order() && central; ++b) central = g.mul(a, b) == g.mul(b, a);
    if (central) out.push_back(a);
  }
  return out;
}

std::int64_t element_order(const FiniteGroup& g, Elem a) {
  std::int64_t k = 1;
  for (Elem x = a; x != g.identity(); x = g.mul(x, a)) ++k;
  return k;
}

// ---------------------------------------------------------------------------

Filtration::Filtration(FiniteGroup g, std::vector<std::vector<Elem>> levels, bool non_proper)
    : group_(std::move(g)) {
  if (levels.empty()) throw Error(ErrorKind::InvalidArgument, "filtration needs at least G_0");
  for (auto& l : levels) {
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
    if (!is_subgroup(group_, l)) throw Error(ErrorKind::NotASubgroup, "filtration level is not a subgroup");
  }
  if (levels[0].size() != group_.order()) throw Error(ErrorKind::InvalidArgument, "G_0 must be the whole group");
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (!std::includes(levels[i - 1].begin(), levels[i - 1].end(), levels[i].begin(), levels[i].end()))
      throw Error(ErrorKind::InvalidArgument, "filtration levels must decrease");
  if (!non_proper && levels.size() > 1 && levels[1].size() != levels[0].size())
    throw Error(ErrorKind::InvalidArgument, "G_1 differs from G_0 but the filtration is not flagged non-proper");
  // trailing trivial levels do not count towards the degree
  while (levels.size() > 1 && levels.back().size() == 1) levels.pop_back();
  degree_ = static_cast<int>(levels.size()) - 1;
  if (levels.size() == 1 && levels[0].size() == 1) degree_ = 0;
  levels.push_back({group_.identity()});
  levels_ = std::move(levels);
  member_.resize(levels_.size());
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    member_[i].assign(group_.order(), 0);
    for (Elem x : levels_[i]) member_[i][x] = 1;
  }
}

const std::vector<Elem>& Filtration::level(int i) const {
  if (i < 0) throw Error(ErrorKind::InvalidArgument, "negative filtration index");
  if (static_cast<std::size_t>(i) >= levels_.size()) return levels_.back();
  return levels_[i];
}

bool Filtration::contains(int i, Elem a) const {
  if (static_cast<std::size_t>(i) >= member_.size()) return a == group_.identity();
  return member_[i][a] != 0;
}

Filtration lower_central_filtration(const FiniteGroup& g) {
  std::vector<std::vector<Elem>> levels;
  std::vector<Elem> all(g.order());
  std::iota(all.begin(), all.end(), Elem{0});
  levels.push_back(all);
  levels.push_back(all);
  while (levels.back().size() > 1) {
    std::set<Elem> comms;
    for (Elem a = 0; a < g.order(); ++a)
      for (Elem b : levels.back()) comms.insert(g.commutator(a, b));
    auto next = generate_subgroup(g, std::vector<Elem>(comms.begin(), comms.end()));
    if (next.size() == levels.back().size()) throw Error(ErrorKind::InvalidArgument, "group is not nilpotent");
    levels.push_back(std::move(next));
  }
  return Filtration(g, levels);
}

Filtration make_heisenberg(std::int64_t n) {
  Filtration f = lower_central_filtration(FiniteGroup::heisenberg(n));
  if (commutator_check(f)) throw Error(ErrorKind::InternalInvariant, "Heisenberg filtration fails the commutator law");
  return f;
}

Filtration degree_filtration(const FiniteGroup& g, int s) {
  if (s < 0) throw Error(ErrorKind::InvalidArgument, "degree must be nonnegative");
  std::vector<Elem> all(g.order());
  std::iota(all.begin(), all.end(), Elem{0});
  std::vector<std::vector<Elem>> levels(static_cast<std::size_t>(s) + 1, all);
  return Filtration(g, levels);
}

std::optional<CommutatorWitness> commutator_check(const Filtration& f) {
  const int d = f.degree();
  const auto& g = f.group();
  for (int i = 0; i <= d + 1; ++i)
    for (int j = 0; i + j <= d + 1; ++j)
      for (Elem a : f.level(i))
        for (Elem b : f.level(j))
          if (!f.contains(i + j, g.commutator(a, b))) return CommutatorWitness{a, b, i, j};
  return std::nullopt;
}

// ---------------------------------------------------------------------------

Elem AbelianDecomposition::element(const std::vector<std::int64_t>& c) const {
  std::vector<std::int64_t> r(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) r[i] = mod(c[i], moduli[i]);
  return elem_of.at(r);
}

std::vector<std::int64_t> AbelianDecomposition::add(const std::vector<std::int64_t>& a,
                                                    const std::vector<std::int64_t>& b) const {
  std::vector<std::int64_t> r(moduli.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = mod(a[i] + b[i], moduli[i]);
  return r;
}

std::vector<std::int64_t> AbelianDecomposition::neg(const std::vector<std::int64_t>& a) const {
  std::vector<std::int64_t> r(moduli.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = mod(-a[i], moduli[i]);
  return r;
}

AbelianDecomposition decompose_abelian(const FiniteGroup& g) {
  if (!g.is_abelian()) throw Error(ErrorKind::UnsupportedCarrier, "decompose_abelian: group is not abelian");
  AbelianDecomposition out;
  const std::size_t n = g.order();
  out.coords_of.resize(n);
  if (g.kind() == FiniteGroup::Kind::Abelian) {
    out.moduli = g.moduli();
    for (Elem a = 0; a < n; ++a) {
      out.coords_of[a] = g.coords(a);
      out.elem_of.emplace(out.coords_of[a], a);
    }
    return out;
  }
  // Greedy generating set, then the relation lattice among the generators.
  std::vector<Elem> gens;
  std::vector<Elem> span{g.identity()};
  std::vector<char> in(n, 0);
  in[g.identity()] = 1;
  for (Elem e = 0; e < n; ++e) {
    if (in[e]) continue;
    gens.push_back(e);
    span = generate_subgroup(g, gens);
    std::fill(in.begin(), in.end(), 0);
    for (Elem x : span) in[x] = 1;
  }
  const std::size_t r = gens.size();
  std::vector<std::int64_t> ord(r);
  for (std::size_t i = 0; i < r; ++i) ord[i] = element_order(g, gens[i]);
  IntMatrix rel;
  for (std::size_t i = 0; i < r; ++i) {
    std::vector<std::int64_t> row(r, 0);
    row[i] = ord[i];
    rel.push_back(row);
  }
  std::vector<std::vector<std::int64_t>> first(n);
  std::vector<char> have(n, 0);
  std::vector<std::int64_t> a(r, 0);
  while (true) {
    Elem x = g.identity();
    for (std::size_t i = 0; i < r; ++i)
      for (std::int64_t k = 0; k < a[i]; ++k) x = g.mul(x, gens[i]);
    if (!have[x]) {
      have[x] = 1;
      first[x] = a;
    } else {
      std::vector<std::int64_t> row(r);
      for (std::size_t i = 0; i < r; ++i) row[i] = a[i] - first[x][i];
      rel.push_back(row);
    }
    std::size_t i = 0;
    while (i < r && ++a[i] == ord[i]) a[i++] = 0;
    if (i == r) break;
  }
  SmithForm snf = smith_normal_form(rel, r);
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < r; ++j) {
    if (snf.diagonal[j] == 0) throw Error(ErrorKind::InternalInvariant, "decompose_abelian: infinite factor");
    if (snf.diagonal[j] > 1) keep.push_back(j);
  }
  for (std::size_t j : keep) out.moduli.push_back(snf.diagonal[j]);
  for (Elem x = 0; x < n; ++x) {
    std::vector<std::int64_t> c;
    for (std::size_t j : keep) {
      std::int64_t v = 0;
      for (std::size_t i = 0; i < r; ++i) v += first[x][i] * snf.V[i][j];
      c.push_back(mod(v, snf.diagonal[j]));
    }
    out.coords_of[x] = c;
    if (!out.elem_of.emplace(c, x).second)
      throw Error(ErrorKind::InternalInvariant, "decompose_abelian: coordinates not injective");
  }
  for (Elem x = 0; x < n; ++x)
    for (Elem y = 0; y < n; ++y)
      if (out.coords_of[g.mul(x, y)] != out.add(out.coords_of[x], out.coords_of[y]))
        throw Error(ErrorKind::InternalInvariant, "decompose_abelian: coordinates not additive");
  return out;
}

// ---------------------------------------------------------------------------

mpq_class frac(const mpq_class& x) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  mpq_class r = x - mpq_class(q);
  r.canonicalize();
  return r;
}

mpq_class centered(const mpq_class& x) {
  mpq_class r = frac(x);
  if (r >= mpq_class(1, 2)) r -= 1;
  return r;
}

ValueGroup::ValueGroup(int torus_rank, std::vector<std::int64_t> finite_moduli)
    : torus_rank_(torus_rank), finite_(std::move(finite_moduli)) {
  if (torus_rank < 0) throw Error(ErrorKind::InvalidArgument, "torus rank must be nonnegative");
  for (auto m : finite_)
    if (m < 1) throw Error(ErrorKind::InvalidArgument, "finite moduli must be positive");
}

ValuePoint ValueGroup::zero() const {
  ValuePoint p;
  p.torus.assign(torus_rank_, mpq_class(0));
  p.finite.assign(finite_.size(), 0);
  return p;
}

ValuePoint ValueGroup::make(std::vector<mpq_class> torus, std::vector<std::int64_t> finite) const {
  if (finite.empty()) finite.assign(finite_.size(), 0);
  if (torus.size() != static_cast<std::size_t>(torus_rank_) || finite.size() != finite_.size())
    throw Error(ErrorKind::GroupMismatch, "value point has the wrong shape");
  ValuePoint p;
  p.torus.reserve(torus.size());
  for (auto& t : torus) p.torus.push_back(frac(t));
  p.finite.resize(finite.size());
  for (std::size_t i = 0; i < finite.size(); ++i) p.finite[i] = mod(finite[i], finite_[i]);
  return p;
}

void ValueGroup::check(const ValuePoint& a) const {
  if (a.torus.size() != static_cast<std::size_t>(torus_rank_) || a.finite.size() != finite_.size())
    throw Error(ErrorKind::GroupMismatch, "value point belongs to another value group");
}

ValuePoint ValueGroup::add(const ValuePoint& a, const ValuePoint& b) const {
  check(a);
  check(b);
  ValuePoint p;
  p.torus.resize(a.torus.size());
  for (std::size_t i = 0; i < a.torus.size(); ++i) {
    p.torus[i] = a.torus[i] + b.torus[i];
    if (p.torus[i] >= 1) p.torus[i] -= 1;
  }
  p.finite.resize(a.finite.size());
  for (std::size_t i = 0; i < a.finite.size(); ++i) p.finite[i] = (a.finite[i] + b.finite[i]) % finite_[i];
  return p;
}

ValuePoint ValueGroup::neg(const ValuePoint& a) const {
  check(a);
  ValuePoint p;
  p.torus.resize(a.torus.size());
  for (std::size_t i = 0; i < a.torus.size(); ++i) p.torus[i] = a.torus[i] == 0 ? mpq_class(0) : mpq_class(1 - a.torus[i]);
  p.finite.resize(a.finite.size());
  for (std::size_t i = 0; i < a.finite.size(); ++i) p.finite[i] = (finite_[i] - a.finite[i]) % finite_[i];
  return p;
}

ValuePoint ValueGroup::sub(const ValuePoint& a, const ValuePoint& b) const { return add(a, neg(b)); }

ValuePoint ValueGroup::scale(const ValuePoint& a, std::int64_t n) const {
  check(a);
  ValuePoint p;
  for (const auto& t : a.torus) p.torus.push_back(frac(t * n));
  for (std::size_t i = 0; i < a.finite.size(); ++i)
    p.finite.push_back(mod(static_cast<std::int64_t>((static_cast<__int128>(a.finite[i]) * n) % finite_[i]), finite_[i]));
  return p;
}

bool ValueGroup::is_zero(const ValuePoint& a) const {
  check(a);
  for (const auto& t : a.torus)
    if (t != 0) return false;
  for (auto x : a.finite)
    if (x != 0) return false;
  return true;
}

std::string ValueGroup::describe() const {
  std::ostringstream os;
  os << "(Q/Z)^" << torus_rank_;
  for (auto m : finite_) os << " x Z/" << m;
  return os.str();
}

std::string to_string(const ValuePoint& p) {
  std::ostringstream os;
  for (std::size_t i = 0; i < p.torus.size(); ++i) os << (i ? "," : "") << p.torus[i].get_str();
  if (!p.finite.empty()) {
    os << ';';
    for (std::size_t i = 0; i < p.finite.size(); ++i) os << (i ? "," : "") << p.finite[i];
  }
  return os.str();
}

ValuePoint parse_value_point(const ValueGroup& g, const std::string& text) {
  auto split = [](const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : s) {
      if (ch == sep) {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    parts.push_back(cur);
    return parts;
  };
  std::string torus_part = text, finite_part;
  if (auto pos = text.find(';'); pos != std::string::npos) {
    torus_part = text.substr(0, pos);
    finite_part = text.substr(pos + 1);
  }
  std::vector<mpq_class> torus;
  if (!torus_part.empty()) {
    for (const auto& tok : split(torus_part, ',')) {
      mpq_class q;
      if (tok.empty() || q.set_str(tok, 10) != 0) throw Error(ErrorKind::Parse, "bad rational '" + tok + "'");
      if (q.get_den() == 0) throw Error(ErrorKind::Parse, "zero denominator in '" + tok + "'");
      q.canonicalize();
      torus.push_back(q);
    }
  }
  std::vector<std::int64_t> finite;
  if (!finite_part.empty()) {
    for (const auto& tok : split(finite_part, ',')) {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != tok.size()) throw Error(ErrorKind::Parse, "bad finite component '" + tok + "'");
      finite.push_back(v);
    }
  }
  if (torus.size() != static_cast<std::size_t>(g.torus_rank()))
    throw Error(ErrorKind::Parse, "value '" + text + "' has the wrong number of torus components");
  if (finite.size() != g.finite_moduli().size() && !(finite.empty()))
    throw Error(ErrorKind::Parse, "value '" + text + "' has the wrong number of finite components");
  return g.make(std::move(torus), std::move(finite));
}

mpq_class metric(const ValueGroup& g, const ValuePoint& a, const ValuePoint& b) {
  g.check(a);
  g.check(b);
  mpq_class out = a.finite == b.finite ? 0 : 1;
  for (std::size_t i = 0; i < a.torus.size(); ++i) {
    mpq_class d = centered(a.torus[i] - b.torus[i]);
    out += d * d;
  }
  return out;
}

ValuePoint window_average(const ValueGroup& g, const std::vector<ValuePoint>& points,
                          const std::vector<mpq_class>& weights, const mpq_class& window) {
  if (points.empty()) throw Error(ErrorKind::InvalidArgument, "window_average: empty input");
  if (weights.size() != points.size()) throw Error(ErrorKind::InvalidArgument, "window_average: weight count");
  mpq_class total = 0;
  for (const auto& w : weights) total += w;
  if (total != 1) throw Error(ErrorKind::InvalidArgument, "window_average: weights must sum to 1");
  const ValuePoint& anchor = points.front();
  g.check(anchor);
  const mpq_class w2 = window * window;
  std::vector<std::vector<mpq_class>> lifts(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    g.check(points[k]);
    if (points[k].finite != anchor.finite)
      throw Error(ErrorKind::MixedFiniteComponents, "window_average: finite components differ");
    if (metric(g, anchor, points[k]) > w2)
      throw Error(ErrorKind::WindowViolation, "window_average: point outside the window around the anchor");
    lifts[k].resize(anchor.torus.size());
    for (std::size_t i = 0; i < anchor.torus.size(); ++i)
      lifts[k][i] = anchor.torus[i] + centered(points[k].torus[i] - anchor.torus[i]);
  }
  for (std::size_t a = 0; a < lifts.size(); ++a)
    for (std::size_t b = a + 1; b < lifts.size(); ++b) {
      mpq_class d2 = 0;
      for (std::size_t i = 0; i < lifts[a].size(); ++i) {
        mpq_class d = lifts[a][i] - lifts[b][i];
        d2 += d * d;
      }
      if (d2 > w2) throw Error(ErrorKind::WindowViolation, "window_average: diameter exceeds the window");
    }
  std::vector<mpq_class> avg(anchor.torus.size(), mpq_class(0));
  for (std::size_t k = 0; k < lifts.size(); ++k)
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += weights[k] * lifts[k][i];
  return g.make(std::move(avg), anchor.finite);
}

ValuePoint uniform_window_average(const ValueGroup& g, const std::vector<ValuePoint>& points,
                                  const mpq_class& window) {
  if (points.empty()) throw Error(ErrorKind::InvalidArgument, "window_average: empty input");
  std::vector<mpq_class> w(points.size(), mpq_class(1, static_cast<unsigned long>(points.size())));
  return window_average(g, points, w, window);
}

mpq_class spread(const ValueGroup& g, const std::vector<ValuePoint>& points) {
  if (points.empty()) return 0;
  mpq_class out = 0;
  for (const auto& p : points) {
    g.check(p);
    if (p.finite != points.front().finite) {
      out = 1;
      break;
    }
  }
  for (int i = 0; i < g.torus_rank(); ++i) {
    std::vector<mpq_class> xs;
    xs.reserve(points.size());
    for (const auto& p : points) xs.push_back(p.torus[i]);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    mpq_class gap = xs.front() + 1 - xs.back();
    for (std::size_t k = 1; k < xs.size(); ++k) gap = std::max(gap, mpq_class(xs[k] - xs[k - 1]));
    mpq_class arc = 1 - gap;
    out += arc * arc;
  }
  return out;
}

ValuePoint ValueEmbedding::operator()(const std::vector<std::int64_t>& coords) const {
  if (coords.size() != moduli.size()) throw Error(ErrorKind::GroupMismatch, "embedding: arity");
  std::vector<mpq_class> t;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    mpq_class q(mod(coords[i], moduli[i]), moduli[i]);
    q.canonicalize();
    t.push_back(q);
  }
  return target.make(std::move(t));
}

std::optional<std::vector<std::int64_t>> ValueEmbedding::preimage(const ValuePoint& p) const {
  target.check(p);
  std::vector<std::int64_t> c;
  for (std::size_t i = 0; i < moduli.size(); ++i) {
    mpq_class x = p.torus[i] * moduli[i];
    if (x.get_den() != 1) return std::nullopt;
    c.push_back(x.get_num().get_si());
  }
  return c;
}

ValueEmbedding embed_in_value_group(const std::vector<std::int64_t>& moduli) {
  for (auto m : moduli)
    if (m < 1) throw Error(ErrorKind::InvalidArgument, "embedding: moduli must be positive");
  return ValueEmbedding{moduli, ValueGroup(static_cast<int>(moduli.size()), {})};
}

ValueEmbedding embed_in_value_group(const FiniteGroup& g) {
  if (!g.is_abelian()) throw Error(ErrorKind::UnsupportedCarrier, "embedding: group is not abelian");
  return embed_in_value_group(decompose_abelian(g).moduli);
}

}  // namespace nilcube
