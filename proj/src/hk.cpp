#include "nilcube/hk.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "nilcube/linear.hpp"

namespace nilcube {

namespace {

// Open addressing set of 64-bit codes; the all-ones word marks empty slots.
class CodeSet {
 public:
  explicit CodeSet(std::size_t expected) {
    std::size_t cap = 16;
    while (cap < 2 * expected) cap <<= 1;
    slots_.assign(cap, kEmpty);
  }
  bool insert(std::uint64_t x) {
    if (2 * (count_ + 1) > slots_.size()) grow();
    return place(x);
  }

 private:
  static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};
  static std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    return x;
  }
  bool place(std::uint64_t x) {
    const std::size_t m = slots_.size() - 1;
    for (std::size_t i = mix(x) & m;; i = (i + 1) & m) {
      if (slots_[i] == x) return false;
      if (slots_[i] == kEmpty) {
        slots_[i] = x;
        ++count_;
        return true;
      }
    }
  }
  void grow() {
    std::vector<std::uint64_t> old;
    old.swap(slots_);
    slots_.assign(old.size() * 2, kEmpty);
    count_ = 0;
    for (auto x : old)
      if (x != kEmpty) place(x);
  }
  std::vector<std::uint64_t> slots_;
  std::size_t count_ = 0;
};

// Peels upper faces off the configuration v -> reps[v] * gamma_v, choosing
// gamma_v in `lattice` (which contains the identity) by backtracking.
class Peeler {
 public:
  Peeler(const Filtration& f, int n, const std::vector<Elem>& lattice)
      : f_(f), g_(f.group()), n_(n), lattice_(lattice), N_(vertex_count(n)), L_(buffer(0, (N_ + 1) * N_)),
        x_(buffer(1, N_)) {}

  bool run(const std::vector<Elem>& reps, std::vector<Elem>* factors) {
    std::fill(L_.begin(), L_.begin() + N_, g_.identity());
    std::fill(x_.begin(), x_.end(), g_.identity());
    bool ok = step(0, reps);
    if (ok && factors) *factors = x_;
    return ok;
  }

 private:
  bool step(Vertex v, const std::vector<Elem>& reps) {
    if (v == N_) return true;
    const Elem* L = &L_[v * N_];
    Elem* next = &L_[(v + 1) * N_];
    const Elem base = g_.mul(L[v], reps[v]);
    const int codim = weight(v);
    for (Elem gamma : lattice_) {
      const Elem x = lattice_.size() == 1 ? base : g_.mul(base, gamma);
      if (!f_.contains(codim, x)) continue;
      const Elem xi = g_.inv(x);
      std::copy(L, L + N_, next);
      for (Vertex w = v; w < N_; ++w)
        if ((w & v) == v) next[w] = g_.mul(xi, next[w]);
      x_[v] = x;
      if (step(v + 1, reps)) return true;
    }
    return false;
  }

  const Filtration& f_;
  const FiniteGroup& g_;
  int n_;
  const std::vector<Elem>& lattice_;
  std::size_t N_;
  // Scratch space reused across calls on the same thread.
  static std::vector<Elem>& buffer(int which, std::size_t size) {
    thread_local std::vector<Elem> bufs[2];
    bufs[which].resize(size);
    return bufs[which];
  }
  std::vector<Elem>& L_;  // row v: left multipliers before vertex v is treated
  std::vector<Elem>& x_;
};

void check_hk_dim(int n) {
  if (n < 0 || n > kHardMaxDim) throw Error(ErrorKind::InvalidArgument, "cube dimension out of range");
}

}  // namespace

GroupConfiguration face_element(const FiniteGroup& g, int n, const Face& f, Elem x) {
  if (f.dim != n) throw Error(ErrorKind::DimensionMismatch, "face_element: face of another cube");
  auto c = GroupConfiguration::constant(n, g.identity());
  for (Vertex v = 0; v < c.size(); ++v)
    if (f.contains(v)) c[v] = x;
  return c;
}

GroupConfiguration pointwise_mul(const FiniteGroup& g, const GroupConfiguration& a,
                                 const GroupConfiguration& b) {
  if (a.dim != b.dim) throw Error(ErrorKind::DimensionMismatch, "pointwise_mul: dimensions differ");
  GroupConfiguration out = a;
  for (Vertex v = 0; v < a.size(); ++v) out[v] = g.mul(a[v], b[v]);
  return out;
}

GroupConfiguration pointwise_inv(const FiniteGroup& g, const GroupConfiguration& a) {
  GroupConfiguration out = a;
  for (auto& x : out.values) x = g.inv(x);
  return out;
}

std::optional<std::vector<Elem>> hk_factorization(const Filtration& f, const GroupConfiguration& c) {
  check_hk_dim(c.dim);
  for (Elem x : c.values)
    if (x >= f.group().order()) throw Error(ErrorKind::InvalidArgument, "configuration entry outside the group");
  const std::vector<Elem> trivial{f.group().identity()};
  Peeler p(f, c.dim, trivial);
  std::vector<Elem> factors;
  if (!p.run(c.values, &factors)) return std::nullopt;
  return factors;
}

bool hk_membership(const Filtration& f, const GroupConfiguration& c) {
  return hk_factorization(f, c).has_value();
}

GroupConfiguration hk_product(const Filtration& f, int n, const std::vector<Elem>& factors) {
  const auto& g = f.group();
  if (factors.size() != vertex_count(n)) throw Error(ErrorKind::DimensionMismatch, "hk_product: factor count");
  auto c = GroupConfiguration::constant(n, g.identity());
  for (Vertex v = 0; v < c.size(); ++v)
    for (Vertex w = v; w < c.size(); ++w)
      if ((w & v) == v) c[w] = g.mul(c[w], factors[v]);
  return c;
}

std::uint64_t hk_order(const Filtration& f, int n) {
  check_hk_dim(n);
  std::uint64_t out = 1;
  for (Vertex v = 0; v < vertex_count(n); ++v) {
    std::uint64_t m = f.level(weight(v)).size();
    if (__builtin_mul_overflow(out, m, &out)) throw Error(ErrorKind::CapExceeded, "hk_order overflows 64 bits");
  }
  return out;
}

std::vector<HKGenerator> hk_generators(const Filtration& f, int n) {
  check_hk_dim(n);
  const auto& g = f.group();
  std::vector<HKGenerator> out;
  for (int k = 0; k <= n; ++k) {
    std::vector<Elem> gens, span{g.identity()};
    for (Elem x : f.level(k))
      if (!std::binary_search(span.begin(), span.end(), x)) {
        gens.push_back(x);
        span = generate_subgroup(g, gens);
      }
    for (const Face& face : faces(n, k))
      for (Elem x : gens) out.push_back({face, x});
  }
  return out;
}

// ---------------------------------------------------------------------------

HKClosure::HKClosure(const Filtration& f, int n, std::size_t cap) : n_(n), base_(f.group().order()) {
  check_hk_dim(n);
  const auto& g = f.group();
  const std::size_t N = vertex_count(n);
  std::vector<std::uint64_t> pw(N, 1);
  unsigned __int128 span = 1;
  for (std::size_t v = 0; v < N; ++v) {
    pw[v] = static_cast<std::uint64_t>(span);
    span *= base_;
    if (span >> 63) throw Error(ErrorKind::CapExceeded, "HKClosure: configurations do not fit in 63 bits");
  }
  const auto gens = hk_generators(f, n);
  std::vector<std::vector<Vertex>> support(gens.size());
  for (std::size_t i = 0; i < gens.size(); ++i)
    for (Vertex v = 0; v < N; ++v)
      if (gens[i].face.contains(v)) support[i].push_back(v);

  const std::uint64_t id_code = [&] {
    std::uint64_t c = 0;
    for (std::size_t v = 0; v < N; ++v) c += pw[v] * g.identity();
    return c;
  }();
  CodeSet seen(std::min<std::size_t>(cap, 1 << 20));
  seen.insert(id_code);
  elements_.push_back(id_code);
  std::vector<Elem> digits(N);
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    std::uint64_t code = elements_[i];
    for (std::size_t v = 0; v < N; ++v) digits[v] = static_cast<Elem>((code / pw[v]) % base_);
    for (std::size_t j = 0; j < gens.size(); ++j) {
      std::uint64_t next = code;
      for (Vertex v : support[j]) {
        Elem y = g.mul(digits[v], gens[j].element);
        next = next - pw[v] * digits[v] + pw[v] * y;
      }
      if (seen.insert(next)) {
        if (elements_.size() >= cap) throw Error(ErrorKind::CapExceeded, "HKClosure: closure exceeds the cap");
        elements_.push_back(next);
      }
    }
  }
  std::sort(elements_.begin(), elements_.end());
}

std::uint64_t HKClosure::encode(const GroupConfiguration& c) const {
  if (c.dim != n_) throw Error(ErrorKind::DimensionMismatch, "HKClosure: dimension");
  std::uint64_t code = 0, p = 1;
  for (Elem x : c.values) {
    code += p * x;
    p *= base_;
  }
  return code;
}

GroupConfiguration HKClosure::decode(std::uint64_t code) const {
  std::vector<Elem> vals(vertex_count(n_));
  for (auto& x : vals) {
    x = static_cast<Elem>(code % base_);
    code /= base_;
  }
  return GroupConfiguration(n_, std::move(vals));
}

bool HKClosure::contains(const GroupConfiguration& c) const {
  return std::binary_search(elements_.begin(), elements_.end(), encode(c));
}

// ---------------------------------------------------------------------------

CubeSpacePtr dk_space(const std::vector<std::int64_t>& moduli, int s, int max_dim) {
  if (s < 1) throw Error(ErrorKind::InvalidArgument, "dk_space: degree must be at least 1");
  if (max_dim < 0 || max_dim > kHardMaxDim) throw Error(ErrorKind::InvalidArgument, "dk_space: max_dim out of range");
  const FiniteGroup A = FiniteGroup::abelian(moduli);
  const std::size_t N = A.order();
  std::vector<std::vector<std::int64_t>> coords(N);
  for (Elem a = 0; a < N; ++a) coords[a] = A.coords(a);
  // vertex lists of the (s+1)-dimensional faces, per ambient dimension
  std::vector<std::vector<std::vector<Vertex>>> faces_of(static_cast<std::size_t>(max_dim) + 1);
  for (int n = s + 1; n <= max_dim; ++n)
    for (const Face& f : faces(n, n - s - 1)) {
      std::vector<Vertex> vs;
      for (std::uint32_t u = 0; u < vertex_count(s + 1); ++u) vs.push_back(f.embed(u));
      faces_of[n].push_back(std::move(vs));
    }
  auto oracle = [coords, faces_of, moduli, s](const Configuration& c) {
    if (c.dim <= s) return true;
    for (const auto& vs : faces_of[c.dim])
      for (std::size_t i = 0; i < moduli.size(); ++i) {
        std::int64_t acc = 0;
        for (std::uint32_t u = 0; u < vs.size(); ++u) acc += sign(u) * coords[c[vs[u]]][i];
        if (mod(acc, moduli[i]) != 0) return false;
      }
    return true;
  };
  std::ostringstream name;
  name << "D_" << s << "(";
  for (std::size_t i = 0; i < moduli.size(); ++i) name << (i ? "x" : "") << "Z/" << moduli[i];
  name << ")";
  SpaceOptions opts;
  opts.max_dim = max_dim;
  opts.degree = N == 1 ? 0 : s;
  return make_space(name.str(), N, oracle, opts);
}

PointMap NilmanifoldSpace::left_multiplication(Elem g) const {
  const auto& G = filtration->group();
  PointMap out(representatives.size());
  for (Point p = 0; p < out.size(); ++p) out[p] = point_of[G.mul(g, representatives[p])];
  return out;
}

std::optional<GroupConfiguration> NilmanifoldSpace::lift(const Configuration& c) const {
  std::vector<Elem> reps(c.size());
  for (Vertex v = 0; v < c.size(); ++v) {
    if (c[v] >= representatives.size()) return std::nullopt;
    reps[v] = representatives[c[v]];
  }
  Peeler p(*filtration, c.dim, lattice);
  std::vector<Elem> factors;
  if (!p.run(reps, &factors)) return std::nullopt;
  auto out = hk_product(*filtration, c.dim, factors);
  for (Vertex v = 0; v < c.size(); ++v)
    if (point_of[out[v]] != c[v]) throw Error(ErrorKind::InternalInvariant, "nilmanifold lift left its cosets");
  return out;
}

NilmanifoldSpace nilmanifold_space(const Filtration& f, std::vector<Elem> lattice, int max_dim) {
  const auto& G = f.group();
  std::sort(lattice.begin(), lattice.end());
  lattice.erase(std::unique(lattice.begin(), lattice.end()), lattice.end());
  if (!is_subgroup(G, lattice)) throw Error(ErrorKind::NotASubgroup, "nilmanifold_space: lattice is not a subgroup");
  // put the identity first so that the common case needs no correction
  std::stable_partition(lattice.begin(), lattice.end(), [&](Elem x) { return x == G.identity(); });

  NilmanifoldSpace out;
  out.filtration = std::make_shared<const Filtration>(f);
  out.lattice = lattice;
  out.point_of.assign(G.order(), static_cast<Point>(-1));
  for (Elem g = 0; g < G.order(); ++g) {
    if (out.point_of[g] != static_cast<Point>(-1)) continue;
    const Point p = static_cast<Point>(out.representatives.size());
    out.representatives.push_back(g);
    for (Elem gamma : lattice) out.point_of[G.mul(g, gamma)] = p;
  }
  auto filt = out.filtration;
  auto reps = out.representatives;
  auto oracle = [filt, reps, lattice](const Configuration& c) {
    thread_local std::vector<Elem> r;
    r.resize(c.size());
    for (Vertex v = 0; v < c.size(); ++v) r[v] = reps[c[v]];
    Peeler p(*filt, c.dim, lattice);
    return p.run(r, nullptr);
  };
  SpaceOptions opts;
  opts.max_dim = max_dim;
  opts.degree = reps.size() == 1 ? 0 : f.degree();
  std::ostringstream name;
  name << "G/Gamma(|G|=" << G.order() << ",|Gamma|=" << lattice.size() << ")";
  out.space = make_space(name.str(), reps.size(), oracle, opts);
  return out;
}

}  // namespace nilcube
