#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nilcube/cube.hpp"

namespace nilcube {

using Elem = std::uint32_t;
using PointMap = std::vector<Point>;

inline constexpr std::size_t kMaxTableOrder = 256;

class FiniteGroup {
 public:
  enum class Kind { Table, Abelian, Heisenberg, Permutation };

  // Row-major multiplication table of size order*order; group laws are verified.
  static FiniteGroup from_table(const std::vector<Elem>& table, std::size_t order);
  // Direct sum of Z/m_i; element ids enumerate coordinate tuples lexicographically.
  static FiniteGroup abelian(const std::vector<std::int64_t>& moduli);
  // Triples (x,y,z) mod n, (x,y,z)(x',y',z') = (x+x', y+y', z+z'+x*y').
  static FiniteGroup heisenberg(std::int64_t n);
  // A set of bijections closed under composition; product a*b = a o b.
  static FiniteGroup from_permutations(std::vector<PointMap> perms);

  Kind kind() const;
  std::size_t order() const;
  Elem identity() const;
  Elem mul(Elem a, Elem b) const;
  Elem inv(Elem a) const;
  Elem commutator(Elem a, Elem b) const { return mul(mul(a, b), mul(inv(a), inv(b))); }
  bool is_abelian() const;

  const std::vector<std::int64_t>& moduli() const;  // Abelian kind
  std::int64_t heisenberg_modulus() const;          // Heisenberg kind
  std::vector<std::int64_t> coords(Elem a) const;    // Abelian or Heisenberg kind
  Elem from_coords(const std::vector<std::int64_t>& c) const;
  const PointMap& permutation(Elem a) const;         // Permutation kind
  std::optional<Elem> find_permutation(const PointMap& p) const;
  std::string describe(Elem a) const;

 private:
  struct Data;
  explicit FiniteGroup(std::shared_ptr<const Data> d) : d_(std::move(d)) {}
  std::shared_ptr<const Data> d_;
};

// Subgroup generated by `gens`, as a sorted element list.
std::vector<Elem> generate_subgroup(const FiniteGroup& g, const std::vector<Elem>& gens);
bool is_subgroup(const FiniteGroup& g, const std::vector<Elem>& elems);
std::vector<Elem> center(const FiniteGroup& g);
// Smallest k >= 1 with a^k = id.
std::int64_t element_order(const FiniteGroup& g, Elem a);

class Filtration {
 public:
  // levels[i] = G_i for i = 0..d (each a subgroup, decreasing, G_0 = G);
  // G_{d+1} = {id} is appended. G_0 = G_1 is required unless non_proper.
  Filtration(FiniteGroup g, std::vector<std::vector<Elem>> levels, bool non_proper = false);

  const FiniteGroup& group() const { return group_; }
  int degree() const { return degree_; }
  const std::vector<Elem>& level(int i) const;
  bool contains(int i, Elem a) const;

 private:
  FiniteGroup group_;
  int degree_;
  std::vector<std::vector<Elem>> levels_;
  std::vector<std::vector<char>> member_;
};

Filtration make_heisenberg(std::int64_t n);
Filtration lower_central_filtration(const FiniteGroup& g);
// G_0 = ... = G_s = G, G_{s+1} = {id}.
Filtration degree_filtration(const FiniteGroup& g, int s);

struct CommutatorWitness {
  Elem g, h;
  int i, j;
};
std::optional<CommutatorWitness> commutator_check(const Filtration& f);

// An explicit isomorphism of a finite abelian group with a direct sum of
// cyclic groups Z/m_1 + ... + Z/m_r.
struct AbelianDecomposition {
  std::vector<std::int64_t> moduli;
  std::vector<std::vector<std::int64_t>> coords_of;  // indexed by element
  std::map<std::vector<std::int64_t>, Elem> elem_of;

  Elem element(const std::vector<std::int64_t>& c) const;
  std::vector<std::int64_t> add(const std::vector<std::int64_t>& a,
                                const std::vector<std::int64_t>& b) const;
  std::vector<std::int64_t> neg(const std::vector<std::int64_t>& a) const;
};
AbelianDecomposition decompose_abelian(const FiniteGroup& g);

// ---------------------------------------------------------------------------
// Value group A = (Q/Z)^d x K with K = Z/k_1 + ... + Z/k_r.

struct ValuePoint {
  std::vector<mpq_class> torus;
  std::vector<std::int64_t> finite;
  bool operator==(const ValuePoint&) const = default;
};

class ValueGroup {
 public:
  ValueGroup() = default;
  ValueGroup(int torus_rank, std::vector<std::int64_t> finite_moduli);

  int torus_rank() const { return torus_rank_; }
  const std::vector<std::int64_t>& finite_moduli() const { return finite_; }
  bool operator==(const ValueGroup&) const = default;

  ValuePoint zero() const;
  // Reduces torus entries into [0,1) and finite entries into [0,k_i).
  ValuePoint make(std::vector<mpq_class> torus, std::vector<std::int64_t> finite = {}) const;
  ValuePoint add(const ValuePoint& a, const ValuePoint& b) const;
  ValuePoint neg(const ValuePoint& a) const;
  ValuePoint sub(const ValuePoint& a, const ValuePoint& b) const;
  ValuePoint scale(const ValuePoint& a, std::int64_t n) const;
  bool is_zero(const ValuePoint& a) const;
  void check(const ValuePoint& a) const;
  std::string describe() const;

 private:
  int torus_rank_ = 0;
  std::vector<std::int64_t> finite_;
};

std::string to_string(const ValuePoint& p);
// Parses "p/q[,p/q...][;k[,k...]]".
ValuePoint parse_value_point(const ValueGroup& g, const std::string& text);

mpq_class frac(const mpq_class& x);
// Representative of x mod 1 in [-1/2, 1/2).
mpq_class centered(const mpq_class& x);

inline const mpq_class& default_window() {
  static const mpq_class w(1, 10);
  return w;
}

// (1 - [k = k']) + minimal squared Euclidean distance between torus lifts.
mpq_class metric(const ValueGroup& g, const ValuePoint& a, const ValuePoint& b);

ValuePoint window_average(const ValueGroup& g, const std::vector<ValuePoint>& points,
                          const std::vector<mpq_class>& weights,
                          const mpq_class& window = default_window());
ValuePoint uniform_window_average(const ValueGroup& g, const std::vector<ValuePoint>& points,
                                  const mpq_class& window = default_window());

// Squared length of the diagonal of the smallest box (coordinatewise arcs)
// containing the torus parts, plus 1 if finite parts are not all equal. For
// d = 1 this is the squared diameter of sets contained in a half circle.
mpq_class spread(const ValueGroup& g, const std::vector<ValuePoint>& points);

struct ValueEmbedding {
  std::vector<std::int64_t> moduli;
  ValueGroup target;

  ValuePoint operator()(const std::vector<std::int64_t>& coords) const;
  // Inverse on the image; nullopt if p is not in the image.
  std::optional<std::vector<std::int64_t>> preimage(const ValuePoint& p) const;
};
ValueEmbedding embed_in_value_group(const std::vector<std::int64_t>& moduli);
ValueEmbedding embed_in_value_group(const FiniteGroup& g);

}  // namespace nilcube
