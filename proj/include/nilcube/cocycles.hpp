#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nilcube/cubespace.hpp"
#include "nilcube/groups.hpp"
#include "nilcube/hk.hpp"
#include "nilcube/linear.hpp"

namespace nilcube {

using PointFunction = std::vector<ValuePoint>;

// A function on the cubes C^order(X), indexed by position in X.cubes(order).
struct Cocycle {
  CubeSpacePtr space;
  int order = 0;
  ValueGroup group;
  std::vector<ValuePoint> values;

  const ValuePoint& at(const Configuration& c) const;
};

Cocycle make_cocycle(const CubeSpacePtr& X, int order, const ValueGroup& group,
                     const std::function<ValuePoint(const Configuration&)>& value);
bool operator==(const Cocycle& a, const Cocycle& b);

struct CocycleCheckOptions {
  // Additivity is checked on every glued pair when there are at most this
  // many, otherwise on `samples` random ones.
  std::size_t exhaustive_limit = 5'000'000;
  std::size_t samples = 200'000;
  std::uint64_t seed = 1;
};

struct CocycleCheck {
  bool pass = true;
  std::string axiom;  // "additivity", "reflection" or "degeneracy" on failure
  int coordinate = 0;
  std::vector<Configuration> witness;
  std::size_t examined = 0;
  bool exhaustive = true;
};

CocycleCheck check_cocycle(const Cocycle& rho, const CocycleCheckOptions& opts = {});

// sum over vertices of (-1)^{|omega|} f(c(omega)) on every l-cube.
Cocycle coboundary(const CubeSpacePtr& X, const ValueGroup& group, const PointFunction& f, int l);
// d_k rho([c1, c2]_k) = rho(c1) - rho(c2), on (order+1)-cubes.
Cocycle directional_derivative(const Cocycle& rho, int k);

// ---------------------------------------------------------------------------
// Discrepancy over the canonical factor

// A cube of X over a factor cube, checked once so that many discrepancies over
// that factor cube can share it.
class ReferenceCube {
 public:
  ReferenceCube(const StructureGroup& sg, Configuration cube);
  const Configuration& cube() const { return cube_; }
  const Configuration& base() const { return base_; }

 private:
  Configuration cube_, base_;
};

// Sum of (-1)^{|omega|} alpha(omega) in the structure group, where alpha.c = c'
// for a reference cube c over the same factor cube.
Elem discrepancy(const StructureGroup& sg, const Configuration& c);
Elem discrepancy(const StructureGroup& sg, const Configuration& c, const ReferenceCube& reference);
// The discrepancy computed against every reference cube; they must agree.
Elem discrepancy_all_references(const StructureGroup& sg, const Configuration& c);

ValueGroup structure_value_group(const StructureGroup& sg);
ValuePoint structure_value(const StructureGroup& sg, Elem a);
Elem structure_element(const StructureGroup& sg, const ValuePoint& p);

// rho_chi(c) = discrepancy of the corner of c and chi(c), on (s+1-k)-cubes.
Cocycle rho_chi(const StructureGroup& sg, const PointMap& chi, int k);

// ---------------------------------------------------------------------------
// Completion groups of D_s(A)

bool ds_is_cube(const FiniteGroup& A, int s, const GroupConfiguration& c);
// {t on {0,1}^{l-1} : [0, t] is an l-cube of D_s(A)}
std::vector<GroupConfiguration> t1_subgroup(const FiniteGroup& A, int s, int l);
// {t on {0,1}^{l-2} : [[0, 0], [0, t]] is an l-cube of D_s(A)}
std::vector<GroupConfiguration> t2_subgroup(const FiniteGroup& A, int s, int l);

struct TDecomposition {
  std::size_t t1 = 0, t1_lower = 0, t2 = 0;
  bool bijective = false;
};
// Checks that t = [v, v] + [0, u] identifies T_1^l with T_1^{l-1} x T_2^l.
TDecomposition verify_t_decomposition(const FiniteGroup& A, int s, int l);

// ---------------------------------------------------------------------------
// Solvers

struct AveragingReport {
  mpq_class input_spread = 0;
  mpq_class output_spread = 0;
  std::optional<mpq_class> ratio;
  std::size_t averages = 0;
  std::size_t invariance_checks = 0;
};

struct CoboundaryWitness {
  PointFunction f;
  AveragingReport report;
};

// f with d^l f = rho for a small-image cocycle rho on the top space of the tower.
CoboundaryWitness solve_coboundary_averaging(const NilspaceTower& tower, const Cocycle& rho,
                                             const mpq_class& window = default_window());
// f(x) = average over y of rho([x, y]) for an order-one cocycle on an ergodic space.
PointFunction integrate_order_one(const Cocycle& rho, const mpq_class& window = default_window());

struct LinearObstruction {
  std::size_t component = 0;
  std::int64_t modulus = 0;
  ModularSystem::Certificate certificate;  // labels are cube ids
};

struct LinearSolution {
  std::optional<PointFunction> f;
  std::optional<LinearObstruction> obstruction;
  std::size_t equations = 0;
};

// Solves d^l f = rho over a finite value group, one cyclic factor at a time.
LinearSolution solve_coboundary_linear(const Cocycle& rho);
bool verify_obstruction(const Cocycle& rho, const LinearObstruction& obs);

// Reads torus values p/q with q | modulus as residues mod `modulus`; the
// torus coordinates become the first finite coordinates.
Cocycle torus_to_finite(const Cocycle& rho, std::int64_t modulus);
// Inverse of the above on point functions: the first `torus_rank` finite
// coordinates r become r/modulus.
PointFunction finite_to_torus(const PointFunction& f, int torus_rank, std::int64_t modulus);

// ---------------------------------------------------------------------------
// Polynomial degree and uniqueness

struct DegreeReport {
  std::optional<int> degree;  // least l >= 1 with d^l gamma = 0 on D_1(G)
  // spread(gamma) * 4^(degree-1) <= window^2, so that every difference
  // function met in the argument stays inside the window
  bool small = false;
  bool constancy_asserted = false;
  bool constant = false;      // by inspection
  std::vector<std::string> chain;
};

// gamma is indexed by the elements of the abelian group G.
DegreeReport polynomial_degree(const FiniteGroup& G, const ValueGroup& vg, const PointFunction& gamma, int cap = 5,
                               const mpq_class& window = default_window());
// Least 1 <= l <= cap with d^l gamma = 0 on every l-cube of D_1(G), by direct summation.
std::optional<int> direct_degree(const FiniteGroup& G, const ValueGroup& vg, const PointFunction& gamma, int cap = 5);

struct UniquenessReport {
  bool pass = false;
  bool direct = false;
  bool descent = false;
  std::vector<std::string> steps;
};

// f is a function on the top space of the tower. Requires spread(f) * 4^(l-1)
// <= window^2 and d^l f = 0.
UniquenessReport check_uniqueness_theorem(const NilspaceTower& tower, const ValueGroup& vg, const PointFunction& f,
                                          int l, const mpq_class& window = default_window());

}  // namespace nilcube
