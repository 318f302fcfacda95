#pragma once

#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

#include "nilcube/cube.hpp"
#include "nilcube/cubespace.hpp"
#include "nilcube/groups.hpp"

namespace nilcube {

using GroupConfiguration = BasicConfiguration<Elem>;

// c(omega) = g on the vertices of F and the identity elsewhere.
GroupConfiguration face_element(const FiniteGroup& g, int n, const Face& f, Elem x);
GroupConfiguration pointwise_mul(const FiniteGroup& g, const GroupConfiguration& a,
                                 const GroupConfiguration& b);
GroupConfiguration pointwise_inv(const FiniteGroup& g, const GroupConfiguration& a);

// Membership in HK^n(G_.) by peeling upper faces in increasing vertex order.
bool hk_membership(const Filtration& f, const GroupConfiguration& c);

// When c is a member, the elements g_omega in G_{|omega|} with
// c = [g_0]_{U(0)} [g_1]_{U(1)} ... [g_last]_{U(last)}, U(v) the upper face of v.
std::optional<std::vector<Elem>> hk_factorization(const Filtration& f, const GroupConfiguration& c);
GroupConfiguration hk_product(const Filtration& f, int n, const std::vector<Elem>& factors);

// prod over vertices of |G_{|omega|}|.
std::uint64_t hk_order(const Filtration& f, int n);

// The generators [g]_F with F of codimension k and g running over a
// generating set of G_k, for k = 0..n.
struct HKGenerator {
  Face face;
  Elem element;
};
std::vector<HKGenerator> hk_generators(const Filtration& f, int n);

// Subgroup of G^{2^n} generated by hk_generators, by breadth-first closure.
// Configurations are encoded as base-|G| integers with vertex 0 least
// significant.
class HKClosure {
 public:
  HKClosure(const Filtration& f, int n, std::size_t cap = 1'000'000);
  std::size_t size() const { return elements_.size(); }
  bool contains(const GroupConfiguration& c) const;
  std::uint64_t encode(const GroupConfiguration& c) const;
  GroupConfiguration decode(std::uint64_t code) const;
  const std::vector<std::uint64_t>& elements() const { return elements_; }  // sorted

 private:
  int n_;
  std::uint64_t base_;
  std::vector<std::uint64_t> elements_;
};

CubeSpacePtr dk_space(const std::vector<std::int64_t>& moduli, int s, int max_dim = kDefaultMaxDim);

// The space G/Gamma of left cosets g.Gamma (points ordered by their least
// element), with cubes the images of HK^n(G_.).
struct NilmanifoldSpace {
  std::shared_ptr<const Filtration> filtration;
  std::vector<Elem> lattice;          // sorted subgroup Gamma
  std::vector<Elem> representatives;  // least element of each coset, by point id
  std::vector<Point> point_of;        // group element -> point
  CubeSpacePtr space;

  // Left multiplication x.Gamma -> (g x).Gamma as a point map.
  PointMap left_multiplication(Elem g) const;
  // A lift in HK^n(G_.) of a configuration of cosets, if one exists.
  std::optional<GroupConfiguration> lift(const Configuration& c) const;
};

NilmanifoldSpace nilmanifold_space(const Filtration& f, std::vector<Elem> lattice, int max_dim = kDefaultMaxDim);

}  // namespace nilcube
