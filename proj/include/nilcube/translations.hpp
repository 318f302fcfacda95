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

PointMap identity_map(std::size_t n);
PointMap compose(const PointMap& a, const PointMap& b);  // a o b
PointMap inverse(const PointMap& a);
bool is_bijection(const PointMap& a, std::size_t n);
std::string to_string(const PointMap& a);

enum class TranslationMethod { Auto, Definition, Corner };

// Definition path: [phi]_F . c is a cube for every cube c of dimension
// max(k,1)..max_dim (max_dim < 0 means the space's cap) and every face F of
// codimension k. Corner path: the corner configuration of c and phi(c) is an
// (s+1)-cube for every (s+1-k)-cube c, s the space's degree. Auto uses the
// corner path when the degree is known.
bool is_k_translation(const CubeSpace& X, const PointMap& phi, int k,
                      TranslationMethod method = TranslationMethod::Auto, int max_dim = -1);

struct TranslationGroup {
  CubeSpacePtr space;
  int level = 0;
  std::vector<PointMap> elements;  // sorted; the identity comes first

  std::size_t order() const { return elements.size(); }
  bool contains(const PointMap& p) const;
  std::vector<PointMap> generators() const;
};

struct EnumerationOptions {
  std::size_t point_cap = 81;
  std::uint64_t node_budget = 20'000'000;
  // Pruning uses cubes of dimension at most this (and never lists with more
  // than prune_cube_cap cubes).
  int prune_max_dim = 3;
  std::size_t prune_cube_cap = 1'000'000;
  // Restricts the image of each point; empty means unrestricted. The maps it
  // admits must form a group (the search works coset by coset).
  std::function<bool(Point, Point)> allowed;
  TranslationMethod method = TranslationMethod::Auto;
};

// Thrown when a search stops early; carries the subgroup generated by what
// was found.
class PartialResult : public Error {
 public:
  PartialResult(const std::string& what, TranslationGroup found)
      : Error(ErrorKind::PartialResult, what), found_(std::move(found)) {}
  const TranslationGroup& found() const { return found_; }

 private:
  TranslationGroup found_;
};

TranslationGroup enumerate_translations(const CubeSpacePtr& X, int k, const EnumerationOptions& opts = {});
// Filters all |X|! bijections; only for |X| <= 9.
std::vector<PointMap> enumerate_translations_bruteforce(const CubeSpace& X, int k,
                                                        TranslationMethod method = TranslationMethod::Auto);

struct FiltrationWitness {
  int i = 0, j = 0;
  PointMap a, b, commutator;
  std::string reason;
};
// groups[t] must be Aut_{groups[0].level + t}. Checks nesting and
// [Aut_i, Aut_j] in Aut_{i+j}; levels beyond the list are tested directly.
std::optional<FiltrationWitness> check_filtration_property(const std::vector<TranslationGroup>& groups);

// pi_*(phi), verified over every fiber representative.
PointMap pushforward(const FactorMap& pi, const PointMap& phi);

// Aut_1 >= Aut_2 >= ... as a filtered permutation group (G_0 = G_1 = Aut_1).
struct TranslationFiltration {
  CubeSpacePtr space;
  std::vector<TranslationGroup> levels;  // levels[i] = Aut_{i+1}
  FiniteGroup group = FiniteGroup::abelian({});
  std::shared_ptr<const Filtration> filtration;

  Elem element(const PointMap& p) const;
};
TranslationFiltration translation_filtration(const CubeSpacePtr& X, int top_level = -1,
                                             const EnumerationOptions& opts = {});

// Pointwise application of Phi in HK^n(Aut_.) to the cube c.
Configuration hk_act(const TranslationFiltration& tf, const GroupConfiguration& Phi, const Configuration& c);

// ---------------------------------------------------------------------------
// Lifting a translation of the canonical factor through the top structure group.

struct LiftCertificate {
  std::size_t component = 0;  // cyclic factor of the structure group
  std::int64_t modulus = 0;
  ModularSystem::Certificate combination;  // labels are cube ids of C^{s+1-k}
};

struct LiftResult {
  bool lifted = false;
  PointMap psi;   // section-built bundle map over phibar
  PointMap lift;  // f . psi when lifted
  bool cocycle_ok = false;
  bool is_translation = false;
  bool pushforward_ok = false;
  std::optional<LiftCertificate> certificate;
  std::size_t equations = 0;
};

LiftResult lift_translation(const StructureGroup& sg, const PointMap& phibar, int k);

}  // namespace nilcube
