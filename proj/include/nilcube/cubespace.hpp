#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "nilcube/cube.hpp"
#include "nilcube/groups.hpp"

namespace nilcube {

class CubeSpace;
using CubeSpacePtr = std::shared_ptr<const CubeSpace>;

struct SpaceOptions {
  int max_dim = kDefaultMaxDim;
  std::optional<int> degree;
  // Cube lists are cached when |X|^(2^n) is at most this many configurations;
  // above it membership goes to the oracle.
  std::uint64_t explicit_threshold = 10'000'000;
  // Largest cube list `cubes(n)` will build.
  std::size_t cube_cap = 2'000'000;
};

class CubeSpace {
 public:
  using Oracle = std::function<bool(const Configuration&)>;

  CubeSpace(std::string name, std::size_t points, Oracle oracle, SpaceOptions opts = {});
  CubeSpace(const CubeSpace&) = delete;
  CubeSpace& operator=(const CubeSpace&) = delete;

  const std::string& name() const { return name_; }
  std::size_t size() const { return points_; }
  int max_dim() const { return opts_.max_dim; }
  std::optional<int> degree() const { return opts_.degree; }
  const SpaceOptions& options() const { return opts_; }

  bool is_cube(const Configuration& c) const;
  bool oracle(const Configuration& c) const { return oracle_(c); }
  // All n-cubes in lexicographic order of their value lists.
  const std::vector<Configuration>& cubes(int n) const;
  std::optional<std::size_t> cube_id(const Configuration& c) const;
  bool stores_explicitly(int n) const;

 private:
  struct Level {
    std::once_flag once;
    std::vector<Configuration> cubes;
    std::atomic<bool> too_many{false};
    std::atomic<bool> built{false};
  };
  void check_dim(int n) const;

  std::string name_;
  std::size_t points_;
  Oracle oracle_;
  SpaceOptions opts_;
  std::unique_ptr<Level[]> levels_;
  std::vector<char> small_;  // |X|^(2^n) within the explicit threshold
};

CubeSpacePtr make_space(std::string name, std::size_t points, CubeSpace::Oracle oracle,
                        SpaceOptions opts = {});
// Space whose n-cubes are the listed configurations for n = 1..max (index n of
// `cubes`), closed under the symmetries of the cube; constant configurations
// are always cubes.
CubeSpacePtr table_space(std::string name, std::size_t points,
                         const std::vector<std::vector<Configuration>>& cubes, SpaceOptions opts = {});
CubeSpacePtr one_point_space(int max_dim = kDefaultMaxDim);
CubeSpacePtr product_space(const CubeSpacePtr& a, const CubeSpacePtr& b);

// The 2^n * n! coordinate permutations and reflections of {0,1}^n, as vertex maps.
std::vector<std::vector<Vertex>> cube_symmetries(int n);

// Depth-first search over configurations on {0,1}^n assigning vertices
// 0, 1, ..., last-1 in order. After a vertex v is assigned, every face whose
// top vertex is v must pass `face_ok`. `visit` returns false to stop.
struct ConfigSearch {
  int n = 0;
  Vertex last = 0;
  std::function<const std::vector<Point>&(Vertex, const Configuration&)> candidates;
  std::function<bool(const Configuration&)> face_ok;
  std::function<bool(const Configuration&)> visit;
  void run() const;
};

// Some configuration c with c(v) in fibers[target(v)] that is a cube of X.
// Candidates at each vertex are tried in increasing order, except that
// prefer(v) goes first when given.
std::optional<Configuration> find_lift(const CubeSpace& X, const std::vector<std::vector<Point>>& fibers,
                                       const Configuration& target, const Configuration* prefer = nullptr);
// Every such lift, in lexicographic order.
std::vector<Configuration> all_lifts(const CubeSpace& X, const std::vector<std::vector<Point>>& fibers,
                                     const Configuration& target, std::size_t cap = 1'000'000);

// ---------------------------------------------------------------------------
// Axiom checkers

struct CheckResult {
  bool pass = true;
  std::string name;
  std::vector<Configuration> witness;
  int coordinate = 0;
  std::size_t examined = 0;
  std::string detail;
};

CheckResult check_ergodic(const CubeSpace& X);
CheckResult check_glueing(const CubeSpace& X, int max_dim = -1);
CheckResult check_uniqueness(const CubeSpace& X, int k);
CheckResult check_completion(const CubeSpace& X, int n);

// ---------------------------------------------------------------------------
// Factors and structure groups

struct FactorMap {
  CubeSpacePtr source;
  CubeSpacePtr target;
  std::vector<Point> assignment;           // source point -> target point
  std::vector<std::vector<Point>> fibers;  // target point -> sorted source points

  Configuration project(const Configuration& c) const;
};

FactorMap canonical_factor(const CubeSpacePtr& X, int k);
FactorMap identity_factor(const CubeSpacePtr& X);

struct StructureGroup {
  CubeSpacePtr space;
  int degree = 0;
  FactorMap factor;  // canonical factor of level degree-1
  FiniteGroup group = FiniteGroup::abelian({});
  AbelianDecomposition coords;
  std::vector<std::vector<Elem>> difference;  // difference[x][y] = a with a.x = y, or kNone

  static constexpr Elem kNone = static_cast<Elem>(-1);
  Point act(Elem a, Point x) const { return group.permutation(a)[x]; }
  Elem diff(Point x, Point y) const;
  std::size_t order() const { return group.order(); }
};

StructureGroup structure_group(const CubeSpacePtr& X, int s);

// The levels s, s-1, ..., 1 of the canonical factor tower; level i acts on
// the space levels[s - i].space, and the last factor is a one-point space.
struct NilspaceTower {
  std::vector<StructureGroup> levels;
  const StructureGroup& top() const { return levels.front(); }
  int degree() const { return static_cast<int>(levels.size()); }
};

NilspaceTower build_tower(const CubeSpacePtr& X, int s);

}  // namespace nilcube
