#pragma once

// Shared fixtures and brute-force oracles for the unit tests.

#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "nilcube/cocycles.hpp"
#include "nilcube/cubespace.hpp"
#include "nilcube/groups.hpp"
#include "nilcube/hk.hpp"

namespace fixtures {

using namespace nilcube;

// Four points a + 2b with a, b in {0,1}. n-cubes (n <= 3) are the
// configurations whose a-part is affine mod 2 and whose b-part has
// alternating sum h1*h2*h3(a) on every 3-face.
CubeSpacePtr twisted_space();

// Every configuration on {0,1}^n with values below `points`, in
// lexicographic order of the value list.
std::vector<Configuration> all_configurations(std::size_t points, int n);

// The subgroup of G^{2^n} generated by the face elements [g]_F with
// g in G_{codim F}, by breadth-first closure over all of them.
std::set<std::vector<Elem>> hk_closure_bruteforce(const Filtration& f, int n);

// Is c an n-cube of D_s(Z/m_1 x ...)?  Checks that the alternating sum
// vanishes on every face of dimension s+1.
bool dk_oracle(const std::vector<std::int64_t>& moduli, int s, const Configuration& c);

PointFunction random_function(std::mt19937_64& rng, std::size_t points, const ValueGroup& vg, int numerator_bound,
                              int denominator);

}  // namespace fixtures
