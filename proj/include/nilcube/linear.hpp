#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace nilcube {

using IntMatrix = std::vector<std::vector<std::int64_t>>;

std::int64_t mod(std::int64_t a, std::int64_t m);
// Extended gcd: returns g = gcd(a, b) >= 0 with s*a + t*b = g.
std::int64_t ext_gcd(std::int64_t a, std::int64_t b, std::int64_t& s, std::int64_t& t);
// Least q in [0, m/gcd(p,m)) with q*p = a (mod m), if any.
std::optional<std::int64_t> divide_mod(std::int64_t p, std::int64_t a, std::int64_t m);

// Diagonalization of an integer matrix with `cols` columns by unimodular row and
// column operations. Only the column transform is recorded: for a row vector
// x, x*V has coordinates in which the row lattice of the input becomes the
// lattice generated by diagonal[i]*e_i.
struct SmithForm {
  std::vector<std::int64_t> diagonal;  // length cols, entries >= 0
  IntMatrix V;
  IntMatrix V_inv;
};
SmithForm smith_normal_form(IntMatrix rows, std::size_t cols);

// Incremental solver for A y = b over Z/m. Rows are kept in Howell form (row
// echelon with every annihilator multiple reduced), which makes back
// substitution always succeed on consistent systems.
class ModularSystem {
 public:
  struct Certificate {
    // Integer combination of the labelled equations whose left-hand sides
    // cancel mod m while the right-hand sides sum to `value` != 0.
    std::vector<std::pair<std::size_t, std::int64_t>> combination;
    std::int64_t value = 0;
  };

  ModularSystem(std::size_t unknowns, std::int64_t modulus, bool track_combinations = false);

  // Returns false once the system has become inconsistent.
  bool add_equation(const std::vector<std::int64_t>& coeffs, std::int64_t rhs, std::size_t label);
  bool consistent() const { return !certificate_.has_value(); }
  const std::optional<Certificate>& certificate() const { return certificate_; }
  std::size_t rank() const;

  // Free unknowns are set to 0 and pivot unknowns to their least residue,
  // processing pivots from the last column to the first.
  std::optional<std::vector<std::int64_t>> solve() const;

 private:
  struct Row {
    std::vector<std::int64_t> a;
    std::int64_t rhs = 0;
    std::vector<std::pair<std::size_t, std::int64_t>> combo;  // sorted by label
  };
  void axpy(Row& r, std::int64_t q, const Row& b) const;  // r += q*b
  Row scaled(const Row& r, std::int64_t q) const;
  void push_saturation(std::vector<Row>& pending, const Row& b, std::size_t col) const;

  std::size_t n_;
  std::int64_t m_;
  bool track_;
  std::vector<std::optional<Row>> basis_;
  std::optional<Certificate> certificate_;
};

}  // namespace nilcube
