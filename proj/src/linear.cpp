#include "nilcube/linear.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>

#include "nilcube/errors.hpp"

namespace nilcube {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw Error(ErrorKind::InternalInvariant, "integer overflow");
  return r;
}

std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_sub_overflow(a, b, &r)) throw Error(ErrorKind::InternalInvariant, "integer overflow");
  return r;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw Error(ErrorKind::InternalInvariant, "integer overflow");
  return r;
}

std::int64_t mulmod(std::int64_t a, std::int64_t b, std::int64_t m) {
  return static_cast<std::int64_t>((static_cast<__int128>(a) * b) % m);
}

}  // namespace

std::int64_t mod(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

std::int64_t ext_gcd(std::int64_t a, std::int64_t b, std::int64_t& s, std::int64_t& t) {
  std::int64_t old_r = a, r = b, old_s = 1, cur_s = 0, old_t = 0, cur_t = 1;
  while (r != 0) {
    std::int64_t q = old_r / r;
    std::int64_t tmp = old_r - q * r;
    old_r = r, r = tmp;
    tmp = old_s - q * cur_s;
    old_s = cur_s, cur_s = tmp;
    tmp = old_t - q * cur_t;
    old_t = cur_t, cur_t = tmp;
  }
  if (old_r < 0) old_r = -old_r, old_s = -old_s, old_t = -old_t;
  s = old_s;
  t = old_t;
  return old_r;
}

std::optional<std::int64_t> divide_mod(std::int64_t p, std::int64_t a, std::int64_t m) {
  p = mod(p, m);
  a = mod(a, m);
  std::int64_t s, t;
  std::int64_t g = ext_gcd(p, m, s, t);  // s*p = g (mod m)
  if (g == 0) return a == 0 ? std::optional<std::int64_t>(0) : std::nullopt;
  if (a % g != 0) return std::nullopt;
  std::int64_t mg = m / g;
  return mod(mulmod(mod(s, mg), (a / g) % mg, mg), mg);
}

// ---------------------------------------------------------------------------

SmithForm smith_normal_form(IntMatrix a, std::size_t cols) {
  const std::size_t rows = a.size();
  for (auto& r : a)
    if (r.size() != cols) throw Error(ErrorKind::DimensionMismatch, "smith_normal_form: ragged matrix");
  SmithForm out;
  out.V.assign(cols, std::vector<std::int64_t>(cols, 0));
  out.V_inv = out.V;
  for (std::size_t i = 0; i < cols; ++i) out.V[i][i] = out.V_inv[i][i] = 1;

  auto swap_cols = [&](std::size_t x, std::size_t y) {
    if (x == y) return;
    for (auto& r : a) std::swap(r[x], r[y]);
    for (auto& r : out.V) std::swap(r[x], r[y]);
    std::swap(out.V_inv[x], out.V_inv[y]);
  };
  // col_j -= q * col_t
  auto col_op = [&](std::size_t j, std::size_t t, std::int64_t q) {
    for (auto& r : a) r[j] = checked_sub(r[j], checked_mul(q, r[t]));
    for (auto& r : out.V) r[j] = checked_sub(r[j], checked_mul(q, r[t]));
    for (std::size_t c = 0; c < cols; ++c)
      out.V_inv[t][c] = checked_add(out.V_inv[t][c], checked_mul(q, out.V_inv[j][c]));
  };
  auto row_op = [&](std::size_t i, std::size_t t, std::int64_t q) {
    for (std::size_t c = 0; c < cols; ++c) a[i][c] = checked_sub(a[i][c], checked_mul(q, a[t][c]));
  };

  const std::size_t lim = std::min(rows, cols);
  std::size_t t = 0;
  for (; t < lim; ++t) {
    // smallest nonzero entry of the trailing block
    std::size_t bi = rows, bj = cols;
    std::int64_t best = 0;
    for (std::size_t i = t; i < rows; ++i)
      for (std::size_t j = t; j < cols; ++j)
        if (a[i][j] != 0 && (best == 0 || std::llabs(a[i][j]) < best)) best = std::llabs(a[i][j]), bi = i, bj = j;
    if (best == 0) break;
    std::swap(a[t], a[bi]);
    swap_cols(t, bj);
    while (true) {
      bool clean = true;
      for (std::size_t i = t + 1; i < rows; ++i) {
        if (a[i][t] == 0) continue;
        row_op(i, t, a[i][t] / a[t][t]);
        if (a[i][t] != 0) std::swap(a[i], a[t]), clean = false;
      }
      for (std::size_t j = t + 1; j < cols; ++j) {
        if (a[t][j] == 0) continue;
        col_op(j, t, a[t][j] / a[t][t]);
        if (a[t][j] != 0) swap_cols(j, t), clean = false;
      }
      if (!clean) continue;
      bool divisible = true;
      for (std::size_t i = t + 1; i < rows && divisible; ++i)
        for (std::size_t j = t + 1; j < cols; ++j)
          if (a[i][j] % a[t][t] != 0) {
            for (std::size_t c = 0; c < cols; ++c) a[t][c] = checked_add(a[t][c], a[i][c]);
            divisible = false;
            break;
          }
      if (divisible) break;
    }
  }
  out.diagonal.assign(cols, 0);
  for (std::size_t i = 0; i < t; ++i) out.diagonal[i] = std::llabs(a[i][i]);
  return out;
}

// ---------------------------------------------------------------------------

ModularSystem::ModularSystem(std::size_t unknowns, std::int64_t modulus, bool track)
    : n_(unknowns), m_(modulus), track_(track), basis_(unknowns) {
  if (modulus < 1) throw Error(ErrorKind::InvalidArgument, "ModularSystem: modulus must be positive");
}

std::size_t ModularSystem::rank() const {
  return static_cast<std::size_t>(std::count_if(basis_.begin(), basis_.end(),
                                                [](const auto& r) { return r.has_value(); }));
}

void ModularSystem::axpy(Row& r, std::int64_t q, const Row& b) const {
  q = mod(q, m_);
  if (q == 0) return;
  for (std::size_t j = 0; j < n_; ++j)
    if (b.a[j]) r.a[j] = mod(r.a[j] + mulmod(q, b.a[j], m_), m_);
  r.rhs = mod(r.rhs + mulmod(q, b.rhs, m_), m_);
  if (!track_) return;
  std::vector<std::pair<std::size_t, std::int64_t>> merged;
  merged.reserve(r.combo.size() + b.combo.size());
  auto i = r.combo.begin();
  auto k = b.combo.begin();
  while (i != r.combo.end() || k != b.combo.end()) {
    if (k == b.combo.end() || (i != r.combo.end() && i->first < k->first)) {
      merged.push_back(*i++);
    } else if (i == r.combo.end() || k->first < i->first) {
      merged.emplace_back(k->first, mulmod(q, k->second, m_));
      ++k;
    } else {
      std::int64_t v = mod(i->second + mulmod(q, k->second, m_), m_);
      if (v) merged.emplace_back(i->first, v);
      ++i, ++k;
    }
  }
  r.combo = std::move(merged);
}

ModularSystem::Row ModularSystem::scaled(const Row& r, std::int64_t q) const {
  Row out;
  out.a.assign(n_, 0);
  axpy(out, q, r);
  return out;
}

void ModularSystem::push_saturation(std::vector<Row>& pending, const Row& b, std::size_t col) const {
  std::int64_t s, t;
  std::int64_t h = ext_gcd(b.a[col], m_, s, t);
  if (h <= 1) return;
  Row r = scaled(b, m_ / h);
  bool nonzero = r.rhs != 0 || std::any_of(r.a.begin(), r.a.end(), [](std::int64_t x) { return x != 0; });
  if (nonzero) pending.push_back(std::move(r));
}

bool ModularSystem::add_equation(const std::vector<std::int64_t>& coeffs, std::int64_t rhs,
                                 std::size_t label) {
  if (certificate_) return false;
  if (coeffs.size() != n_) throw Error(ErrorKind::DimensionMismatch, "ModularSystem: row length");
  Row start;
  start.a.resize(n_);
  for (std::size_t j = 0; j < n_; ++j) start.a[j] = mod(coeffs[j], m_);
  start.rhs = mod(rhs, m_);
  if (track_) start.combo.emplace_back(label, mod(1, m_));
  std::vector<Row> pending;
  pending.push_back(std::move(start));
  while (!pending.empty()) {
    Row r = std::move(pending.back());
    pending.pop_back();
    bool placed = false;
    for (std::size_t col = 0; col < n_ && !placed; ++col) {
      std::int64_t a = r.a[col];
      if (a == 0) continue;
      if (!basis_[col]) {
        basis_[col] = std::move(r);
        push_saturation(pending, *basis_[col], col);
        placed = true;
        break;
      }
      Row& b = *basis_[col];
      std::int64_t p = b.a[col];
      if (auto q = divide_mod(p, a, m_)) {
        axpy(r, -*q, b);
        continue;
      }
      std::int64_t s, t;
      std::int64_t g = ext_gcd(p, a, s, t);
      Row nb = scaled(b, s);
      axpy(nb, t, r);
      Row other = scaled(b, a / g);
      axpy(other, -(p / g), r);
      b = std::move(nb);
      push_saturation(pending, b, col);
      r = std::move(other);
    }
    if (!placed && r.rhs != 0) {
      Certificate cert;
      cert.combination = std::move(r.combo);
      cert.value = r.rhs;
      certificate_ = std::move(cert);
      return false;
    }
  }
  return true;
}

std::optional<std::vector<std::int64_t>> ModularSystem::solve() const {
  if (certificate_) return std::nullopt;
  std::vector<std::int64_t> y(n_, 0);
  for (std::size_t c = n_; c-- > 0;) {
    if (!basis_[c]) continue;
    const Row& b = *basis_[c];
    std::int64_t val = b.rhs;
    for (std::size_t j = c + 1; j < n_; ++j) val = mod(val - mulmod(b.a[j], y[j], m_), m_);
    auto q = divide_mod(b.a[c], val, m_);
    if (!q) throw Error(ErrorKind::InternalInvariant, "ModularSystem: back substitution failed");
    y[c] = *q;
  }
  return y;
}

}  // namespace nilcube
