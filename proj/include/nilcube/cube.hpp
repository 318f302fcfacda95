#pragma once

// Vertices of {0,1}^n are stored as bitmasks: coordinate j (1-based) is bit
// j-1. The canonical vertex order is increasing mask value, which makes
// concatenation along the last coordinate a plain append.

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "nilcube/errors.hpp"

namespace nilcube {

using Point = std::uint32_t;
using Vertex = std::uint32_t;

inline constexpr int kDefaultMaxDim = 4;
inline constexpr int kHardMaxDim = 16;

inline int weight(Vertex v) { return std::popcount(v); }
inline int sign(Vertex v) { return (std::popcount(v) & 1) ? -1 : 1; }
inline std::size_t vertex_count(int n) { return std::size_t{1} << n; }

struct Face {
  int dim = 0;             // dimension of the ambient cube
  std::uint32_t mask = 0;  // fixed coordinates
  std::uint32_t bits = 0;  // values of the fixed coordinates (subset of mask)

  int codim() const { return std::popcount(mask); }
  int free_dim() const { return dim - codim(); }
  bool contains(Vertex v) const { return (v & mask) == bits; }
  // The vertex of the ambient cube at local index u of the face.
  Vertex embed(std::uint32_t u) const;
  bool operator==(const Face&) const = default;
};

Face whole_face(int n);
// The codimension-1 face {omega_k = bit}, k is 1-based.
Face coordinate_face(int n, int k, int bit);
// The face {omega' : omega' >= v coordinatewise}, of codimension |v|.
Face upper_face(int n, Vertex v);
Face make_face(int n, const std::vector<std::pair<int, int>>& fixed);

std::vector<Face> faces(int n, int k);
std::string to_string(const Face& f);

template <class T>
struct BasicConfiguration {
  int dim = 0;
  std::vector<T> values;

  BasicConfiguration() : values(1) {}
  BasicConfiguration(int n, std::vector<T> vals) : dim(n), values(std::move(vals)) {
    if (values.size() != vertex_count(n))
      throw Error(ErrorKind::DimensionMismatch, "configuration size does not match 2^dim");
  }

  static BasicConfiguration constant(int n, const T& x) {
    return BasicConfiguration(n, std::vector<T>(vertex_count(n), x));
  }

  const T& operator[](Vertex v) const { return values[v]; }
  T& operator[](Vertex v) { return values[v]; }
  std::size_t size() const { return values.size(); }

  bool operator==(const BasicConfiguration&) const = default;
  auto operator<=>(const BasicConfiguration& o) const {
    if (auto c = dim <=> o.dim; c != 0) return c;
    return values <=> o.values;
  }
};

using Configuration = BasicConfiguration<Point>;

// [c1, c2]_k : c1 where omega_k = 0 and c2 where omega_k = 1.
template <class T>
BasicConfiguration<T> concat(const BasicConfiguration<T>& c1, const BasicConfiguration<T>& c2,
                             int k) {
  if (c1.dim != c2.dim) throw Error(ErrorKind::DimensionMismatch, "concat: dimension mismatch");
  const int n = c1.dim;
  if (k < 1 || k > n + 1) throw Error(ErrorKind::InvalidArgument, "concat: coordinate out of range");
  const Vertex low = (Vertex{1} << (k - 1)) - 1;
  std::vector<T> out;
  out.reserve(vertex_count(n + 1));
  for (Vertex v = 0; v < vertex_count(n + 1); ++v) {
    Vertex u = (v & low) | ((v >> k) << (k - 1));
    out.push_back(((v >> (k - 1)) & 1) ? c2.values[u] : c1.values[u]);
  }
  return BasicConfiguration<T>(n + 1, std::move(out));
}

template <class T>
BasicConfiguration<T> restrict(const BasicConfiguration<T>& c, const Face& f) {
  if (f.dim != c.dim) throw Error(ErrorKind::InvalidArgument, "restrict: face belongs to another cube");
  const int m = f.free_dim();
  std::vector<T> out;
  out.reserve(vertex_count(m));
  for (std::uint32_t u = 0; u < vertex_count(m); ++u) out.push_back(c.values[f.embed(u)]);
  return BasicConfiguration<T>(m, std::move(out));
}

// Writes the restriction into `out`, reusing its storage.
template <class T>
void restrict_into(const BasicConfiguration<T>& c, const Face& f, BasicConfiguration<T>& out) {
  const int m = f.free_dim();
  out.dim = m;
  out.values.resize(vertex_count(m));
  for (std::uint32_t u = 0; u < vertex_count(m); ++u) out.values[u] = c.values[f.embed(u)];
}

template <class T>
BasicConfiguration<T> corner(const T& x, const T& y, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "corner: dimension must be at least 1");
  auto c = BasicConfiguration<T>::constant(n, x);
  c.values.back() = y;
  return c;
}

// The (m+k)-configuration equal to c2 where the last k coordinates are all 1
// and to c1 elsewhere; c1 and c2 live on the first m coordinates.
template <class T>
BasicConfiguration<T> corner(const BasicConfiguration<T>& c1, const BasicConfiguration<T>& c2,
                             int k) {
  if (c1.dim != c2.dim) throw Error(ErrorKind::DimensionMismatch, "corner: dimension mismatch");
  if (k < 0) throw Error(ErrorKind::InvalidArgument, "corner: negative dimension");
  const int m = c1.dim;
  const Vertex low = static_cast<Vertex>(vertex_count(m) - 1);
  const Vertex top = static_cast<Vertex>(vertex_count(k) - 1);
  std::vector<T> out;
  out.reserve(vertex_count(m + k));
  for (Vertex v = 0; v < vertex_count(m + k); ++v)
    out.push_back((v >> m) == top ? c2.values[v & low] : c1.values[v & low]);
  return BasicConfiguration<T>(m + k, std::move(out));
}

template <class T>
BasicConfiguration<T> duplicate(const BasicConfiguration<T>& c, int m) {
  if (m < 0) throw Error(ErrorKind::InvalidArgument, "duplicate: negative dimension");
  const Vertex low = static_cast<Vertex>(vertex_count(c.dim) - 1);
  std::vector<T> out;
  out.reserve(vertex_count(c.dim + m));
  for (Vertex v = 0; v < vertex_count(c.dim + m); ++v) out.push_back(c.values[v & low]);
  return BasicConfiguration<T>(c.dim + m, std::move(out));
}

// Sum over vertices of (-1)^{|omega|} c(omega) for a carrier given by
// zero/add/negate operations.
template <class T, class Add, class Neg>
T alternating_sum(const BasicConfiguration<T>& c, T zero, Add add, Neg neg) {
  T acc = std::move(zero);
  for (Vertex v = 0; v < c.size(); ++v)
    acc = add(acc, (weight(v) & 1) ? neg(c.values[v]) : c.values[v]);
  return acc;
}

// Pointwise application of a map on points.
template <class T, class F>
auto map_configuration(const BasicConfiguration<T>& c, F&& f) {
  using U = decltype(f(c.values[0]));
  std::vector<U> out;
  out.reserve(c.size());
  for (const auto& x : c.values) out.push_back(f(x));
  return BasicConfiguration<U>(c.dim, std::move(out));
}

Configuration apply(const std::vector<Point>& phi, const Configuration& c);
// [phi]_F . c : apply phi on the vertices of F only.
Configuration apply_on_face(const std::vector<Point>& phi, const Face& f, const Configuration& c);

std::string to_string(const Configuration& c);

}  // namespace nilcube
