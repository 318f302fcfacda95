#include "nilcube/cube.hpp"

#include <sstream>

namespace nilcube {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InvalidCodimension: return "invalid-codimension";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::UnsupportedCarrier: return "unsupported-carrier";
    case ErrorKind::GroupMismatch: return "group-mismatch";
    case ErrorKind::NotASubgroup: return "not-a-subgroup";
    case ErrorKind::WindowViolation: return "window-violation";
    case ErrorKind::MixedFiniteComponents: return "mixed-finite-components";
    case ErrorKind::NotANilspace: return "not-a-nilspace";
    case ErrorKind::StructureExtraction: return "structure-extraction";
    case ErrorKind::CapExceeded: return "cap-exceeded";
    case ErrorKind::PartialResult: return "partial-result";
    case ErrorKind::NotBijective: return "not-bijective";
    case ErrorKind::NotAFactorCube: return "not-a-factor-cube";
    case ErrorKind::NotABundleMap: return "not-a-bundle-map";
    case ErrorKind::RepresentativeDependence: return "representative-dependence";
    case ErrorKind::HKMembership: return "hk-membership";
    case ErrorKind::SmallnessBudgetExceeded: return "smallness-budget-exceeded";
    case ErrorKind::InternalInvariant: return "internal-invariant";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Parse: return "parse";
  }
  return "unknown";
}

Vertex Face::embed(std::uint32_t u) const {
  Vertex v = bits;
  for (int j = 0; j < dim; ++j) {
    if (mask & (1u << j)) continue;
    if (u & 1u) v |= 1u << j;
    u >>= 1;
  }
  return v;
}

Face whole_face(int n) { return Face{n, 0, 0}; }

Face coordinate_face(int n, int k, int bit) {
  if (k < 1 || k > n) throw Error(ErrorKind::InvalidArgument, "coordinate_face: coordinate out of range");
  Face f{n, 1u << (k - 1), bit ? (1u << (k - 1)) : 0u};
  return f;
}

Face upper_face(int n, Vertex v) { return Face{n, v, v}; }

Face make_face(int n, const std::vector<std::pair<int, int>>& fixed) {
  Face f{n, 0, 0};
  for (auto [index, bit] : fixed) {
    if (index < 0 || index >= n) throw Error(ErrorKind::InvalidArgument, "face index out of range");
    if (f.mask & (1u << index)) throw Error(ErrorKind::InvalidArgument, "face index repeated");
    f.mask |= 1u << index;
    if (bit) f.bits |= 1u << index;
  }
  return f;
}

std::vector<Face> faces(int n, int k) {
  if (k < 0 || k > n) throw Error(ErrorKind::InvalidCodimension, "faces: codimension out of range");
  if (n > kHardMaxDim) throw Error(ErrorKind::InvalidArgument, "faces: dimension too large");
  std::vector<Face> out;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != k) continue;
    // enumerate the sub-masks of `mask` in increasing order
    std::uint32_t sub = 0;
    while (true) {
      out.push_back(Face{n, mask, sub});
      if (sub == mask) break;
      sub = (sub - mask) & mask;
    }
  }
  return out;
}

std::string to_string(const Face& f) {
  std::string s;
  for (int j = 0; j < f.dim; ++j) {
    if (f.mask & (1u << j))
      s += (f.bits & (1u << j)) ? '1' : '0';
    else
      s += '*';
  }
  return s;
}

Configuration apply(const std::vector<Point>& phi, const Configuration& c) {
  Configuration out = c;
  for (auto& x : out.values) x = phi[x];
  return out;
}

Configuration apply_on_face(const std::vector<Point>& phi, const Face& f, const Configuration& c) {
  Configuration out = c;
  for (Vertex v = 0; v < out.size(); ++v)
    if (f.contains(v)) out.values[v] = phi[out.values[v]];
  return out;
}

std::string to_string(const Configuration& c) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    if (i) os << ' ';
    os << c.values[i];
  }
  os << ')';
  return os.str();
}

}  // namespace nilcube
