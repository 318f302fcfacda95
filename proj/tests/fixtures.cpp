#include "fixtures.hpp"

#include <deque>

namespace fixtures {

CubeSpacePtr twisted_space() {
  auto oracle = [](const Configuration& c) {
    auto a = [&](Vertex v) { return c[v] & 1u; };
    auto b = [&](Vertex v) { return (c[v] >> 1) & 1u; };
    if (c.dim >= 2)
      for (const auto& f : faces(c.dim, c.dim - 2))
        if (a(f.embed(0)) ^ a(f.embed(1)) ^ a(f.embed(2)) ^ a(f.embed(3))) return false;
    if (c.dim >= 3)
      for (const auto& f : faces(c.dim, c.dim - 3)) {
        unsigned sum = 0;
        for (unsigned u = 0; u < 8; ++u) sum ^= b(f.embed(u));
        const unsigned base = a(f.embed(0));
        const unsigned h = (a(f.embed(1)) ^ base) & (a(f.embed(2)) ^ base) & (a(f.embed(4)) ^ base);
        if (sum != h) return false;
      }
    return true;
  };
  SpaceOptions opts;
  opts.max_dim = 3;
  opts.degree = 2;
  return make_space("twisted", 4, oracle, opts);
}

std::vector<Configuration> all_configurations(std::size_t points, int n) {
  std::vector<Configuration> out;
  Configuration c = Configuration::constant(n, 0);
  while (true) {
    out.push_back(c);
    std::size_t v = c.size();
    while (v > 0) {
      --v;
      if (++c[v] < points) break;
      c[v] = 0;
      if (v == 0) return out;
    }
  }
}

std::set<std::vector<Elem>> hk_closure_bruteforce(const Filtration& f, int n) {
  const auto& G = f.group();
  std::vector<std::vector<Elem>> gens;
  for (int k = 0; k <= n; ++k) {
    const auto& level = f.level(k);
    for (const auto& face : faces(n, k))
      for (Elem g : level) {
        std::vector<Elem> e(vertex_count(n), G.identity());
        for (Vertex v = 0; v < e.size(); ++v)
          if (face.contains(v)) e[v] = g;
        gens.push_back(e);
      }
  }
  std::set<std::vector<Elem>> seen{std::vector<Elem>(vertex_count(n), G.identity())};
  std::deque<std::vector<Elem>> queue(seen.begin(), seen.end());
  while (!queue.empty()) {
    auto x = queue.front();
    queue.pop_front();
    for (const auto& g : gens) {
      auto y = x;
      for (std::size_t v = 0; v < y.size(); ++v) y[v] = G.mul(x[v], g[v]);
      if (seen.insert(y).second) queue.push_back(y);
    }
  }
  return seen;
}

bool dk_oracle(const std::vector<std::int64_t>& moduli, int s, const Configuration& c) {
  if (c.dim <= s) return true;
  // points are mixed-radix tuples with the first modulus most significant
  auto coord = [&](Point x, std::size_t i) {
    std::int64_t r = x;
    for (std::size_t j = moduli.size(); j-- > i + 1;) r /= moduli[j];
    return r % moduli[i];
  };
  for (const auto& f : faces(c.dim, c.dim - s - 1))
    for (std::size_t i = 0; i < moduli.size(); ++i) {
      std::int64_t sum = 0;
      for (std::uint32_t u = 0; u < vertex_count(s + 1); ++u) sum += sign(u) * coord(c[f.embed(u)], i);
      if (((sum % moduli[i]) + moduli[i]) % moduli[i] != 0) return false;
    }
  return true;
}

PointFunction random_function(std::mt19937_64& rng, std::size_t points, const ValueGroup& vg, int numerator_bound,
                              int denominator) {
  PointFunction f;
  for (std::size_t x = 0; x < points; ++x) {
    std::vector<mpq_class> torus;
    for (int i = 0; i < vg.torus_rank(); ++i)
      torus.emplace_back(static_cast<long>(rng() % (numerator_bound + 1)), denominator);
    std::vector<std::int64_t> finite;
    for (auto m : vg.finite_moduli()) finite.push_back(static_cast<std::int64_t>(rng() % m));
    f.push_back(vg.make(torus, finite));
  }
  return f;
}

}  // namespace fixtures
