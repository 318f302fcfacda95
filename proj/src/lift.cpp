#include <sstream>

#include "nilcube/cocycles.hpp"
#include "nilcube/translations.hpp"

namespace nilcube {

LiftResult lift_translation(const StructureGroup& sg, const PointMap& phibar, int k) {
  const int s = sg.degree;
  if (k < 0 || k > s) throw Error(ErrorKind::InvalidArgument, "lift_translation: k must lie in 0..s");
  const FactorMap& pi = sg.factor;
  const CubeSpace& X = *sg.space;
  const CubeSpace& Y = *pi.target;
  if (!is_bijection(phibar, Y.size())) throw Error(ErrorKind::NotBijective, "lift_translation: factor map is not a bijection");
  if (!is_k_translation(Y, phibar, k))
    throw Error(ErrorKind::Precondition, "lift_translation: factor map is not a k-translation of the factor");

  LiftResult out;
  // section: least point of each fiber; psi(a.sigma(y)) = a.sigma(phibar(y))
  out.psi.resize(X.size());
  for (Point x = 0; x < X.size(); ++x) {
    const Point y = pi.assignment[x];
    out.psi[x] = sg.act(sg.diff(pi.fibers[y].front(), x), pi.fibers[phibar[y]].front());
  }
  const Cocycle rho = rho_chi(sg, out.psi, k);
  out.cocycle_ok = check_cocycle(rho).pass;
  if (!out.cocycle_ok) throw Error(ErrorKind::InternalInvariant, "lift_translation: rho_psi is not a cocycle");

  // The corner of c and f.psi(c) has discrepancy rho(c) + (-1)^k d^l f(c), so
  // we need d^l f = (-1)^(k+1) rho.
  Cocycle target = rho;
  if (k % 2 == 0)
    for (auto& v : target.values) v = rho.group.neg(v);
  LinearSolution sol = solve_coboundary_linear(target);
  out.equations = sol.equations;
  if (!sol.f) {
    const auto& obs = *sol.obstruction;
    out.certificate = LiftCertificate{obs.component, obs.modulus, obs.certificate};
    return out;
  }
  out.lift.resize(X.size());
  for (Point x = 0; x < X.size(); ++x) out.lift[x] = sg.act(structure_element(sg, (*sol.f)[x]), out.psi[x]);
  if (!is_bijection(out.lift, X.size()))
    throw Error(ErrorKind::InternalInvariant, "lift_translation: corrected map is not a bijection");
  out.is_translation = is_k_translation(X, out.lift, k);
  out.pushforward_ok = pushforward(pi, out.lift) == phibar;
  if (!out.is_translation || !out.pushforward_ok)
    throw Error(ErrorKind::InternalInvariant, "lift_translation: corrected map fails verification");
  out.lifted = true;
  return out;
}

}  // namespace nilcube
