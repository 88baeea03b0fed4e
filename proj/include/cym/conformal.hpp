#pragma once

// Conformal rescaling: hat g = Omega^2 g evaluators and the log-gradient
// Upsilon_a = Omega^{-1} nabla_a Omega. Transformation-law checks always
// recompute curvature from the rescaled metric; the laws themselves are
// the objects under test, never shortcuts.

#include "cym/catalog.hpp"
#include "cym/curvature.hpp"

namespace cym {

/// A positive conformal factor at a point together with its log-gradient.
struct ConformalFactor {
  Jet omega;            // Omega > 0
  NDArray<Jet> upsilon;  // {n}: Upsilon_a = Omega^{-1} d_a Omega, one order lower
};

inline ConformalFactor eval_conformal_factor(const ConformalFactorField& f, const ChartPoint& p,
                                             int order) {
  Jet om = f.eval(p, order);
  if (om.value() <= 0.0)
    throw domain_error("conformal factor: Omega must be positive on the domain");
  const int n = f.n;
  NDArray<Jet> ups({n}, Jet(n, order - 1));
  for (int a = 0; a < n; ++a) ups(a) = om.derivative(a) / om.truncated(order - 1);
  return {std::move(om), std::move(ups)};
}

/// hat g = Omega^2 g as a metric field; downstream consumers recompute
/// every curvature quantity from it independently.
inline MetricField rescale(const MetricField& g, const ConformalFactorField& omega) {
  if (g.n != omega.n) throw invalid_argument("rescale: dimension mismatch");
  MetricField m = g;
  m.name = g.name + "*" + omega.name;
  auto geval = g.eval;
  auto oeval = omega.eval;
  m.eval = [geval, oeval](const ChartPoint& p, int K) {
    NDArray<Jet> gg = geval(p, K);
    Jet om = oeval(p, K);
    if (om.value() <= 0.0)
      throw domain_error("rescale: Omega must be positive on the domain");
    Jet om2 = om * om;
    for (std::size_t i = 0; i < gg.size(); ++i) gg.flat(i) = gg.flat(i) * om2;
    return gg;
  };
  return m;
}

/// Product of two conformal factors (for the splitting-change composition
/// law check).
inline ConformalFactorField compose_factors(const ConformalFactorField& a,
                                            const ConformalFactorField& b) {
  ConformalFactorField f;
  f.name = a.name + "*" + b.name;
  f.n = a.n;
  auto ea = a.eval, eb = b.eval;
  f.eval = [ea, eb](const ChartPoint& p, int K) { return ea(p, K) * eb(p, K); };
  return f;
}

}  // namespace cym
