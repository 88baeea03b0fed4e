#pragma once

// The Levi-Civita curvature stack: Christoffel, Riemann, Ricci, scalar
// curvature, Schouten, its trace J, Weyl, Cotton and Bach, in the
// commutator sign convention [nabla_a, nabla_b] v^c = R_ab^c_d v^d.
// Everything is scalar-generic: S = Jet at chart points, S = the Laurent
// collar scalar for conformally compactified bulk metrics.

#include <optional>

#include "cym/fields.hpp"

namespace cym {

template <class S>
struct CurvatureStack {
  int n = 0;
  MetricValue<S> metric;
  NDArray<S> gamma;     // {n,n,n}: Gamma^a_{bc}
  NDArray<S> riemann;   // {n,n,n,n}: R_ab^c_d
  NDArray<S> ricci;     // {n,n}: R_bc = R_ab^a_c
  S scalar;             // R
  NDArray<S> schouten;  // {n,n}
  S j_trace;            // J = g^{ab} P_ab

  std::optional<NDArray<S>> weyl_lo;  // {n,n,n,n}: W_abcd, all indices down
  std::optional<NDArray<S>> cotton;   // {n,n,n}: C_abc = 2 nabla_[a P_b]c
  std::optional<NDArray<S>> bach;     // {n,n}
};

/// Gamma^a_{bc} = 1/2 g^{ad} (d_b g_{dc} + d_c g_{bd} - d_d g_{bc}).
template <class S>
NDArray<S> christoffel(const MetricValue<S>& m) {
  const int n = m.n;
  const S zero = zero_like(m.g(0, 0));
  // one derivative of the metric
  NDArray<S> dg({n, n, n}, zero);  // dg(c,a,b) = d_c g_{ab}
  for (int c = 0; c < n; ++c)
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        dg(c, a, b) = m.g(a, b).derivative(c);
        if (a != b) dg(c, b, a) = dg(c, a, b);
      }
  NDArray<S> gamma({n, n, n}, zero);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = b; c < n; ++c) {
        S acc = zero;
        for (int d = 0; d < n; ++d) {
          S bracket = dg(b, d, c) + dg(c, b, d) - dg(d, b, c);
          acc.fma(m.ginv(a, d), bracket);
        }
        gamma(a, b, c) = acc * 0.5;
        if (b != c) gamma(a, c, b) = gamma(a, b, c);
      }
  return gamma;
}

/// Riemann, Ricci, scalar, Schouten and J in one pass. Requires n >= 3.
template <class S>
CurvatureStack<S> riemann_stack(const MetricValue<S>& m) {
  const int n = m.n;
  if (n < 3) throw invalid_argument("riemann_stack: Schouten needs dimension >= 3");
  CurvatureStack<S> st;
  st.n = n;
  st.metric = m;
  st.gamma = christoffel(m);
  const S zero = zero_like(m.g(0, 0));

  NDArray<S> dgamma({n, n, n, n}, zero);  // dgamma(e,a,b,c) = d_e Gamma^a_{bc}
  for (int e = 0; e < n; ++e)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = b; c < n; ++c) {
          dgamma(e, a, b, c) = st.gamma(a, b, c).derivative(e);
          if (b != c) dgamma(e, a, c, b) = dgamma(e, a, b, c);
        }

  // R_ab^c_d = d_a Gamma^c_{bd} - d_b Gamma^c_{ad}
  //           + Gamma^c_{ae} Gamma^e_{bd} - Gamma^c_{be} Gamma^e_{ad}
  st.riemann = NDArray<S>({n, n, n, n}, zero);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          S acc = dgamma(a, c, b, d) - dgamma(b, c, a, d);
          for (int e = 0; e < n; ++e) {
            acc.fma(st.gamma(c, a, e), st.gamma(e, b, d));
            acc.fms(st.gamma(c, b, e), st.gamma(e, a, d));
          }
          st.riemann(a, b, c, d) = acc;
          st.riemann(b, a, c, d) = acc * -1.0;
        }

  st.ricci = NDArray<S>({n, n}, zero);
  for (int b = 0; b < n; ++b)
    for (int c = 0; c < n; ++c) {
      S acc = zero;
      for (int a = 0; a < n; ++a) acc += st.riemann(a, b, a, c);
      st.ricci(b, c) = std::move(acc);
    }

  st.scalar = zero;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) st.scalar.fma(m.ginv(a, b), st.ricci(a, b));

  st.schouten = NDArray<S>({n, n}, zero);
  const double c1 = 1.0 / (n - 2), c2 = -1.0 / (2.0 * (n - 1) * (n - 2));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      S acc = st.ricci(a, b) * c1;
      acc.fma(st.scalar * c2, m.g(a, b));
      st.schouten(a, b) = std::move(acc);
    }

  st.j_trace = zero;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) st.j_trace.fma(m.ginv(a, b), st.schouten(a, b));
  return st;
}

/// W_abcd = R_abcd - 2(g_c[a P_b]d + g_d[b P_a]c); completely trace-free.
template <class S>
const NDArray<S>& weyl(CurvatureStack<S>& st) {
  if (st.weyl_lo) return *st.weyl_lo;
  const int n = st.n;
  const S zero = zero_like(st.metric.g(0, 0));
  NDArray<S> w({n, n, n, n}, zero);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          // lower the third index of R_ab^e_d
          S acc = zero;
          for (int e = 0; e < n; ++e) acc.fma(st.metric.g(c, e), st.riemann(a, b, e, d));
          acc.fms(st.metric.g(c, a), st.schouten(b, d));
          acc.fma(st.metric.g(c, b), st.schouten(a, d));
          acc.fms(st.metric.g(d, b), st.schouten(a, c));
          acc.fma(st.metric.g(d, a), st.schouten(b, c));
          w(a, b, c, d) = std::move(acc);
        }
  st.weyl_lo = std::move(w);
  return *st.weyl_lo;
}

/// C_abc = 2 nabla_[a P_b]c = nabla_a P_bc - nabla_b P_ac.
template <class S>
const NDArray<S>& cotton(CurvatureStack<S>& st) {
  if (st.cotton) return *st.cotton;
  const int n = st.n;
  const S zero = zero_like(st.metric.g(0, 0));
  DerivContext<S> ctx;
  ctx.gamma = &st.gamma;
  Tensor<S> P(st.schouten, {{SlotKind::Cov, n}, {SlotKind::Cov, n}});
  Tensor<S> dP = covariant_derivative(P, ctx);
  NDArray<S> c({n, n, n}, zero);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int e = 0; e < n; ++e) c(a, b, e) = dP.a(a, b, e) - dP.a(b, a, e);
  st.cotton = std::move(c);
  return *st.cotton;
}

/// B_ab = nabla^c C_cab + P^cd W_cadb. Symmetric and trace-free in any
/// dimension where it is defined (n >= 4 for the trace-free property).
template <class S>
const NDArray<S>& bach(CurvatureStack<S>& st) {
  if (st.bach) return *st.bach;
  const int n = st.n;
  const S zero = zero_like(st.metric.g(0, 0));
  const NDArray<S>& C = cotton(st);
  const NDArray<S>& W = weyl(st);
  DerivContext<S> ctx;
  ctx.gamma = &st.gamma;
  Tensor<S> Ct(C, {{SlotKind::Cov, n}, {SlotKind::Cov, n}, {SlotKind::Cov, n}});
  Tensor<S> dC = covariant_derivative(Ct, ctx);  // {e, c, a, b} = nabla_e C_cab
  // P with both indices raised
  NDArray<S> praised({n, n}, zero);
  for (int c = 0; c < n; ++c)
    for (int d = 0; d < n; ++d) {
      S acc = zero;
      for (int e = 0; e < n; ++e) {
        S row = zero;
        for (int f = 0; f < n; ++f) row.fma(st.metric.ginv(d, f), st.schouten(e, f));
        acc.fma(st.metric.ginv(c, e), row);
      }
      praised(c, d) = std::move(acc);
    }
  NDArray<S> b({n, n}, zero);
  for (int a = 0; a < n; ++a)
    for (int bb = 0; bb < n; ++bb) {
      S acc = zero;
      for (int e = 0; e < n; ++e)
        for (int c = 0; c < n; ++c) acc.fma(st.metric.ginv(e, c), dC.a(e, c, a, bb));
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) acc.fma(praised(c, d), W(c, a, d, bb));
      b(a, bb) = std::move(acc);
    }
  st.bach = std::move(b);
  return *st.bach;
}

/// Convenience: evaluate the full stack of a metric field at a point.
inline CurvatureStack<Jet> curvature_at(const MetricField& mf, const ChartPoint& p, int order) {
  return riemann_stack(eval_metric(mf, p, order));
}

}  // namespace cym
