#pragma once

// Connections on rank-r bundles in a local trivialization: curvature,
// Yang-Mills current j, the dimension-six conformal Yang-Mills current k
// with its energy density, and the reduced current for parallel curvature.
// The rank-(n+2) tractor connection flows through these operations
// unchanged; nothing here assumes r is small or the connection abelian.

#include "cym/curvature.hpp"

namespace cym {

/// F_ab = d_a A_b - d_b A_a + [A_a, A_b], endomorphism-valued 2-form,
/// dims {n, n, r, r}. Sign fixed by the commutator convention
/// [nabla_a, nabla_b] v = F_ab v on up components (property-tested).
template <class S>
NDArray<S> gauge_curvature(const ConnectionValue<S>& A) {
  const int n = A.n, r = A.rank;
  const S zero = zero_like(A.a.flat(0));
  NDArray<S> F({n, n, r, r}, zero);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
          S acc = A.a(b, i, j).derivative(a) - A.a(a, i, j).derivative(b);
          for (int k = 0; k < r; ++k) {
            acc.fma(A.a(a, i, k), A.a(b, k, j));
            acc.fms(A.a(b, i, k), A.a(a, k, j));
          }
          F(b, a, i, j) = acc * -1.0;
          F(a, b, i, j) = std::move(acc);
        }
  return F;
}

template <class S>
Tensor<S> curvature_tensor_form(const NDArray<S>& F, int n, int r) {
  return Tensor<S>(F, {{SlotKind::Cov, n}, {SlotKind::Cov, n}, {SlotKind::GaugeUp, r}, {SlotKind::GaugeDown, r}});
}

/// j_a = g^{bc} nabla_b F_{ca}: the Yang-Mills current, dims {n, r, r}.
/// The covariant derivative is Levi-Civita coupled on the form slots and
/// adjoint coupled on the endomorphism block.
template <class S>
NDArray<S> ym_current(const CurvatureStack<S>& st, const ConnectionValue<S>& A,
                      const NDArray<S>& F) {
  const int n = st.n, r = A.rank;
  DerivContext<S> ctx;
  ctx.gamma = &st.gamma;
  ctx.gauge = &A.a;
  Tensor<S> dF = covariant_derivative(curvature_tensor_form(F, n, r), ctx);  // {b, c, a, i, j}
  const S zero = zero_like(F.flat(0));
  NDArray<S> j({n, r, r}, zero);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < r; ++i)
      for (int jj = 0; jj < r; ++jj) {
        S acc = zero;
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c) acc.fma(st.metric.ginv(b, c), dF.a(b, c, a, i, jj));
        j(a, i, jj) = std::move(acc);
      }
  return j;
}

template <class S>
NDArray<S> ym_current(const CurvatureStack<S>& st, const ConnectionValue<S>& A) {
  return ym_current(st, A, gauge_curvature(A));
}

/// The conformal Yang-Mills current. In dimension six,
///   k_a = 1/2 nabla^c ( nabla_[c j_a] - 4 P_[c^b F_a]b - J F_ca )
///         + 1/2 [j^b, F_ba],
/// an endomorphism-valued 1-form of weight 2-n. In dimension four the
/// current coincides with j. Other dimensions are out of range here.
template <class S>
NDArray<S> cym_current(CurvatureStack<S>& st, const ConnectionValue<S>& A) {
  const int n = st.n, r = A.rank;
  if (n != 4 && n != 6)
    throw invalid_argument("cym_current: only dimensions 4 and 6 are supported");
  NDArray<S> F = gauge_curvature(A);
  NDArray<S> j = ym_current(st, A, F);
  if (n == 4) return j;

  const S zero = zero_like(F.flat(0));
  DerivContext<S> ctx;
  ctx.gamma = &st.gamma;
  ctx.gauge = &A.a;

  // P with second index raised: P_c^b
  NDArray<S> pmix({n, n}, zero);
  for (int c = 0; c < n; ++c)
    for (int b = 0; b < n; ++b) {
      S acc = zero;
      for (int d = 0; d < n; ++d) acc.fma(st.metric.ginv(b, d), st.schouten(c, d));
      pmix(c, b) = std::move(acc);
    }

  Tensor<S> jt(j, {{SlotKind::Cov, n}, {SlotKind::GaugeUp, r}, {SlotKind::GaugeDown, r}});
  Tensor<S> dj = covariant_derivative(jt, ctx);  // {c, a, i, j}

  // M_ca = nabla_[c j_a] - 4 P_[c^b F_a]b - J F_ca   (antisymmetric in ca)
  NDArray<S> M({n, n, r, r}, zero);
  for (int c = 0; c < n; ++c)
    for (int a = c + 1; a < n; ++a)
      for (int i = 0; i < r; ++i)
        for (int jj = 0; jj < r; ++jj) {
          S acc = (dj.a(c, a, i, jj) - dj.a(a, c, i, jj)) * 0.5;
          for (int b = 0; b < n; ++b) {
            acc.accumulate_product(pmix(c, b), F(a, b, i, jj), -2.0);
            acc.accumulate_product(pmix(a, b), F(c, b, i, jj), 2.0);
          }
          acc.fms(st.j_trace, F(c, a, i, jj));
          M(a, c, i, jj) = acc * -1.0;
          M(c, a, i, jj) = std::move(acc);
        }

  Tensor<S> Mt(M, {{SlotKind::Cov, n}, {SlotKind::Cov, n}, {SlotKind::GaugeUp, r}, {SlotKind::GaugeDown, r}});
  Tensor<S> dM = covariant_derivative(Mt, ctx);  // {d, c, a, i, j}

  // j with the index raised for the bracket term
  NDArray<S> jup({n, r, r}, zero);
  for (int b = 0; b < n; ++b)
    for (int i = 0; i < r; ++i)
      for (int jj = 0; jj < r; ++jj) {
        S acc = zero;
        for (int c = 0; c < n; ++c) acc.fma(st.metric.ginv(b, c), j(c, i, jj));
        jup(b, i, jj) = std::move(acc);
      }

  NDArray<S> k({n, r, r}, zero);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < r; ++i)
      for (int jj = 0; jj < r; ++jj) {
        S acc = zero;
        for (int d = 0; d < n; ++d)
          for (int c = 0; c < n; ++c)
            acc.fma(st.metric.ginv(d, c), dM.a(d, c, a, i, jj));
        // + [j^b, F_ba]
        for (int b = 0; b < n; ++b)
          for (int m = 0; m < r; ++m) {
            acc.fma(jup(b, i, m), F(b, a, m, jj));
            acc.fms(F(b, a, i, m), jup(b, m, jj));
          }
        k(a, i, jj) = acc * 0.5;
      }
  return k;
}

/// Scalar energy density of the dimension-six conformal Yang-Mills energy:
///   E = Tr( j_a j^a + J F_ab F^ab + 4 F^ab P_a^c F_bc - nabla^a v_a ),
///   v_a = 1/4 nabla_a F^2 + 2 F_ab j^b.
template <class S>
S energy_density_d6(CurvatureStack<S>& st, const ConnectionValue<S>& A) {
  const int n = st.n, r = A.rank;
  if (n != 6) throw invalid_argument("energy_density_d6: defined in dimension six");
  const S zero = zero_like(st.metric.g(0, 0));
  NDArray<S> F = gauge_curvature(A);
  NDArray<S> j = ym_current(st, A, F);
  DerivContext<S> ctx;
  ctx.gamma = &st.gamma;
  ctx.gauge = &A.a;

  // raised objects
  NDArray<S> Fup({n, n, r, r}, zero);  // F^ab
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int i = 0; i < r; ++i)
        for (int jj = 0; jj < r; ++jj) {
          S acc = zero;
          for (int c = 0; c < n; ++c) {
            S row = zero;
            for (int d = 0; d < n; ++d) row.fma(st.metric.ginv(b, d), F(c, d, i, jj));
            acc.fma(st.metric.ginv(a, c), row);
          }
          Fup(a, b, i, jj) = std::move(acc);
        }
  NDArray<S> jup({n, r, r}, zero);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < r; ++i)
      for (int jj = 0; jj < r; ++jj) {
        S acc = zero;
        for (int c = 0; c < n; ++c) acc.fma(st.metric.ginv(a, c), j(c, i, jj));
        jup(a, i, jj) = std::move(acc);
      }
  NDArray<S> pmix({n, n}, zero);  // P_a^c
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      S acc = zero;
      for (int d = 0; d < n; ++d) acc.fma(st.metric.ginv(c, d), st.schouten(a, d));
      pmix(a, c) = std::move(acc);
    }

  // F^2 = F_ab F^ab as an endomorphism
  NDArray<S> F2({r, r}, zero);
  for (int i = 0; i < r; ++i)
    for (int jj = 0; jj < r; ++jj) {
      S acc = zero;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int m = 0; m < r; ++m) acc.fma(F(a, b, i, m), Fup(a, b, m, jj));
      F2(i, jj) = std::move(acc);
    }

  // v_a = 1/4 nabla_a F^2 + 2 F_ab j^b
  Tensor<S> F2t(F2, {{SlotKind::GaugeUp, r}, {SlotKind::GaugeDown, r}});
  Tensor<S> dF2 = covariant_derivative(F2t, ctx);  // {a, i, j}
  NDArray<S> v({n, r, r}, zero);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < r; ++i)
      for (int jj = 0; jj < r; ++jj) {
        S acc = dF2.a(a, i, jj) * 0.25;
        for (int b = 0; b < n; ++b)
          for (int m = 0; m < r; ++m) acc.accumulate_product(F(a, b, i, m), jup(b, m, jj), 2.0);
        v(a, i, jj) = std::move(acc);
      }
  Tensor<S> vt(v, {{SlotKind::Cov, n}, {SlotKind::GaugeUp, r}, {SlotKind::GaugeDown, r}});
  Tensor<S> dv = covariant_derivative(vt, ctx);  // {b, a, i, j}

  S density = zero;
  for (int i = 0; i < r; ++i) {
    // Tr j_a j^a
    for (int a = 0; a < n; ++a)
      for (int m = 0; m < r; ++m) density.fma(j(a, i, m), jup(a, m, i));
    // Tr J F_ab F^ab
    density.fma(st.j_trace, F2(i, i));
    // Tr 4 F^ab P_a^c F_bc
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int m = 0; m < r; ++m) {
            S t = Fup(a, b, i, m) * pmix(a, c);
            density.accumulate_product(t, F(b, c, m, i), 4.0);
          }
    // - Tr nabla^a v_a
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        S t = st.metric.ginv(a, b) * -1.0;
        density.fma(t, dv.a(a, b, i, i));
      }
  }
  return density;
}

/// The contraction F^{ab}(C_abc - g_ca nabla_b J) that the full current
/// reduces to when F is parallel and abelian. Exposed separately so
/// identically-vanishing geometry (Einstein) can be tested without a
/// parallel F in hand.
template <class S>
NDArray<S> reduced_current_expression(CurvatureStack<S>& st, const NDArray<S>& F) {
  const int n = st.n;
  const S zero = zero_like(st.metric.g(0, 0));
  const NDArray<S>& C = cotton(st);
  NDArray<S> Fup({n, n}, zero);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      S acc = zero;
      for (int c = 0; c < n; ++c) {
        S row = zero;
        for (int d = 0; d < n; ++d) row.fma(st.metric.ginv(b, d), F(c, d, 0, 0));
        acc.fma(st.metric.ginv(a, c), row);
      }
      Fup(a, b) = std::move(acc);
    }
  NDArray<S> out({n}, zero);
  for (int c = 0; c < n; ++c) {
    S acc = zero;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) acc.fma(Fup(a, b), C(a, b, c));
    // - F_c^b nabla_b J
    for (int b = 0; b < n; ++b) {
      S dj = st.j_trace.derivative(b);
      S fcb = zero;
      for (int d = 0; d < n; ++d) fcb.fma(st.metric.ginv(b, d), F(c, d, 0, 0));
      acc.fms(fcb, dj);
    }
    out(c) = std::move(acc);
  }
  return out;
}

/// Same expression behind the stated precondition: F abelian and parallel
/// (residual of nabla F checked against `tol`).
template <class S>
NDArray<S> reduced_current_parallel(CurvatureStack<S>& st, const ConnectionValue<S>& A,
                                    const NDArray<S>& F, double tol = 1e-10) {
  if (A.rank != 1) throw invalid_argument("reduced_current_parallel: abelian connections only");
  DerivContext<S> ctx;
  ctx.gamma = &st.gamma;
  ctx.gauge = &A.a;
  Tensor<S> dF = covariant_derivative(curvature_tensor_form(F, st.n, 1), ctx);
  const double resid = max_abs_value(dF.a);
  if (resid > tol * (1.0 + max_abs_value(F)))
    throw domain_error("reduced_current_parallel: curvature is not parallel");
  return reduced_current_expression(st, F);
}

/// Gauge-coupled divergence nabla^a t_a of an endomorphism-valued 1-form.
template <class S>
NDArray<S> gauge_divergence(const CurvatureStack<S>& st, const ConnectionValue<S>& A,
                            const NDArray<S>& t) {
  const int n = st.n, r = A.rank;
  const S zero = zero_like(t.flat(0));
  DerivContext<S> ctx;
  ctx.gamma = &st.gamma;
  ctx.gauge = &A.a;
  Tensor<S> tt(t, {{SlotKind::Cov, n}, {SlotKind::GaugeUp, r}, {SlotKind::GaugeDown, r}});
  Tensor<S> dt = covariant_derivative(tt, ctx);
  NDArray<S> out({r, r}, zero);
  for (int i = 0; i < r; ++i)
    for (int jj = 0; jj < r; ++jj) {
      S acc = zero;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) acc.fma(st.metric.ginv(a, b), dt.a(a, b, i, jj));
      out(i, jj) = std::move(acc);
    }
  return out;
}

}  // namespace cym
