#pragma once

// Tractor calculus in a metric-representative splitting. Tractor indices
// are a concrete (n+2)-dimensional index set ordered (top, middle_1..n,
// bottom); X, Y, Z are constant selector arrays in that basis, so every
// identity becomes a finite linear-algebra statement over jets.
//
// Down-component triples follow V_A = sigma Y_A + mu_a Z_A^a + rho X_A:
// slot 0 holds sigma, slots 1..n hold mu, slot n+1 holds rho. Up
// components are the h-raise of that, so slot 0 of an up array is the
// X-direction coefficient.

#include <memory>

#include "cym/gauge.hpp"

namespace cym {

struct TractorContext {
  int n = 0, N = 0;  // N = n + 2
  CurvatureStack<Jet> stack;
  NDArray<Jet> h;     // {N,N} tractor metric, down-down block form
  NDArray<Jet> hinv;  // {N,N}
  ConnectionValue<Jet> conn;  // {n,N,N} tractor connection, up action

  int top() const { return 0; }
  int mid(int a) const { return 1 + a; }
  int bot() const { return N - 1; }
};

/// Tractor metric block form: h(X,Y) pairing on the ends, g in the middle.
inline NDArray<Jet> tractor_metric(const MetricValue<Jet>& m) {
  const int n = m.n, N = n + 2;
  const Jet zero = zero_like(m.g(0, 0));
  NDArray<Jet> h({N, N}, zero);
  h(0, N - 1) = one_like(zero);
  h(N - 1, 0) = one_like(zero);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) h(1 + a, 1 + b) = m.g(a, b);
  return h;
}

inline NDArray<Jet> tractor_metric_inverse(const MetricValue<Jet>& m) {
  const int n = m.n, N = n + 2;
  const Jet zero = zero_like(m.g(0, 0));
  NDArray<Jet> h({N, N}, zero);
  h(0, N - 1) = one_like(zero);
  h(N - 1, 0) = one_like(zero);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) h(1 + a, 1 + b) = m.ginv(a, b);
  return h;
}

/// The tractor connection as a rank-(n+2) bundle connection (up action,
/// with the Levi-Civita coupling of the middle slot folded into the
/// matrix). It feeds every gauge-module operation unchanged.
inline ConnectionValue<Jet> tractor_connection(const CurvatureStack<Jet>& st) {
  const int n = st.n, N = n + 2;
  const Jet zero = zero_like(st.metric.g(0, 0));
  ConnectionValue<Jet> c;
  c.n = n;
  c.rank = N;
  c.a = NDArray<Jet>({n, N, N}, zero);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      // nabla_a X^A = Z^A_a
      if (a == b) c.a(a, 1 + b, 0) = one_like(zero);
      // nabla_a Y^A = P_a^b Z^A_b
      Jet pab(zero);
      for (int d = 0; d < n; ++d) pab.fma(st.metric.ginv(b, d), st.schouten(a, d));
      c.a(a, 1 + b, N - 1) = std::move(pab);
      // nabla_a Z^A_b = -P_ab X^A - g_ab Y^A
      c.a(a, 0, 1 + b) = st.schouten(a, b) * -1.0;
      c.a(a, N - 1, 1 + b) = st.metric.g(a, b) * -1.0;
      for (int e = 0; e < n; ++e) c.a(a, 1 + e, 1 + b) = st.gamma(e, a, b);
    }
  }
  return c;
}

inline TractorContext make_tractor_context(CurvatureStack<Jet> st) {
  TractorContext ctx;
  ctx.n = st.n;
  ctx.N = st.n + 2;
  ctx.h = tractor_metric(st.metric);
  ctx.hinv = tractor_metric_inverse(st.metric);
  ctx.conn = tractor_connection(st);
  ctx.stack = std::move(st);
  return ctx;
}

/// kappa_ab^C_D assembled from Weyl and Cotton. Must agree componentwise
/// with gauge_curvature(tractor_connection); the two routes are mutual
/// oracles.
inline NDArray<Jet> tractor_curvature_closed_form(TractorContext& ctx) {
  auto& st = ctx.stack;
  const int n = ctx.n, N = ctx.N;
  const Jet zero = zero_like(st.metric.g(0, 0));
  const auto& W = weyl(st);
  const auto& C = cotton(st);
  NDArray<Jet> kappa({n, n, N, N}, zero);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        for (int d = 0; d < n; ++d) {
          Jet wmix(zero);  // W_ab^c_d
          for (int e = 0; e < n; ++e) wmix.fma(st.metric.ginv(c, e), W(a, b, e, d));
          kappa(a, b, 1 + c, 1 + d) = std::move(wmix);
        }
        Jet cup(zero);  // C_ab^c
        for (int e = 0; e < n; ++e) cup.fma(st.metric.ginv(c, e), C(a, b, e));
        kappa(a, b, 1 + c, N - 1) = std::move(cup);
        kappa(a, b, 0, 1 + c) = C(a, b, c) * -1.0;
      }
    }
  return kappa;
}

/// ---- tractor fields and the Thomas-D family ----

/// Derivative context for a tractor field possibly twisted by an external
/// bundle connection.
inline DerivContext<Jet> tractor_deriv_context(const TractorContext& ctx,
                                               const ConnectionValue<Jet>* ext = nullptr) {
  DerivContext<Jet> d;
  d.gamma = &ctx.stack.gamma;
  d.tractor = &ctx.conn.a;
  if (ext) d.gauge = &ext->a;
  return d;
}

/// Connection-coupled Laplacian g^{ab} nabla_a nabla_b.
inline Tensor<Jet> coupled_laplacian(const Tensor<Jet>& t, const TractorContext& ctx,
                                     const ConnectionValue<Jet>* ext = nullptr) {
  auto d = tractor_deriv_context(ctx, ext);
  Tensor<Jet> ddt = covariant_derivative(covariant_derivative(t, d), d);
  const int n = ctx.n;
  const Jet zero = zero_like(t.a.flat(0));
  Tensor<Jet> out(NDArray<Jet>(t.a.dims(), zero), t.slots, t.weight);
  std::vector<int> src(ddt.a.rank());
  for_each_index(t.a.dims(), [&](std::span<const int> idx) {
    std::copy(idx.begin(), idx.end(), src.begin() + 2);
    Jet acc = zero;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        src[0] = a;
        src[1] = b;
        acc.fma(ctx.stack.metric.ginv(a, b), ddt.a.at(src));
      }
    out.a.at(idx) = std::move(acc);
  });
  return out;
}

/// Thomas-D operator:
///   D_A T = (d + 2w - 2)(w Y_A T + Z_A^a nabla_a T) - X_A (Delta + w J) T,
/// with nabla coupled per T's slots. The new tractor slot is prepended and
/// the weight drops by one. The hatted variant divides by d + 2w - 2.
inline Tensor<Jet> thomas_D(const Tensor<Jet>& t, const TractorContext& ctx,
                            const ConnectionValue<Jet>* ext = nullptr, bool hatted = false) {
  const int n = ctx.n, N = ctx.N;
  const double w = t.weight;
  const double front = n + 2.0 * w - 2.0;
  if (hatted && front == 0.0)
    throw domain_error("thomas_D: hatted operator undefined at weight (2-n)/2");
  auto d = tractor_deriv_context(ctx, ext);
  Tensor<Jet> dt = covariant_derivative(t, d);
  Tensor<Jet> lap = coupled_laplacian(t, ctx, ext);

  std::vector<Slot> slots;
  slots.push_back({SlotKind::TracDown, N});
  slots.insert(slots.end(), t.slots.begin(), t.slots.end());
  const Jet zero = zero_like(t.a.flat(0));
  Tensor<Jet> out(NDArray<Jet>(slot_dims<Jet>(slots), zero), slots, w - 1.0);
  const double scale = hatted ? 1.0 / front : 1.0;

  std::vector<int> dst(out.a.rank());
  std::vector<int> dsrc(dt.a.rank());
  for_each_index(t.a.dims(), [&](std::span<const int> idx) {
    std::copy(idx.begin(), idx.end(), dst.begin() + 1);
    // top slot: (d+2w-2) w T
    dst[0] = 0;
    out.a.at(dst) = t.a.at(idx) * (front * w * scale);
    // middle slots: (d+2w-2) nabla_a T
    for (int a = 0; a < n; ++a) {
      dst[0] = 1 + a;
      dsrc[0] = a;
      std::copy(idx.begin(), idx.end(), dsrc.begin() + 1);
      out.a.at(dst) = dt.a.at(dsrc) * (front * scale);
    }
    // bottom slot: -(Delta + w J) T
    dst[0] = N - 1;
    Jet acc = lap.a.at(idx);
    acc.accumulate_product(ctx.stack.j_trace, t.a.at(idx), w);
    out.a.at(dst) = acc * (-scale);
  });
  return out;
}

/// ---- the W-tractor and slashed operators ----

/// W_ABCD from Weyl, Cotton and Bach (n != 4).
inline NDArray<Jet> w_tractor(TractorContext& ctx) {
  const int n = ctx.n, N = ctx.N;
  if (n == 4) throw domain_error("w_tractor: the Bach block is singular in dimension 4");
  auto& st = ctx.stack;
  const Jet zero = zero_like(st.metric.g(0, 0));
  const auto& W = weyl(st);
  const auto& C = cotton(st);
  const auto& B = bach(st);
  NDArray<Jet> out({N, N, N, N}, zero);
  const int bot = N - 1;
  // Z Z Z Z W_{abcd}
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) out(1 + a, 1 + b, 1 + c, 1 + d) = W(a, b, c, d);
  // (2 X_[A Z_B]^a Z_D^c Z_C^b - 2 X_[C Z_D]^a Z_A^c Z_B^b) C_{cba}
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        // first piece: indices (A,B) in the X/Z pair, C-slot gets b, D-slot gets c
        out(bot, 1 + a, 1 + b, 1 + c) += C(c, b, a);         // X_A Z_B^a
        out(1 + a, bot, 1 + b, 1 + c) -= C(c, b, a);         // - X_B Z_A^a
        // second piece: -2 X_[C Z_D]^a Z_A^c Z_B^b C_{cba}
        out(1 + c, 1 + b, bot, 1 + a) -= C(c, b, a);
        out(1 + c, 1 + b, 1 + a, bot) += C(c, b, a);
      }
  // 4/(n-4) Z_[A^a X_B] Z_[C^b X_D] B_{ab}
  const double cb = 1.0 / (n - 4.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      out(1 + a, bot, 1 + b, bot) += B(a, b) * cb;
      out(1 + a, bot, bot, 1 + b) -= B(a, b) * cb;
      out(bot, 1 + a, 1 + b, bot) -= B(a, b) * cb;
      out(bot, 1 + a, bot, 1 + b) += B(a, b) * cb;
    }
  return out;
}

/// Double-hash action of the W-tractor on the tractor-form slots of T:
/// (W## T)_{B_1..B_l} = sum_i W^a_{B_i}^g_a T_{..g@i..}
///                    + sum_{i != j} W^a_{B_j}^g_{B_i} T_{..g@i, a@j..}.
/// Gauge slots are inert (the hash annihilates them).
inline Tensor<Jet> w_sharp_sharp(const NDArray<Jet>& Wt, const Tensor<Jet>& t,
                                 const TractorContext& ctx) {
  const int N = ctx.N;
  const Jet zero = zero_like(t.a.flat(0));
  // W with slots 1 and 3 raised: Wmix^A_B^C_D
  NDArray<Jet> wm({N, N, N, N}, zero);
  for (int A = 0; A < N; ++A)
    for (int B = 0; B < N; ++B)
      for (int C = 0; C < N; ++C)
        for (int D = 0; D < N; ++D) {
          Jet acc = zero;
          for (int E = 0; E < N; ++E) {
            Jet row = zero;
            for (int F = 0; F < N; ++F) row.fma(ctx.hinv(C, F), Wt(E, B, F, D));
            acc.fma(ctx.hinv(A, E), row);
          }
          wm(A, B, C, D) = std::move(acc);
        }
  // trace over the same-slot part: Wtr_B^g = Wmix^a_B^g_a
  NDArray<Jet> wtr({N, N}, zero);
  for (int B = 0; B < N; ++B)
    for (int G = 0; G < N; ++G) {
      Jet acc = zero;
      for (int A = 0; A < N; ++A) acc += wm(A, B, G, A);
      wtr(B, G) = std::move(acc);
    }

  std::vector<int> form_slots;
  for (int k = 0; k < static_cast<int>(t.slots.size()); ++k)
    if (t.slots[k].kind == SlotKind::TracDown) form_slots.push_back(k);

  Tensor<Jet> out(NDArray<Jet>(t.a.dims(), zero), t.slots, t.weight);
  std::vector<int> src(t.slots.size());
  for_each_index(t.a.dims(), [&](std::span<const int> idx) {
    Jet acc = zero;
    std::copy(idx.begin(), idx.end(), src.begin());
    for (int i : form_slots) {
      const int Bi = idx[i];
      for (int G = 0; G < N; ++G) {
        src[i] = G;
        acc.fma(wtr(Bi, G), t.a.at(src));
      }
      src[i] = Bi;
    }
    for (int i : form_slots)
      for (int j : form_slots) {
        if (i == j) continue;
        const int Bi = idx[i], Bj = idx[j];
        for (int G = 0; G < N; ++G)
          for (int A = 0; A < N; ++A) {
            src[i] = G;
            src[j] = A;
            acc.fma(wm(A, Bj, G, Bi), t.a.at(src));
          }
        src[i] = Bi;
        src[j] = Bj;
      }
    out.a.at(idx) = std::move(acc);
  });
  return out;
}

/// Slashed Thomas-D: D-slash = D - X_A (W## .). Acts on tractor forms
/// (all tractor slots down); n != 4.
inline Tensor<Jet> slashed_D(const Tensor<Jet>& t, TractorContext& ctx,
                             const ConnectionValue<Jet>* ext = nullptr, bool hatted = false) {
  const double w = t.weight;
  const double front = ctx.n + 2.0 * w - 2.0;
  if (hatted && front == 0.0)
    throw domain_error("slashed_D: hatted operator undefined at weight (2-n)/2");
  Tensor<Jet> out = thomas_D(t, ctx, ext, hatted);
  NDArray<Jet> Wt = w_tractor(ctx);
  Tensor<Jet> ws = w_sharp_sharp(Wt, t, ctx);
  const double scale = hatted ? 1.0 / front : 1.0;
  // subtract X_A (W## T): X_A points at the bottom slot
  std::vector<int> dst(out.a.rank());
  for_each_index(t.a.dims(), [&](std::span<const int> idx) {
    dst[0] = ctx.N - 1;
    std::copy(idx.begin(), idx.end(), dst.begin() + 1);
    out.a.at(dst) = out.a.at(dst) - ws.a.at(idx) * scale;
  });
  return out;
}

/// ---- the q-maps ----

/// q_s on l-form-valued sections (l = 1, 2): the algebraic insertion
/// X_[A1 Z_A2^a1 ... Z_{A_{l+1}]}^al t_{a1..al}. No derivatives involved.
/// Extra (non-form) slots of t ride along unchanged.
inline Tensor<Jet> q_s(const Tensor<Jet>& t, const TractorContext& ctx, int ell) {
  const int n = ctx.n, N = ctx.N;
  if (ell < 1 || ell > 2) throw invalid_argument("q_s: supported form degrees are 1 and 2");
  for (int k = 0; k < ell; ++k)
    if (t.slots[k].kind != SlotKind::Cov) throw invalid_argument("q_s: leading slots must be covariant");
  const Jet zero = zero_like(t.a.flat(0));
  std::vector<Slot> slots;
  for (int k = 0; k <= ell; ++k) slots.push_back({SlotKind::TracDown, N});
  slots.insert(slots.end(), t.slots.begin() + ell, t.slots.end());
  Tensor<Jet> raw(NDArray<Jet>(slot_dims<Jet>(slots), zero), slots, t.weight - ell + 1.0);
  // unantisymmetrized insertion: slot0 = X (bottom), slot k = Z^{a_k}
  std::vector<int> dst(raw.a.rank()), src(t.a.rank());
  const auto& tdims = t.a.dims();
  for_each_index(tdims, [&](std::span<const int> idx) {
    std::copy(idx.begin(), idx.end(), src.begin());
    dst[0] = N - 1;
    for (int k = 0; k < ell; ++k) dst[1 + k] = 1 + idx[k];
    for (std::size_t k = ell; k < idx.size(); ++k) dst[1 + k] = idx[k];
    raw.a.at(dst) += t.a.at(src);
  });
  std::vector<int> positions(ell + 1);
  for (int k = 0; k <= ell; ++k) positions[k] = k;
  return antisym(raw, positions);
}

/// q_w on l-form-valued sections of weight w (w != 2l - n):
///   q_w(t) = Z_[A1 .. Al] t - l/(n+w-2l) X_[A1 Z_A2 .. Z_Al] div t,
/// divergence coupled per the value type. Output weight w - l.
inline Tensor<Jet> q_w(const Tensor<Jet>& t, const TractorContext& ctx, int ell,
                       const ConnectionValue<Jet>* ext = nullptr) {
  const int n = ctx.n, N = ctx.N;
  const double w = t.weight;
  if (w == 2.0 * ell - n) throw domain_error("q_w: excluded weight w = 2l - n");
  if (ell < 1 || ell > 2) throw invalid_argument("q_w: supported form degrees are 1 and 2");
  const Jet zero = zero_like(t.a.flat(0));

  std::vector<Slot> slots;
  for (int k = 0; k < ell; ++k) slots.push_back({SlotKind::TracDown, N});
  slots.insert(slots.end(), t.slots.begin() + ell, t.slots.end());
  Tensor<Jet> raw(NDArray<Jet>(slot_dims<Jet>(slots), zero), slots, w - ell);

  std::vector<int> dst(raw.a.rank());
  for_each_index(t.a.dims(), [&](std::span<const int> idx) {
    for (int k = 0; k < ell; ++k) dst[k] = 1 + idx[k];
    for (std::size_t k = ell; k < idx.size(); ++k) dst[k] = idx[k];
    raw.a.at(dst) += t.a.at(idx);
  });

  // divergence on the first form slot
  auto d = tractor_deriv_context(ctx, ext);
  Tensor<Jet> dt = covariant_derivative(t, d);  // {x, a1, .., al, extras}
  const auto& m = ctx.stack.metric;
  std::vector<int> rest_dims(t.a.dims().begin() + 1, t.a.dims().end());
  std::vector<int> dsrc(dt.a.rank());
  const double coef = -static_cast<double>(ell) / (n + w - 2.0 * ell);
  for_each_index(rest_dims, [&](std::span<const int> idx) {
    Jet acc = zero;
    for (int x = 0; x < n; ++x)
      for (int a = 0; a < n; ++a) {
        dsrc[0] = x;
        dsrc[1] = a;
        std::copy(idx.begin(), idx.end(), dsrc.begin() + 2);
        acc.fma(m.ginv(x, a), dt.a.at(dsrc));
      }
    // X_[A1 Z..]: slot0 = bottom, slots 1..l-1 = Z of remaining form indices
    dst[0] = N - 1;
    for (int k = 0; k + 1 < ell; ++k) dst[1 + k] = 1 + idx[k];
    for (std::size_t k = ell - 1; k < idx.size(); ++k) dst[1 + k] = idx[k];
    raw.a.at(dst) += acc * coef;
  });

  std::vector<int> positions(ell);
  for (int k = 0; k < ell; ++k) positions[k] = k;
  return antisym(raw, positions);
}

/// Formal adjoint q_w^* on tractor l-forms of weight w:
///   q_w^*(T) = Z_a1^{A1}..Z_al^{Al} T_{A1..Al}
///              - l/(w+l) nabla_[a1 ( X^{A1} Z_a2^{A2}.. T_{A1..} )_{..al]}.
/// At the excluded weight w = -l the Z-only formula applies provided
/// iota_X T = 0.
inline Tensor<Jet> q_w_star(const Tensor<Jet>& t, const TractorContext& ctx, int ell,
                            const ConnectionValue<Jet>* ext = nullptr) {
  const int n = ctx.n, N = ctx.N;
  const double w = t.weight;
  if (ell < 1 || ell > 2) throw invalid_argument("q_w_star: supported form degrees are 1 and 2");
  const Jet zero = zero_like(t.a.flat(0));

  std::vector<Slot> slots;
  for (int k = 0; k < ell; ++k) slots.push_back({SlotKind::Cov, n});
  slots.insert(slots.end(), t.slots.begin() + ell, t.slots.end());
  Tensor<Jet> zpart(NDArray<Jet>(slot_dims<Jet>(slots), zero), slots, w + ell);

  std::vector<int> src(t.a.rank());
  for_each_index(zpart.a.dims(), [&](std::span<const int> idx) {
    for (int k = 0; k < ell; ++k) src[k] = 1 + idx[k];
    for (std::size_t k = ell; k < idx.size(); ++k) src[k] = idx[k];
    zpart.a.at(idx) = t.a.at(src);
  });

  if (w == -static_cast<double>(ell)) {
    // permitted only when iota_X T = 0
    double worst = 0.0;
    for_each_index(t.a.dims(), [&](std::span<const int> idx) {
      if (idx[0] == 0) worst = std::max(worst, std::abs(t.a.at(idx).value()));
    });
    if (worst > 1e-12 * (1.0 + max_abs_value(t.a)))
      throw domain_error("q_w_star: weight -l requires iota_X T = 0");
    return zpart;
  }

  // inner object psi_{a2..al} = X^{A1} Z_a2^{A2} .. T_{A1 A2..}; X^A = e_top
  std::vector<Slot> pslots;
  for (int k = 0; k + 1 < ell; ++k) pslots.push_back({SlotKind::Cov, n});
  pslots.insert(pslots.end(), t.slots.begin() + ell, t.slots.end());
  Tensor<Jet> psi(NDArray<Jet>(slot_dims<Jet>(pslots), zero), pslots, w + ell - 1.0);
  for_each_index(psi.a.dims(), [&](std::span<const int> idx) {
    src[0] = 0;  // X^A selects the top up-slot of a down index
    for (int k = 0; k + 1 < ell; ++k) src[1 + k] = 1 + idx[k];
    for (std::size_t k = static_cast<std::size_t>(ell) - 1; k < idx.size(); ++k)
      src[1 + k] = idx[k];
    psi.a.at(idx) = t.a.at(src);
  });
  DerivContext<Jet> d;
  d.gamma = &ctx.stack.gamma;
  if (ext) d.gauge = &ext->a;
  Tensor<Jet> dpsi = covariant_derivative(psi, d);  // {a1, a2..al, extras}

  const double coef = -static_cast<double>(ell) / (w + ell);
  Tensor<Jet> correction = dpsi * coef;
  // antisymmetrize over the l form slots
  std::vector<int> positions(ell);
  for (int k = 0; k < ell; ++k) positions[k] = k;
  Tensor<Jet> corr = antisym(correction, positions);
  Tensor<Jet> zanti = antisym(zpart, positions);
  Tensor<Jet> out = zanti;
  for (std::size_t i = 0; i < out.a.size(); ++i) out.a.flat(i) += corr.a.flat(i);
  out.weight = w + ell;
  return out;
}

/// Curvature tractor of a bundle connection (n != 4):
/// script-F = q_w(F), weight -2, an endomorphism-valued tractor 2-form.
inline Tensor<Jet> curvature_tractor(TractorContext& ctx, const ConnectionValue<Jet>& A) {
  if (ctx.n == 4) throw domain_error("curvature_tractor: q_w(F) is singular in dimension 4");
  NDArray<Jet> F = gauge_curvature(A);
  Tensor<Jet> Ft = curvature_tensor_form(F, ctx.n, A.rank);
  Ft.weight = 0.0;
  return q_w(Ft, ctx, 2, &A);
}

/// Closed form of the curvature tractor per its projector expansion:
/// ZZ F + 2/(n-4) Z_[A^a X_B] nabla^c F_{ca}. Cross-route oracle for q_w.
inline Tensor<Jet> curvature_tractor_closed_form(TractorContext& ctx,
                                                 const ConnectionValue<Jet>& A) {
  const int n = ctx.n, N = ctx.N, r = A.rank;
  const Jet zero = zero_like(ctx.stack.metric.g(0, 0));
  NDArray<Jet> F = gauge_curvature(A);
  NDArray<Jet> j = ym_current(ctx.stack, A, F);
  std::vector<Slot> slots{{SlotKind::TracDown, N}, {SlotKind::TracDown, N},
                          {SlotKind::GaugeUp, r}, {SlotKind::GaugeDown, r}};
  Tensor<Jet> out(NDArray<Jet>(slot_dims<Jet>(slots), zero), slots, -2.0);
  const double c = 1.0 / (n - 4.0);
  for (int i = 0; i < r; ++i)
    for (int jj = 0; jj < r; ++jj) {
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) out.a(1 + a, 1 + b, i, jj) = F(a, b, i, jj);
        // 2/(n-4) Z_[A^a X_B] j_a = 1/(n-4) (Z_A^a X_B - X_A Z_B^a) j_a
        out.a(1 + a, N - 1, i, jj) = j(a, i, jj) * c;
        out.a(N - 1, 1 + a, i, jj) = j(a, i, jj) * (-c);
      }
    }
  return out;
}

/// ---- scale tractors ----

struct ScaleTractor {
  NDArray<Jet> up;  // I^A, up components {N}
  Tensor<Jet> field;
};

/// I^A = hatted-D of a positive weight-1 density tau.
inline ScaleTractor scale_tractor(const Jet& tau, TractorContext& ctx) {
  if (tau.value() <= 0.0) throw domain_error("scale_tractor: the scale must be positive");
  const int n = ctx.n, N = ctx.N;
  const Jet zero = zero_like(ctx.stack.metric.g(0, 0));
  Tensor<Jet> t(NDArray<Jet>({1}, zero), std::vector<Slot>{}, 1.0);
  // scalar as a rank-0 tensor: use a 0-rank array
  Tensor<Jet> t0(NDArray<Jet>(std::vector<int>{}, tau), std::vector<Slot>{}, 1.0);
  Tensor<Jet> Dt = thomas_D(t0, ctx, nullptr, true);  // down components {N}
  // raise with h^{AB}
  ScaleTractor out;
  out.up = NDArray<Jet>({N}, zero);
  for (int A = 0; A < N; ++A) {
    Jet acc = zero;
    for (int B = 0; B < N; ++B) acc.fma(ctx.hinv(A, B), Dt.a(B));
    out.up(A) = std::move(acc);
  }
  out.field = Tensor<Jet>(out.up, {{SlotKind::TracUp, N}}, 0.0);
  return out;
}

struct EinsteinCheck {
  double grad_residual;  // max |nabla_a I^A|
  double ae_residual;    // max |nabla_(a nabla_b)0 tau + P_(ab)0 tau|
};

/// Both residuals vanish exactly when tau^{-2} g is Einstein.
inline EinsteinCheck einstein_check(const Jet& tau, TractorContext& ctx) {
  const int n = ctx.n;
  auto I = scale_tractor(tau, ctx);
  auto d = tractor_deriv_context(ctx);
  Tensor<Jet> dI = covariant_derivative(I.field, d);
  EinsteinCheck out;
  out.grad_residual = max_abs_value(dI.a);

  // nabla_(a nabla_b)0 tau + P_(ab)0 tau
  const Jet zero = zero_like(ctx.stack.metric.g(0, 0));
  Tensor<Jet> t0(NDArray<Jet>(std::vector<int>{}, tau), std::vector<Slot>{}, 1.0);
  Tensor<Jet> ddt = covariant_derivative(covariant_derivative(t0, d), d);
  const auto& m = ctx.stack.metric;
  Jet trace = zero;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) trace.fma(m.ginv(a, b), ddt.a(a, b));
  Jet ptrace = ctx.stack.j_trace;  // g^{ab} P_ab
  double worst = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Jet sym = (ddt.a(a, b) + ddt.a(b, a)) * 0.5;
      Jet tf = sym - m.g(a, b) * (trace * (1.0 / n));
      Jet pt = ctx.stack.schouten(a, b) - m.g(a, b) * (ptrace * (1.0 / n));
      Jet resid = tf + pt * tau;
      worst = std::max(worst, std::abs(resid.value()));
    }
  out.ae_residual = worst;
  return out;
}

/// ---- Yang-Mills current of the tractor connection, closed form ----

/// g^{ab} nabla_a kappa_{bc D E} = (d-4) C_{dec} Z_D^d Z_E^e
///                                + 2 B_{cd} Z_[D^d X_E].
/// Returned with both tractor slots down, dims {n, N, N}.
inline NDArray<Jet> tractor_ym_closed_form(TractorContext& ctx) {
  const int n = ctx.n, N = ctx.N;
  auto& st = ctx.stack;
  const Jet zero = zero_like(st.metric.g(0, 0));
  const auto& C = cotton(st);
  const auto& B = bach(st);
  NDArray<Jet> out({n, N, N}, zero);
  for (int c = 0; c < n; ++c) {
    for (int d = 0; d < n; ++d) {
      for (int e = 0; e < n; ++e) out(c, 1 + d, 1 + e) = C(d, e, c) * (n - 4.0);
      out(c, 1 + d, N - 1) += B(c, d);
      out(c, N - 1, 1 + d) = B(c, d) * -1.0;
    }
  }
  return out;
}

/// ---- splitting transport (conformal change of representative) ----

/// Numeric transport matrix for down tractor components under
/// g -> Omega^2 g: diag(Omega, .., Omega, Omega^{-1}) applied after the
/// Upsilon block matrix. Components of an invariant weight-w object obey
///   comps_hat = Omega^w * (transport per tractor slot) comps.
inline NDArray<double> transport_down(const MetricValue<Jet>& m, double omega,
                                      const NDArray<double>& upsilon) {
  const int n = m.n, N = n + 2;
  NDArray<double> u({N, N}, 0.0);
  NDArray<double> gv = values(m.g), giv = values(m.ginv);
  double ups2 = 0.0;
  std::vector<double> upsup(n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      upsup[a] += giv(a, b) * upsilon.flat(b);
      ups2 += giv(a, b) * upsilon.flat(a) * upsilon.flat(b);
    }
  u(0, 0) = omega;
  for (int b = 0; b < n; ++b) {
    u(1 + b, 0) = omega * upsilon.flat(b);
    u(1 + b, 1 + b) = omega;
  }
  u(N - 1, 0) = -0.5 * ups2 / omega;
  for (int c = 0; c < n; ++c) u(N - 1, 1 + c) = -upsup[c] / omega;
  u(N - 1, N - 1) = 1.0 / omega;
  return u;
}

inline NDArray<double> invert_double_matrix(const NDArray<double>& m) {
  const int n = m.dims()[0];
  std::vector<std::vector<double>> a(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[i][j] = m(i, j);
  NDArray<double> inv({n, n}, 0.0);
  std::vector<std::vector<double>> e(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) e[i][i] = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[piv], a[col]);
    std::swap(e[piv], e[col]);
    const double d = a[col][col];
    for (int cc = 0; cc < n; ++cc) {
      a[col][cc] /= d;
      e[col][cc] /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (int cc = 0; cc < n; ++cc) {
        a[r][cc] -= f * a[col][cc];
        e[r][cc] -= f * e[col][cc];
      }
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv(i, j) = e[i][j];
  return inv;
}

/// Up-component transport: the inverse transpose of the down transport.
inline NDArray<double> transport_up(const NDArray<double>& down) {
  NDArray<double> inv = invert_double_matrix(down);
  const int N = down.dims()[0];
  NDArray<double> up({N, N}, 0.0);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) up(i, j) = inv(j, i);
  return up;
}

}  // namespace cym
