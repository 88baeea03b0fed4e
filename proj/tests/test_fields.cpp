#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cym/catalog.hpp"
#include "cym/curvature.hpp"
#include "support/oracles.hpp"

using namespace cym;
using cym::test::Rng;

namespace {

Tensor<Jet> metric_tensor(const MetricValue<Jet>& m) {
  return Tensor<Jet>(m.g, {{SlotKind::Cov, m.n}, {SlotKind::Cov, m.n}}, 2.0);
}

}  // namespace

TEST_CASE("flat metric evaluates to constant identity jets") {
  auto mf = flat_metric(4);
  ChartPoint p{{0.3, -1.0, 2.0, 0.1}};
  auto m = eval_metric(mf, p, 3);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      CHECK(m.g(a, b).value() == (a == b ? 1.0 : 0.0));
      CHECK(m.g(a, b).max_abs_coeff() == (a == b ? 1.0 : 0.0));
    }
}

TEST_CASE("sphere metric at the chart origin is 4 delta") {
  auto mf = sphere_metric(5);
  auto m = eval_metric(mf, ChartPoint{{0, 0, 0, 0, 0}}, 2);
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b)
      CHECK_THAT(m.g(a, b).value(), Catch::Matchers::WithinAbs(a == b ? 4.0 : 0.0, 1e-14));
}

TEST_CASE("uv-block metric has the closed-form off-diagonal value at the origin") {
  auto mf = uv_block_metric();
  auto m = eval_metric(mf, ChartPoint{{0, 0, 0, 0, 0, 0}}, 2);
  // f(0) = 1/2, so g_uv = sqrt(1 - 1/4) = sqrt(3)/2
  CHECK_THAT(m.g(0, 1).value(), Catch::Matchers::WithinAbs(std::sqrt(3.0) / 2.0, 1e-14));
  CHECK_THAT(m.g(1, 0).value(), Catch::Matchers::WithinAbs(std::sqrt(3.0) / 2.0, 1e-14));
  for (int a = 2; a < 6; ++a) CHECK(m.g(a, a).value() == 1.0);
  CHECK(m.g(2, 3).value() == 0.0);
}

TEST_CASE("metric inverse satisfies g g^-1 = identity in every coefficient") {
  auto mf = random_metric(4, 11, 0.08);
  auto m = eval_metric(mf, ChartPoint{{0.1, -0.05, 0.2, 0.0}}, 4);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      Jet acc(4, 4);
      for (int c = 0; c < 4; ++c) acc.fma(m.ginv(a, c), m.g(c, b));
      acc = acc - Jet::constant(4, 4, a == b ? 1.0 : 0.0);
      CHECK(acc.max_abs_coeff() <= 1e-12);
    }
}

TEST_CASE("domain predicates raise typed errors") {
  auto mf = hyperbolic_metric(4);
  CHECK_THROWS_AS(eval_metric(mf, ChartPoint{{0.0, 0.0, 0.0, -0.2}}, 2), cym::domain_error);
  CHECK_NOTHROW(eval_metric(mf, ChartPoint{{0.0, 0.0, 0.0, 1.0}}, 2));
}

TEST_CASE("index algebra basics") {
  const int n = 5;
  auto m = eval_metric(random_metric(n, 3, 0.05), ChartPoint{{0.1, 0.0, -0.1, 0.2, 0.05}}, 3);
  const Jet zero = Jet(n, 3);

  // trace(delta^a_b) = n
  NDArray<Jet> delta({n, n}, zero);
  for (int i = 0; i < n; ++i) delta(i, i) = one_like(zero);
  Tensor<Jet> dt(delta, {{SlotKind::Con, n}, {SlotKind::Cov, n}});
  auto tr = contract(dt, 0, 1);
  CHECK_THAT(tr.a.flat(0).value(), Catch::Matchers::WithinAbs(5.0, 1e-14));

  // antisymmetrization of a symmetric 2-tensor vanishes
  auto gt = metric_tensor(m);
  auto anti = antisym(gt, {0, 1});
  CHECK(max_abs_value(anti.a) <= 1e-15);

  // trace-free part of the metric itself vanishes: g - (tr g / n) g = 0
  Jet trg(n, 3);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) trg.fma(m.ginv(a, b), m.g(a, b));
  Tensor<Jet> tf = gt;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) tf.a(a, b) = tf.a(a, b) - (trg * (1.0 / n)) * m.g(a, b);
  CHECK(max_abs_value(tf.a) <= 1e-13);

  // contraction kind mismatch is an arity error
  CHECK_THROWS_AS(contract(gt, 0, 1), cym::invalid_argument);

  // weight metadata is additive under tensor product
  Tensor<Jet> prod = tensor_product(gt, gt);
  CHECK(prod.weight == 4.0);
}

TEST_CASE("raise and lower are mutually inverse") {
  const int n = 4;
  auto m = eval_metric(random_metric(n, 8, 0.07), ChartPoint{{0.0, 0.1, -0.2, 0.15}}, 3);
  Rng rng(5);
  NDArray<Jet> vv({n}, Jet(n, 3));
  for (int i = 0; i < n; ++i) vv(i) = Jet::constant(n, 3, rng.uniform(-1, 1));
  Tensor<Jet> v(vv, {{SlotKind::Con, n}});
  auto down = flip_slot(v, 0, m.g);
  CHECK(down.slots[0].kind == SlotKind::Cov);
  auto up = flip_slot(down, 0, m.ginv);
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    worst = std::max(worst, std::abs(up.a(i).value() - v.a(i).value()));
  CHECK(worst <= 1e-13);
}

TEST_CASE("metricity: nabla g = 0 for every catalog metric") {
  struct Case {
    MetricField mf;
    ChartPoint p;
  };
  std::vector<Case> cases;
  cases.push_back({flat_metric(4), ChartPoint{{0.2, 0.3, -0.1, 0.4}}});
  cases.push_back({sphere_metric(6), ChartPoint{{0.1, -0.2, 0.05, 0.3, -0.15, 0.2}}});
  cases.push_back({hyperbolic_metric(5), ChartPoint{{0.1, -0.1, 0.2, 0.0, 0.9}}});
  cases.push_back({s3xs3_metric(), ChartPoint{{0.1, -0.2, 0.05, 0.3, -0.15, 0.2}}});
  cases.push_back({uv_block_metric(), ChartPoint{{0.15, -0.1, 0.3, 0.1, -0.2, 0.25}}});
  cases.push_back({random_metric(4, 21, 0.06), ChartPoint{{0.1, 0.0, -0.1, 0.2}}});
  Rng rng(99);
  for (auto& c : cases) {
    INFO(c.mf.name);
    for (int rep = 0; rep < 10; ++rep) {
      ChartPoint q = c.p;
      for (auto& x : q.x) x += 0.02 * rng.uniform(-1, 1);
      auto m = eval_metric(c.mf, q, 3);
      auto gamma = christoffel(m);
      DerivContext<Jet> ctx;
      ctx.gamma = &gamma;
      auto dg = covariant_derivative(metric_tensor(m), ctx);
      CHECK(max_abs_value(dg.a) <= 1e-12);
      // torsion-freeness is structural: Gamma^a_{bc} = Gamma^a_{cb}
      for (int a = 0; a < m.n; ++a)
        for (int b = 0; b < m.n; ++b)
          for (int cc = b; cc < m.n; ++cc) {
            Jet diff = gamma(a, b, cc) - gamma(a, cc, b);
            CHECK(diff.max_abs_coeff() == 0.0);
          }
    }
  }
}

TEST_CASE("Ricci identity on vectors fixes the Riemann sign convention") {
  const int n = 4;
  auto mf = random_metric(n, 31, 0.08);
  ChartPoint p{{0.12, -0.07, 0.2, 0.05}};
  const int K = 4;
  auto m = eval_metric(mf, p, K);
  auto st = riemann_stack(m);
  DerivContext<Jet> ctx;
  ctx.gamma = &st.gamma;

  // random polynomial vector field
  Rng rng(7);
  NDArray<Jet> vv({n}, Jet(n, K));
  for (int i = 0; i < n; ++i) {
    std::vector<PolyTerm> terms;
    for (int t = 0; t < 3; ++t) {
      PolyTerm pt;
      pt.exps.assign(n, 0);
      pt.exps[static_cast<int>(rng.uniform(0, n))] += 1;
      pt.exps[static_cast<int>(rng.uniform(0, n))] += 1;
      pt.coeff = rng.uniform(-1, 1);
      terms.push_back(pt);
    }
    vv(i) = jet_polynomial(n, K, terms, p.x);
  }
  Tensor<Jet> v(vv, {{SlotKind::Con, n}});
  auto dv = covariant_derivative(v, ctx);
  auto ddv = covariant_derivative(dv, ctx);

  double worst = 0.0, scale = 1.0 + max_abs_value(v.a);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        Jet lhs = ddv.a(a, b, c) - ddv.a(b, a, c);
        Jet rhs(n, K - 2);
        for (int d = 0; d < n; ++d) rhs.fma(st.riemann(a, b, c, d), v.a(d));
        worst = std::max(worst, std::abs(lhs.value() - rhs.value()));
      }
  CHECK(worst / scale <= 1e-9);
}

TEST_CASE("Ricci identity on endomorphism-valued 2-forms (hash coupling)") {
  // [nabla_a, nabla_b] F_cd = R_ab^# F_cd + [F_ab, F_cd] for the curvature
  // F of a nonabelian connection, exercising Christoffel + adjoint action.
  const int n = 4, r = 2, K = 4;
  auto mf = random_metric(n, 31, 0.08);
  auto cf = random_gauge(n, 13, r);
  ChartPoint p{{0.12, -0.07, 0.2, 0.05}};
  auto m = eval_metric(mf, p, K + 1);
  auto st = riemann_stack(m);
  auto A = eval_connection(cf, p, K + 1);

  // F_ab = d_a A_b - d_b A_a + [A_a, A_b]
  NDArray<Jet> F({n, n, r, r}, Jet(n, K));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
          Jet acc = A.a(b, i, j).derivative(a) - A.a(a, i, j).derivative(b);
          for (int k = 0; k < r; ++k) {
            acc.fma(A.a(a, i, k), A.a(b, k, j));
            acc.fms(A.a(b, i, k), A.a(a, k, j));
          }
          F(a, b, i, j) = std::move(acc);
        }

  DerivContext<Jet> ctx;
  ctx.gamma = &st.gamma;
  NDArray<Jet> Atrunc({n, r, r}, Jet(n, K));
  for (std::size_t i = 0; i < Atrunc.size(); ++i) Atrunc.flat(i) = A.a.flat(i).truncated(K);
  ctx.gauge = &Atrunc;

  Tensor<Jet> Ft(F, {{SlotKind::Cov, n}, {SlotKind::Cov, n}, {SlotKind::GaugeUp, r}, {SlotKind::GaugeDown, r}});
  auto dF = covariant_derivative(Ft, ctx);
  auto ddF = covariant_derivative(dF, ctx);

  double worst = 0.0;
  const double scale = 1.0 + max_abs_value(F);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d)
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) {
              Jet lhs = ddF.a(a, b, c, d, i, j) - ddF.a(b, a, c, d, i, j);
              // R_ab^# on the two covariant slots (hash-down action)
              Jet rhs(n, K - 2);
              for (int e = 0; e < n; ++e) {
                rhs.fms(st.riemann(a, b, e, c), F(e, d, i, j));
                rhs.fms(st.riemann(a, b, e, d), F(c, e, i, j));
              }
              // [F_ab, F_cd]
              for (int k = 0; k < r; ++k) {
                rhs.fma(F(a, b, i, k), F(c, d, k, j));
                rhs.fms(F(c, d, i, k), F(a, b, k, j));
              }
              worst = std::max(worst, std::abs(lhs.value() - rhs.value()));
            }
  CHECK(worst / scale <= 1e-9);
}
