#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "cym/jet.hpp"
#include "support/oracles.hpp"

using cym::Jet;
using cym::test::Rng;

namespace {
std::vector<int> mi(std::initializer_list<int> v) { return std::vector<int>(v); }
}  // namespace

TEST_CASE("coordinate jets carry the point value and a unit linear term") {
  const std::vector<double> p{2.0, 3.0};
  Jet x0 = cym::jet_seed(p, 0, 2);
  CHECK(x0.value() == 2.0);
  CHECK(x0.coeff(mi({1, 0})) == 1.0);
  CHECK(x0.coeff(mi({0, 1})) == 0.0);
  CHECK(x0.coeff(mi({2, 0})) == 0.0);

  const std::vector<double> origin{0.0, 0.0};
  Jet x1 = cym::jet_seed(origin, 1, 3);
  CHECK(x1.value() == 0.0);
  CHECK(x1.coeff(mi({0, 1})) == 1.0);

  // identity derivative at arbitrary points
  CHECK(cym::jet_seed(p, 1, 4).partial(mi({0, 1})) == 1.0);

  CHECK_THROWS_AS(cym::jet_seed(p, 2, 2), cym::invalid_argument);
}

TEST_CASE("product of two coordinate jets at the origin") {
  const std::vector<double> origin{0.0, 0.0};
  Jet x = cym::jet_seed(origin, 0, 3);
  Jet y = cym::jet_seed(origin, 1, 3);
  Jet xy = x * y;
  for (int i = 0; i < xy.size(); ++i) {
    const auto& m = xy.tables().set().mono(i);
    const double expect = (m[0] == 1 && m[1] == 1) ? 1.0 : 0.0;
    CHECK(xy.coeff_at(i) == expect);
  }
}

TEST_CASE("geometric series from jet division") {
  const std::vector<double> origin{0.0};
  Jet x = cym::jet_seed(origin, 0, 3);
  Jet r = 1.0 / (1.0 + x);
  CHECK(r.coeff(mi({0})) == 1.0);
  CHECK(r.coeff(mi({1})) == -1.0);
  CHECK(r.coeff(mi({2})) == 1.0);
  CHECK(r.coeff(mi({3})) == -1.0);
}

TEST_CASE("division and sqrt preconditions") {
  const std::vector<double> origin{0.0};
  Jet x = cym::jet_seed(origin, 0, 3);
  CHECK_THROWS_AS(1.0 / x, cym::domain_error);
  CHECK_THROWS_AS(cym::sqrt(x), cym::domain_error);  // zero value
  CHECK_THROWS_AS(cym::sqrt(x - 1.0), cym::domain_error);
}

TEST_CASE("metric-style composite sqrt(1 - f(u+v)^2) matches finite differences") {
  // f(t) = (2 + sin t)/4, the default profile of the uv-block metric.
  auto fn = [](const std::vector<long double>& q) {
    const long double f = (2.0L + std::sin(q[0] + q[1])) / 4.0L;
    return std::sqrt(1.0L - f * f);
  };
  const std::vector<double> p{0.0, 0.0};
  const int K = 4;
  Jet u = cym::jet_seed(p, 0, K), v = cym::jet_seed(p, 1, K);
  Jet f = (2.0 + cym::sin(u + v)) * 0.25;
  Jet w = cym::sqrt(1.0 - f * f);

  const auto& set = w.tables().set();
  for (int i = 0; i < w.size(); ++i) {
    std::vector<int> alpha(2);
    alpha[0] = set.mono(i)[0];
    alpha[1] = set.mono(i)[1];
    const double got = w.partial(alpha);
    const double want = cym::test::fd_partial(fn, p, alpha, 1e-3);
    CHECK_THAT(got, Catch::Matchers::WithinRel(want, 1e-6) ||
                        Catch::Matchers::WithinAbs(want, 1e-6));
  }
}

TEST_CASE("jet_partial basics") {
  const std::vector<double> p{1.5, -0.5};
  Jet c = Jet::constant(2, 4, 7.25);
  CHECK(c.partial(mi({1, 0})) == 0.0);
  CHECK(c.partial(mi({0, 2})) == 0.0);

  Jet x = cym::jet_seed(p, 0, 4);
  CHECK((x * x).partial(mi({2, 0})) == 2.0);

  const std::vector<double> origin{0.0, 0.0};
  Jet e = cym::exp(cym::jet_seed(origin, 0, 5));
  for (int m = 0; m <= 5; ++m) {
    CHECK_THAT(e.partial(mi({m, 0})), Catch::Matchers::WithinAbs(1.0, 1e-14));
  }
}

TEST_CASE("order accounting: derivatives shrink, exhaustion throws") {
  const std::vector<double> p{0.3, 0.4};
  Jet x = cym::jet_seed(p, 0, 2);
  Jet d = x.derivative(0);
  CHECK(d.order() == 1);
  CHECK(d.value() == 1.0);
  Jet dd = d.derivative(0);
  CHECK(dd.order() == 0);
  CHECK_THROWS_AS(dd.derivative(0), cym::order_error);
  CHECK_THROWS_AS(x.partial(mi({3, 0})), cym::order_error);
}

TEST_CASE("random integer polynomials reproduce Taylor coefficients exactly") {
  // Coefficients of an integer polynomial expanded at an integer point are
  // integers computed exactly in double arithmetic: require bitwise equality.
  Rng rng(20260810);
  const int n = 3, K = 4;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<cym::PolyTerm> terms;
    const int nterms = 1 + static_cast<int>(rng.uniform(0, 6));
    for (int t = 0; t < nterms; ++t) {
      cym::PolyTerm pt;
      pt.exps = {0, 0, 0};
      int deg = 0;
      for (int v = 0; v < n; ++v) {
        const int e = static_cast<int>(rng.uniform(0, 3));
        pt.exps[v] = (deg + e <= K) ? e : 0;
        deg += pt.exps[v];
      }
      pt.coeff = std::floor(rng.uniform(-5, 6));
      terms.push_back(pt);
    }
    const std::vector<double> p{1.0, -2.0, 3.0};

    // route 1: binomial re-centering (closed form, the oracle)
    Jet direct = cym::jet_polynomial(n, K, terms, p);

    // route 2: evaluate the polynomial with jet arithmetic from seeds
    Jet viaops(n, K);
    std::vector<Jet> seeds;
    for (int v = 0; v < n; ++v) seeds.push_back(cym::jet_seed(p, v, K));
    for (const auto& t : terms) {
      Jet m = Jet::constant(n, K, t.coeff);
      for (int v = 0; v < n; ++v)
        for (int e = 0; e < t.exps[v]; ++e) m = m * seeds[v];
      viaops += m;
    }
    for (int i = 0; i < direct.size(); ++i) CHECK(viaops.coeff_at(i) == direct.coeff_at(i));
  }
}

TEST_CASE("Leibniz rule for first partials of products") {
  Rng rng(42);
  const int n = 2, K = 3;
  const std::vector<double> p{0.7, -0.2};
  for (int trial = 0; trial < 20; ++trial) {
    Jet u = cym::jet_seed(p, 0, K), v = cym::jet_seed(p, 1, K);
    Jet f = cym::sin(u * rng.uniform(0.5, 1.5)) + cym::exp(v * rng.uniform(-0.4, 0.4));
    Jet g = 1.0 / (2.0 + u * v) + cym::cos(u + v);
    for (int var = 0; var < n; ++var) {
      std::vector<int> e(n, 0);
      e[var] = 1;
      const double lhs = (f * g).partial(e);
      const double rhs = f.partial(e) * g.value() + f.value() * g.partial(e);
      CHECK_THAT(lhs, Catch::Matchers::WithinRel(rhs, 1e-12) ||
                          Catch::Matchers::WithinAbs(rhs, 1e-12));
    }
  }
}

TEST_CASE("chain rule for analytic functions agrees with finite differences") {
  const std::vector<double> p{0.3, 0.8};
  const int K = 3;
  Jet u = cym::jet_seed(p, 0, K), v = cym::jet_seed(p, 1, K);
  struct Case {
    const char* name;
    Jet jet;
    cym::test::ScalarFnL fn;
  };
  const Case cases[] = {
      {"sqrt", cym::sqrt(1.0 + u * u + v * v),
       [](const std::vector<long double>& q) { return std::sqrt(1.0L + q[0] * q[0] + q[1] * q[1]); }},
      {"sin", cym::sin(u * v + 0.5 * u),
       [](const std::vector<long double>& q) { return std::sin(q[0] * q[1] + 0.5L * q[0]); }},
      {"cos", cym::cos(u - 2.0 * v),
       [](const std::vector<long double>& q) { return std::cos(q[0] - 2.0L * q[1]); }},
      {"exp", cym::exp(0.3 * u * u - v),
       [](const std::vector<long double>& q) { return std::exp(0.3L * q[0] * q[0] - q[1]); }},
      {"pow", cym::pow(1.0 + u * u + 0.5 * v, 1.7),
       [](const std::vector<long double>& q) { return std::pow(1.0L + q[0] * q[0] + 0.5L * q[1], 1.7L); }},
  };
  for (const auto& c : cases) {
    INFO(c.name);
    const auto& set = c.jet.tables().set();
    for (int i = 0; i < c.jet.size(); ++i) {
      std::vector<int> alpha{set.mono(i)[0], set.mono(i)[1]};
      const double got = c.jet.partial(alpha);
      const double want = cym::test::fd_partial(c.fn, p, alpha, 1e-3);
      CHECK_THAT(got, Catch::Matchers::WithinRel(want, 1e-6) ||
                          Catch::Matchers::WithinAbs(want, 1e-6));
    }
  }
}

TEST_CASE("shift helpers are exact inverses where defined") {
  const std::vector<double> p{0.0, 0.6};
  Jet f = cym::exp(cym::jet_seed(p, 1, 4)) * cym::jet_seed(p, 0, 4);
  Jet up = f.shifted_up(0, 2);
  CHECK(up.order() == 6);
  Jet back = up.shifted_down(0, 2);
  for (int i = 0; i < f.size(); ++i)
    CHECK(back.coeff_at(i) == f.coeff_at(i));
  // fails when low layers are occupied
  CHECK_THROWS_AS(f.shifted_down(1, 1), cym::domain_error);
}

TEST_CASE("layer extraction peels one variable") {
  // f(s,x) = (1 + 3 s^2) * exp(x): the s^2 layer is 3 exp(x).
  const std::vector<double> p{0.0, 0.25};
  Jet s = cym::jet_seed(p, 0, 5), x = cym::jet_seed(p, 1, 5);
  Jet f = (1.0 + 3.0 * s * s) * cym::exp(x);
  Jet layer = f.extract_layer(0, 2);
  CHECK(layer.nvars() == 1);
  Jet expect = cym::exp(cym::jet_seed(std::vector<double>{0.25}, 0, 3)) * 3.0;
  for (int i = 0; i < layer.size(); ++i)
    CHECK_THAT(layer.coeff_at(i), Catch::Matchers::WithinAbs(expect.coeff_at(i), 1e-14));
}
