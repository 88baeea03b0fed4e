#pragma once

// Catalog of metrics, connections and conformal factors used by the
// scenario runner and the test suites: standard Einstein fixtures, the two
// worked line-bundle examples on R^6, and seeded random polynomial data.

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include "cym/fields.hpp"

namespace cym {

/// Deterministic xorshift generator; identical streams on every platform,
/// so scenario reports depend only on (seed, parameters).
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : s_(seed ? seed : 0x9e3779b97f4a7c15ull) {}
  std::uint64_t next_u64() {
    std::uint64_t x = s_;
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
    return s_ = x;
  }
  double uniform(double lo = 0.0, double hi = 1.0) {
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

 private:
  std::uint64_t s_;
};

using Params = std::map<std::string, double>;

inline double param(const Params& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

/// ---- metrics ----

inline MetricField flat_metric(int n) {
  MetricField m;
  m.name = "flat(" + std::to_string(n) + ")";
  m.n = n;
  m.anchor.assign(n, 0.0);
  m.eval = [n](const ChartPoint& p, int K) {
    NDArray<Jet> g({n, n}, Jet(n, K));
    for (int i = 0; i < n; ++i) g(i, i) = Jet::constant(n, K, 1.0);
    (void)p;
    return g;
  };
  return m;
}

/// Unit round sphere in the stereographic chart: g = 4 delta / (1+|x|^2)^2.
inline MetricField sphere_metric(int n) {
  MetricField m;
  m.name = "sphere(" + std::to_string(n) + ")";
  m.n = n;
  m.anchor.assign(n, 0.0);
  m.eval = [n](const ChartPoint& p, int K) {
    Jet r2(n, K);
    for (int i = 0; i < n; ++i) {
      Jet xi = Jet::seed(p.x, i, K);
      r2.fma(xi, xi);
    }
    Jet w = 1.0 + r2;
    Jet conf = 4.0 / (w * w);
    NDArray<Jet> g({n, n}, Jet(n, K));
    for (int i = 0; i < n; ++i) g(i, i) = conf;
    return g;
  };
  return m;
}

/// Hyperbolic space in the upper-half-space chart: g = delta / x_n^2,
/// domain x_n > 0.
inline MetricField hyperbolic_metric(int n) {
  MetricField m;
  m.name = "hyperbolic(" + std::to_string(n) + ")";
  m.n = n;
  m.anchor.assign(n, 0.0);
  m.anchor[n - 1] = 1.0;
  m.domain = [n](const ChartPoint& p) { return p.x[n - 1] > 0.0; };
  m.eval = [n](const ChartPoint& p, int K) {
    Jet h = Jet::seed(p.x, n - 1, K);
    Jet conf = 1.0 / (h * h);
    NDArray<Jet> g({n, n}, Jet(n, K));
    for (int i = 0; i < n; ++i) g(i, i) = conf;
    return g;
  };
  return m;
}

/// S^3(1) x S^3(1) in a product of stereographic charts; Einstein with
/// Ric = 2 g but not conformally flat.
inline MetricField s3xs3_metric() {
  MetricField m;
  m.name = "s3xs3";
  m.n = 6;
  m.anchor.assign(6, 0.0);
  m.eval = [](const ChartPoint& p, int K) {
    const int n = 6;
    NDArray<Jet> g({n, n}, Jet(n, K));
    for (int blk = 0; blk < 2; ++blk) {
      Jet r2(n, K);
      for (int i = 0; i < 3; ++i) {
        Jet xi = Jet::seed(p.x, 3 * blk + i, K);
        r2.fma(xi, xi);
      }
      Jet w = 1.0 + r2;
      Jet conf = 4.0 / (w * w);
      for (int i = 0; i < 3; ++i) g(3 * blk + i, 3 * blk + i) = conf;
    }
    return g;
  };
  return m;
}

/// The uv-block metric on R^6: g = delta + 2 sqrt(1 - f(u+v)^2) du dv with
/// f(t) = (c0 + amp sin t)/den, i.e. g_uv = sqrt(1 - f^2). The default
/// profile f = (2 + sin t)/4 keeps 0 < f < 1 everywhere, so the metric is
/// globally nondegenerate.
inline Jet uv_profile(const Jet& t, const Params& prm) {
  const double c0 = param(prm, "f_c0", 2.0);
  const double amp = param(prm, "f_amp", 1.0);
  const double den = param(prm, "f_den", 4.0);
  return (c0 + amp * sin(t)) * (1.0 / den);
}

inline void validate_uv_profile(const Params& prm) {
  const double c0 = param(prm, "f_c0", 2.0);
  const double amp = param(prm, "f_amp", 1.0);
  const double den = param(prm, "f_den", 4.0);
  const double lo = (c0 - std::abs(amp)) / den, hi = (c0 + std::abs(amp)) / den;
  if (!(lo > 0.0 && hi < 1.0))
    throw invalid_argument("uv_block metric: profile must satisfy 0 < f < 1 (degenerate otherwise)");
}

inline MetricField uv_block_metric(const Params& prm = {}) {
  validate_uv_profile(prm);
  MetricField m;
  m.name = "g6_example";
  m.n = 6;
  m.anchor.assign(6, 0.0);
  m.eval = [prm](const ChartPoint& p, int K) {
    const int n = 6;
    Jet u = Jet::seed(p.x, 0, K), v = Jet::seed(p.x, 1, K);
    Jet f = uv_profile(u + v, prm);
    Jet guv = sqrt(1.0 - f * f);
    NDArray<Jet> g({n, n}, Jet(n, K));
    for (int i = 0; i < n; ++i) g(i, i) = Jet::constant(n, K, 1.0);
    g(0, 1) = guv;
    g(1, 0) = guv;
    return g;
  };
  return m;
}

/// Seeded perturbation of the flat metric by symmetric polynomial terms of
/// degree <= 4; `amp` keeps it positive definite on the sample box.
inline MetricField random_metric(int n, std::uint64_t seed, double amp) {
  MetricField m;
  std::ostringstream nm;
  nm << "random_metric(n=" << n << ",seed=" << seed << ",amp=" << amp << ")";
  m.name = nm.str();
  m.n = n;
  m.anchor.assign(n, 0.0);
  // polynomial data drawn once so the field is a fixed smooth metric
  SeededRng rng(seed * 0x51ab1ull + 17u + static_cast<std::uint64_t>(n));
  struct Entry {
    int a, b;
    std::vector<PolyTerm> terms;
  };
  auto entries = std::make_shared<std::vector<Entry>>();
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      Entry e{a, b, {}};
      const int nterms = 3 + static_cast<int>(rng.uniform(0, 3));
      for (int t = 0; t < nterms; ++t) {
        PolyTerm pt;
        pt.exps.assign(n, 0);
        int deg = 1 + static_cast<int>(rng.uniform(0, 4));  // degree 1..4
        for (int d = 0; d < deg; ++d) pt.exps[static_cast<int>(rng.uniform(0, n))] += 1;
        pt.coeff = amp * rng.uniform(-1.0, 1.0) / (1.0 + deg);
        e.terms.push_back(pt);
      }
      entries->push_back(std::move(e));
    }
  m.eval = [n, entries](const ChartPoint& p, int K) {
    NDArray<Jet> g({n, n}, Jet(n, K));
    for (int i = 0; i < n; ++i) g(i, i) = Jet::constant(n, K, 1.0);
    for (const auto& e : *entries) {
      Jet pert = jet_polynomial(n, K, e.terms, p.x);
      g(e.a, e.b) += pert;
      if (e.a != e.b) g(e.b, e.a) += pert;
    }
    return g;
  };
  return m;
}

/// ---- connections ----

inline ConnectionField zero_connection(int n, int rank = 1) {
  ConnectionField c;
  c.name = "zero";
  c.n = n;
  c.rank = rank;
  c.abelian = (rank == 1);
  c.eval = [n, rank](const ChartPoint&, int K) {
    return NDArray<Jet>({n, rank, rank}, Jet(n, K));
  };
  return c;
}

/// A = <lambda, x> x^flat on flat R^6 (E the Euler field): the line-bundle
/// connection whose current is the parallel 1-form -5 lambda^flat.
inline ConnectionField euclid_gauge(std::vector<double> lambda) {
  ConnectionField c;
  c.name = "euclid_gauge";
  c.n = 6;
  c.rank = 1;
  c.abelian = true;
  c.eval = [lambda](const ChartPoint& p, int K) {
    const int n = 6;
    NDArray<Jet> a({n, 1, 1}, Jet(n, K));
    Jet lx(n, K);
    for (int i = 0; i < n; ++i) lx += lambda[i] * Jet::seed(p.x, i, K);
    for (int b = 0; b < n; ++b) a(b, 0, 0) = lx * Jet::seed(p.x, b, K);
    return a;
  };
  return c;
}

/// Abelian potential with constant curvature F0: A_b = 1/2 F0_{ab} x^a.
inline ConnectionField constant_f_connection(int n, std::uint64_t seed) {
  ConnectionField c;
  c.name = "constant_F";
  c.n = n;
  c.rank = 1;
  c.abelian = true;
  auto f0 = std::make_shared<std::vector<double>>(n * n, 0.0);
  SeededRng rng(seed * 0xc0ffee123ull + 5u);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      const double v = rng.uniform(-1.0, 1.0);
      (*f0)[a * n + b] = v;
      (*f0)[b * n + a] = -v;
    }
  c.eval = [n, f0](const ChartPoint& p, int K) {
    NDArray<Jet> a({n, 1, 1}, Jet(n, K));
    for (int b = 0; b < n; ++b) {
      Jet acc(n, K);
      for (int d = 0; d < n; ++d)
        if ((*f0)[d * n + b] != 0.0) acc += (0.5 * (*f0)[d * n + b]) * Jet::seed(p.x, d, K);
      a(b, 0, 0) = acc;
    }
    return a;
  };
  return c;
}

/// The uv-block example's potential: F = f(u+v) du ^ dv from
/// A = (antiderivative structure irrelevant; use A_v = h(u+v), A_u = -h(u+v)
/// with h' = f/2 realized through jet arithmetic of the closed form).
/// With f = (c0 + amp sin t)/den an antiderivative is
/// h(t) = (c0 t - amp cos t)/(2 den).
inline ConnectionField uv_block_connection(const Params& prm = {}) {
  validate_uv_profile(prm);
  ConnectionField c;
  c.name = "g6_gauge";
  c.n = 6;
  c.rank = 1;
  c.abelian = true;
  c.eval = [prm](const ChartPoint& p, int K) {
    const int n = 6;
    const double c0 = param(prm, "f_c0", 2.0);
    const double amp = param(prm, "f_amp", 1.0);
    const double den = param(prm, "f_den", 4.0);
    Jet t = Jet::seed(p.x, 0, K) + Jet::seed(p.x, 1, K);
    Jet h = (c0 * t - amp * cos(t)) * (1.0 / (2.0 * den));
    NDArray<Jet> a({n, 1, 1}, Jet(n, K));
    a(0, 0, 0) = -h;  // A = h (dv - du): dA = 2 h' du dv = f du ^ dv
    a(1, 0, 0) = h;
    return a;
  };
  return c;
}

/// Seeded rank-r connection with polynomial matrix entries of degree <= 3.
inline ConnectionField random_gauge(int n, std::uint64_t seed, int rank, double amp = 0.5) {
  ConnectionField c;
  std::ostringstream nm;
  nm << "random_gauge(n=" << n << ",seed=" << seed << ",rank=" << rank << ")";
  c.name = nm.str();
  c.n = n;
  c.rank = rank;
  c.abelian = (rank == 1);
  SeededRng rng(seed * 0xabcd1234ull + 99u + static_cast<std::uint64_t>(rank));
  struct Entry {
    int x, i, j;
    std::vector<PolyTerm> terms;
  };
  auto entries = std::make_shared<std::vector<Entry>>();
  for (int x = 0; x < n; ++x)
    for (int i = 0; i < rank; ++i)
      for (int j = 0; j < rank; ++j) {
        Entry e{x, i, j, {}};
        const int nterms = 2 + static_cast<int>(rng.uniform(0, 2));
        for (int t = 0; t < nterms; ++t) {
          PolyTerm pt;
          pt.exps.assign(n, 0);
          const int deg = 1 + static_cast<int>(rng.uniform(0, 3));
          for (int d = 0; d < deg; ++d) pt.exps[static_cast<int>(rng.uniform(0, n))] += 1;
          pt.coeff = amp * rng.uniform(-1.0, 1.0) / (1.0 + deg);
          e.terms.push_back(pt);
        }
        entries->push_back(std::move(e));
      }
  c.eval = [n, rank, entries](const ChartPoint& p, int K) {
    NDArray<Jet> a({n, rank, rank}, Jet(n, K));
    for (const auto& e : *entries) a(e.x, e.i, e.j) += jet_polynomial(n, K, e.terms, p.x);
    return a;
  };
  return c;
}

/// ---- conformal factors ----

/// Omega = exp(seeded polynomial of degree <= 3 with small coefficients):
/// positive everywhere, nontrivial derivatives to all tested orders.
struct ConformalFactorField {
  std::string name;
  int n = 0;
  std::function<Jet(const ChartPoint&, int)> eval;
};

inline ConformalFactorField random_conformal_factor(int n, std::uint64_t seed, double amp = 0.1) {
  ConformalFactorField f;
  std::ostringstream nm;
  nm << "random_omega(n=" << n << ",seed=" << seed << ")";
  f.name = nm.str();
  f.n = n;
  SeededRng rng(seed * 0x5eedull + 3u);
  auto terms = std::make_shared<std::vector<PolyTerm>>();
  const int nterms = 4;
  for (int t = 0; t < nterms; ++t) {
    PolyTerm pt;
    pt.exps.assign(n, 0);
    const int deg = 1 + static_cast<int>(rng.uniform(0, 3));
    for (int d = 0; d < deg; ++d) pt.exps[static_cast<int>(rng.uniform(0, n))] += 1;
    pt.coeff = amp * rng.uniform(-1.0, 1.0);
    terms->push_back(pt);
  }
  f.eval = [n, terms](const ChartPoint& p, int K) {
    return exp(jet_polynomial(n, K, *terms, p.x));
  };
  return f;
}

inline ConformalFactorField constant_conformal_factor(int n, double value) {
  ConformalFactorField f;
  f.name = "omega_const";
  f.n = n;
  f.eval = [n, value](const ChartPoint&, int K) { return Jet::constant(n, K, value); };
  return f;
}

/// Seeded sample points: uniform in a box of side `side` centered at the
/// entry's anchor (default side 0.4 keeps every catalog domain valid).
inline std::vector<ChartPoint> sample_points(const std::vector<double>& anchor, int count,
                                             std::uint64_t seed, double side = 0.4) {
  SeededRng rng(seed * 0x9e37ull + 0xb7e151628aed2a6bull);
  std::vector<ChartPoint> pts;
  for (int k = 0; k < count; ++k) {
    ChartPoint p;
    p.x = anchor;
    for (auto& c : p.x) c += side * (rng.uniform() - 0.5);
    pts.push_back(std::move(p));
  }
  return pts;
}

}  // namespace cym
