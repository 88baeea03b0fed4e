#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cym/tensor.hpp"

namespace cym {

/// A point in a coordinate chart. Curvature operations require dimension
/// at least 3 (the Schouten tensor is undefined below that).
struct ChartPoint {
  std::vector<double> x;
  int dim() const { return static_cast<int>(x.size()); }
};

using DomainPred = std::function<bool(const ChartPoint&)>;

inline DomainPred everywhere() {
  return [](const ChartPoint&) { return true; };
}

/// A tensor field on a chart: slot signature, conformal weight, a
/// jet-valued evaluator, and the chart-domain predicate. Evaluation
/// outside the domain raises a typed error instead of propagating NaNs.
struct TensorField {
  std::string name;
  std::vector<Slot> slots;
  double weight = 0.0;
  std::function<NDArray<Jet>(const ChartPoint&, int)> eval;
  DomainPred domain = everywhere();
};

inline Tensor<Jet> eval_field(const TensorField& f, const ChartPoint& p, int order) {
  if (f.domain && !f.domain(p))
    throw domain_error("eval_field: point outside the chart domain of '" + f.name + "'");
  Tensor<Jet> t(f.eval(p, order), f.slots, f.weight);
  return t;
}

/// Metric components and their inverse at a point.
template <class S>
struct MetricValue {
  NDArray<S> g;     // g_{ab}
  NDArray<S> ginv;  // g^{ab}
  int n = 0;
};

/// A metric as a field: evaluator returning g_{ab} jets, with positivity
/// checked at the value level on evaluation.
struct MetricField {
  std::string name;
  int n = 0;
  std::function<NDArray<Jet>(const ChartPoint&, int)> eval;
  DomainPred domain = everywhere();
  std::vector<double> anchor;  // default sample-box center inside the domain
};

inline MetricValue<Jet> eval_metric(const MetricField& m, const ChartPoint& p, int order) {
  if (p.dim() != m.n) throw invalid_argument("eval_metric: point dimension mismatch");
  if (m.domain && !m.domain(p))
    throw domain_error("eval_metric: point outside the chart domain of '" + m.name + "'");
  MetricValue<Jet> v;
  v.n = m.n;
  v.g = m.eval(p, order);
  // symmetry is structural for every catalog metric; positive-definiteness
  // at the value level is checked by Cholesky-style leading minors
  NDArray<double> gv = values(v.g);
  std::vector<std::vector<double>> a(m.n, std::vector<double>(m.n));
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) a[i][j] = gv(i, j);
  for (int k = 0; k < m.n; ++k) {
    // leading principal minors via elimination
    if (a[k][k] <= 0.0)
      throw domain_error("eval_metric: metric '" + m.name + "' not positive definite at point");
    for (int i = k + 1; i < m.n; ++i) {
      const double f = a[i][k] / a[k][k];
      for (int j = k; j < m.n; ++j) a[i][j] -= f * a[k][j];
    }
  }
  v.ginv = invert_matrix(v.g);
  return v;
}

/// A bundle connection in a local trivialization: for each coordinate
/// index a, an r x r matrix of jet scalars acting on up components.
struct ConnectionField {
  std::string name;
  int n = 0;
  int rank = 1;
  bool abelian = true;
  std::function<NDArray<Jet>(const ChartPoint&, int)> eval;  // dims {n, r, r}
  DomainPred domain = everywhere();
};

template <class S>
struct ConnectionValue {
  NDArray<S> a;  // {n, r, r}
  int n = 0, rank = 1;
};

inline ConnectionValue<Jet> eval_connection(const ConnectionField& c, const ChartPoint& p,
                                            int order) {
  if (p.dim() != c.n) throw invalid_argument("eval_connection: point dimension mismatch");
  if (c.domain && !c.domain(p))
    throw domain_error("eval_connection: point outside the chart domain of '" + c.name + "'");
  ConnectionValue<Jet> v;
  v.n = c.n;
  v.rank = c.rank;
  v.a = c.eval(p, order);
  return v;
}

}  // namespace cym
