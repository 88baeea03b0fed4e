#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "cym/multi_index.hpp"

namespace cym {

/// Truncated multivariate Taylor expansion of a function at a chart point.
///
/// coeffs[i] is the coefficient of the monomial offset^mono(i), i.e.
/// d^alpha f(p) / alpha!. The degree-0 coefficient is the value at the
/// point. Storage is dense over the graded-lex multi-index set.
///
/// `order` is both the storage order and the validity order: every stored
/// coefficient is exact (up to roundoff). Derivatives return jets one order
/// lower; binary operations truncate to the smaller operand order. Asking
/// for a derivative beyond `order` raises order_error rather than
/// returning truncated garbage.
///
/// Jets are immutable values in practice; every operation is pure.
class Jet {
 public:
  Jet() : nvars_(1), order_(0), c_(1, 0.0) {}

  Jet(int nvars, int order)
      : nvars_(nvars), order_(order), c_(MultiIndexSet::count(nvars, order), 0.0) {
    if (nvars < 1 || nvars > kMaxVars) throw invalid_argument("jet: bad variable count");
    if (order < 0) throw order_error("jet: order exhausted (negative requested order)");
  }

  static Jet constant(int nvars, int order, double v) {
    Jet j(nvars, order);
    j.c_[0] = v;
    return j;
  }

  /// Jet of the coordinate function x_i expanded at `base`: value base[i],
  /// unit linear coefficient in variable i.
  static Jet seed(std::span<const double> base, int i, int order) {
    const int n = static_cast<int>(base.size());
    if (i < 0 || i >= n) throw invalid_argument("jet_seed: variable index out of range");
    Jet j(n, order);
    j.c_[0] = base[i];
    if (order >= 1) {
      Mono m{};
      m[i] = 1;
      j.c_[jet_tables(n, order).set().index_of(m)] = 1.0;
    }
    return j;
  }

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(c_.size()); }
  double value() const { return c_[0]; }
  double coeff_at(int i) const { return c_[i]; }
  double& coeff_at(int i) { return c_[i]; }
  const std::vector<double>& coeffs() const { return c_; }

  /// Taylor coefficient of the monomial with exponents `alpha`.
  double coeff(std::span<const int> alpha) const {
    const auto& set = tables().set();
    Mono m = pack(alpha);
    const int i = set.index_of(m);
    if (i < 0 || set.degree(i) > order_)
      throw order_error("jet: coefficient request beyond truncation order");
    return c_[i];
  }

  /// Exact partial derivative d^alpha f at the base point (= alpha! * coeff).
  double partial(std::span<const int> alpha) const {
    const auto& set = tables().set();
    Mono m = pack(alpha);
    const int i = set.index_of(m);
    if (i < 0 || set.degree(i) > order_)
      throw order_error("jet: derivative order " + std::to_string(total(alpha)) +
                        " exceeds jet order " + std::to_string(order_));
    return c_[i] * set.factorial(i);
  }

  /// First partial derivative in variable `var`, one order lower.
  Jet derivative(int var) const {
    if (var < 0 || var >= nvars_) throw invalid_argument("jet: derivative variable out of range");
    if (order_ == 0) throw order_error("jet: order exhausted taking a derivative");
    Jet r(nvars_, order_ - 1);
    for (const auto& e : tables().deriv(var))
      if (e.dst < r.size()) r.c_[e.dst] += c_[e.src] * e.exp;
    return r;
  }

  /// Multiplication by x_var^k. Exact: the result is valid (and stored) to
  /// order + k.
  Jet shifted_up(int var, int k) const {
    if (k == 0) return *this;
    Jet r(nvars_, order_ + k);
    const auto& rset = jet_tables(nvars_, order_ + k).set();
    const auto& set = tables().set();
    for (int i = 0; i < size(); ++i) {
      if (c_[i] == 0.0) continue;
      Mono m = set.mono(i);
      m[var] = static_cast<std::uint8_t>(m[var] + k);
      r.c_[rset.index_of(m)] = c_[i];
    }
    return r;
  }

  /// Division by x_var^k, requiring every monomial with exponent < k in
  /// `var` to have an exactly zero coefficient.
  Jet shifted_down(int var, int k) const {
    if (k == 0) return *this;
    if (order_ < k) throw order_error("jet: order exhausted shifting down");
    Jet r(nvars_, order_ - k);
    const auto& rset = jet_tables(nvars_, order_ - k).set();
    const auto& set = tables().set();
    for (int i = 0; i < size(); ++i) {
      if (c_[i] == 0.0) continue;
      Mono m = set.mono(i);
      if (m[var] < k) throw domain_error("jet: not divisible by coordinate power");
      m[var] = static_cast<std::uint8_t>(m[var] - k);
      const int dst = rset.index_of(m);
      if (dst >= 0) r.c_[dst] = c_[i];
    }
    return r;
  }

  /// Coefficient of x_var^level as a jet in the remaining nvars-1 variables
  /// (order drops by `level`). Used to extract s-layers in collar charts.
  Jet extract_layer(int var, int level) const {
    if (nvars_ < 2) throw invalid_argument("jet: extract_layer needs >= 2 variables");
    if (level > order_) throw order_error("jet: layer beyond truncation order");
    Jet r(nvars_ - 1, order_ - level);
    const auto& rset = jet_tables(nvars_ - 1, order_ - level).set();
    const auto& set = tables().set();
    for (int i = 0; i < size(); ++i) {
      if (c_[i] == 0.0 || set.mono(i)[var] != level) continue;
      Mono m{};
      int w = 0;
      for (int v = 0; v < nvars_; ++v)
        if (v != var) m[w++] = set.mono(i)[v];
      const int dst = rset.index_of(m);
      if (dst >= 0) r.c_[dst] = c_[i];
    }
    return r;
  }

  Jet operator-() const {
    Jet r = *this;
    for (auto& x : r.c_) x = -x;
    return r;
  }

  friend Jet operator+(const Jet& a, const Jet& b) {
    Jet r(a.nvars_, std::min(a.order_, b.order_));
    check_compat(a, b);
    for (int i = 0; i < r.size(); ++i) r.c_[i] = a.c_[i] + b.c_[i];
    return r;
  }
  friend Jet operator-(const Jet& a, const Jet& b) {
    Jet r(a.nvars_, std::min(a.order_, b.order_));
    check_compat(a, b);
    for (int i = 0; i < r.size(); ++i) r.c_[i] = a.c_[i] - b.c_[i];
    return r;
  }
  friend Jet operator*(const Jet& a, const Jet& b) {
    check_compat(a, b);
    Jet r(a.nvars_, std::min(a.order_, b.order_));
    r.fma(a, b);
    return r;
  }
  friend Jet operator+(const Jet& a, double s) {
    Jet r = a;
    r.c_[0] += s;
    return r;
  }
  friend Jet operator+(double s, const Jet& a) { return a + s; }
  friend Jet operator-(const Jet& a, double s) { return a + (-s); }
  friend Jet operator-(double s, const Jet& a) { return (-a) + s; }
  friend Jet operator*(const Jet& a, double s) {
    Jet r = a;
    for (auto& x : r.c_) x *= s;
    return r;
  }
  friend Jet operator*(double s, const Jet& a) { return a * s; }
  friend Jet operator/(const Jet& a, double s) { return a * (1.0 / s); }

  /// Truncated Cauchy quotient. The divisor must be nonzero at the point.
  friend Jet operator/(const Jet& a, const Jet& b) {
    check_compat(a, b);
    if (b.value() == 0.0) throw domain_error("jet: division by a jet with zero value");
    const int K = std::min(a.order_, b.order_);
    Jet r(a.nvars_, K);
    const auto& t = jet_tables(a.nvars_, K);
    for (int ic = 0; ic < r.size(); ++ic) {
      double acc = a.c_[ic];
      for (int k = t.prod_begin(ic); k < t.prod_end(ic); ++k) {
        const int ia = t.prod_a(k), ib = t.prod_b(k);
        if (ib == ic) continue;  // the unknown r[ic] term (ia == 0)
        acc -= b.c_[ia] * r.c_[ib];
      }
      r.c_[ic] = acc / b.c_[0];
    }
    return r;
  }
  friend Jet operator/(double s, const Jet& b) {
    return Jet::constant(b.nvars_, b.order_, s) / b;
  }

  Jet& operator+=(const Jet& b) { return *this = *this + b; }
  Jet& operator-=(const Jet& b) { return *this = *this - b; }
  Jet& operator*=(const Jet& b) { return *this = *this * b; }
  Jet& operator*=(double s) {
    for (auto& x : c_) x *= s;
    return *this;
  }

  /// Copy truncated to a lower order (prefix of the coefficient array).
  Jet truncated(int order) const {
    if (order >= order_) return *this;
    Jet r(nvars_, order);
    for (int i = 0; i < r.size(); ++i) r.c_[i] = c_[i];
    return r;
  }

  /// this += sign * a * b without temporaries; hot path of all tensor
  /// contractions. The accumulator truncates itself to
  /// min(order, a.order, b.order) first: coefficients beyond the product's
  /// validity cannot survive the sum.
  void accumulate_product(const Jet& a, const Jet& b, double sign) {
    check_compat(a, b);
    if (order_ > std::min(a.order_, b.order_)) *this = truncated(std::min(a.order_, b.order_));
    const auto& t = jet_tables(nvars_, order_);
    const double* pa = a.c_.data();
    const double* pb = b.c_.data();
    for (int ic = 0; ic < size(); ++ic) {
      double acc = 0.0;
      for (int k = t.prod_begin(ic); k < t.prod_end(ic); ++k) acc += pa[t.prod_a(k)] * pb[t.prod_b(k)];
      c_[ic] += sign * acc;
    }
  }
  void fma(const Jet& a, const Jet& b) { accumulate_product(a, b, 1.0); }
  void fms(const Jet& a, const Jet& b) { accumulate_product(a, b, -1.0); }

  /// Largest absolute coefficient; the scale used in normalized residuals.
  double max_abs_coeff() const {
    double m = 0.0;
    for (double x : c_) m = std::max(m, std::abs(x));
    return m;
  }

  const JetTables& tables() const { return jet_tables(nvars_, order_); }

 private:
  static void check_compat(const Jet& a, const Jet& b) {
    if (a.nvars_ != b.nvars_) throw invalid_argument("jet: mixing different variable counts");
  }
  Mono pack(std::span<const int> alpha) const {
    if (static_cast<int>(alpha.size()) != nvars_)
      throw invalid_argument("jet: multi-index arity mismatch");
    Mono m{};
    for (int v = 0; v < nvars_; ++v) {
      if (alpha[v] < 0) throw invalid_argument("jet: negative multi-index entry");
      m[v] = static_cast<std::uint8_t>(alpha[v]);
    }
    return m;
  }
  static int total(std::span<const int> alpha) {
    int t = 0;
    for (int a : alpha) t += a;
    return t;
  }

  int nvars_, order_;
  std::vector<double> c_;
};

namespace detail {

/// y = sum_m series[m] * h^m truncated at the jet order, via Horner.
/// h must have zero constant term.
inline Jet compose_series(const Jet& h, std::span<const double> series) {
  const int K = h.order();
  Jet y = Jet::constant(h.nvars(), K, series[K]);
  for (int m = K - 1; m >= 0; --m) {
    Jet t(h.nvars(), K);
    t.fma(y, h);
    t.coeff_at(0) += series[m];
    y = std::move(t);
  }
  return y;
}

inline Jet shift_to_zero(const Jet& a) {
  Jet h = a;
  h.coeff_at(0) = 0.0;
  return h;
}

}  // namespace detail

/// Unary analytic functions by univariate series composition on the
/// shifted jet (a = a0 + h, f(a) = sum f^(m)(a0)/m! h^m).

inline Jet sqrt(const Jet& a) {
  if (a.value() <= 0.0) throw domain_error("jet: sqrt of a jet with non-positive value");
  const int K = a.order();
  std::vector<double> s(K + 1);
  // binomial series: C(1/2, m) * a0^(1/2 - m)
  s[0] = std::sqrt(a.value());
  double c = 0.5;
  for (int m = 1; m <= K; ++m) {
    s[m] = s[m - 1] * c / (m * a.value());
    c -= 1.0;
  }
  return detail::compose_series(detail::shift_to_zero(a), s);
}

inline Jet exp(const Jet& a) {
  const int K = a.order();
  std::vector<double> s(K + 1);
  s[0] = std::exp(a.value());
  for (int m = 1; m <= K; ++m) s[m] = s[m - 1] / m;
  return detail::compose_series(detail::shift_to_zero(a), s);
}

inline Jet sin(const Jet& a) {
  const int K = a.order();
  const double sv = std::sin(a.value()), cv = std::cos(a.value());
  std::vector<double> s(K + 1);
  double fact = 1.0;
  for (int m = 0; m <= K; ++m) {
    if (m > 0) fact *= m;
    const double d = (m % 4 == 0) ? sv : (m % 4 == 1) ? cv : (m % 4 == 2) ? -sv : -cv;
    s[m] = d / fact;
  }
  return detail::compose_series(detail::shift_to_zero(a), s);
}

inline Jet cos(const Jet& a) {
  const int K = a.order();
  const double sv = std::sin(a.value()), cv = std::cos(a.value());
  std::vector<double> s(K + 1);
  double fact = 1.0;
  for (int m = 0; m <= K; ++m) {
    if (m > 0) fact *= m;
    const double d = (m % 4 == 0) ? cv : (m % 4 == 1) ? -sv : (m % 4 == 2) ? -cv : sv;
    s[m] = d / fact;
  }
  return detail::compose_series(detail::shift_to_zero(a), s);
}

/// a^r. Non-integer exponents require a positive value at the point;
/// non-negative integer exponents work for any jet.
inline Jet pow(const Jet& a, double r) {
  const bool integral = (r == std::floor(r));
  if (integral && r >= 0.0) {
    Jet y = Jet::constant(a.nvars(), a.order(), 1.0);
    for (int i = 0; i < static_cast<int>(r); ++i) y = y * a;
    return y;
  }
  if (a.value() <= 0.0) throw domain_error("jet: pow of a jet with non-positive value");
  const int K = a.order();
  std::vector<double> s(K + 1);
  s[0] = std::pow(a.value(), r);
  double c = r;
  for (int m = 1; m <= K; ++m) {
    s[m] = s[m - 1] * c / (m * a.value());
    c -= 1.0;
  }
  return detail::compose_series(detail::shift_to_zero(a), s);
}

/// --- spec-facing convenience wrappers ---

inline Jet jet_seed(std::span<const double> base, int i, int order) {
  return Jet::seed(base, i, order);
}

inline double jet_partial(const Jet& j, std::span<const int> alpha) { return j.partial(alpha); }

/// Exact jet of a polynomial sum(c_k * x^e_k) re-centered at `point`,
/// by binomial expansion of each monomial. No truncation error.
struct PolyTerm {
  std::vector<int> exps;  // one exponent per variable
  double coeff = 0.0;
};

inline Jet jet_polynomial(int nvars, int order, std::span<const PolyTerm> terms,
                          std::span<const double> point) {
  Jet r(nvars, order);
  const auto& set = jet_tables(nvars, order).set();
  auto binom = [](int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
  };
  for (const auto& t : terms) {
    for (int i = 0; i < set.size(); ++i) {
      const Mono& al = set.mono(i);
      double contrib = t.coeff;
      bool ok = true;
      for (int v = 0; v < nvars && ok; ++v) {
        const int e = t.exps[v], a = al[v];
        if (a > e) {
          ok = false;
          break;
        }
        contrib *= binom(e, a) * std::pow(point[v], e - a);
      }
      if (ok) r.coeff_at(i) += contrib;
    }
  }
  return r;
}

}  // namespace cym
