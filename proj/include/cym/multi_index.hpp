#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "cym/errors.hpp"

namespace cym {

/// Hard cap on the number of jet variables. Charts used here have at most
/// 7 coordinates (collar charts have 5).
inline constexpr int kMaxVars = 8;

using Mono = std::array<std::uint8_t, kMaxVars>;

/// The graded-lexicographic multi-index set for `nvars` variables up to
/// total degree `order`, with the lookup tables every jet operation needs.
///
/// Ordering is by total degree first, then lexicographic. A key property
/// used throughout: the first size(nvars, k) entries of the set for order
/// K >= k are exactly the order-k set, so a lower-order jet's coefficient
/// array is a prefix-compatible view of a higher-order one.
class MultiIndexSet {
 public:
  MultiIndexSet(int nvars, int order) : nvars_(nvars), order_(order) {
    if (nvars < 1 || nvars > kMaxVars) throw invalid_argument("multi-index: bad variable count");
    if (order < 0) throw invalid_argument("multi-index: negative order");
    Mono m{};
    for (int deg = 0; deg <= order; ++deg) emit_degree(m, 0, deg, deg);
    for (std::size_t i = 0; i < monos_.size(); ++i) rank_.emplace(key(monos_[i]), static_cast<int>(i));
    degree_.resize(monos_.size());
    factorial_.resize(monos_.size());
    for (std::size_t i = 0; i < monos_.size(); ++i) {
      int d = 0;
      double f = 1.0;
      for (int v = 0; v < nvars_; ++v) {
        d += monos_[i][v];
        for (int t = 2; t <= monos_[i][v]; ++t) f *= t;
      }
      degree_[i] = d;
      factorial_[i] = f;
    }
  }

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(monos_.size()); }
  const Mono& mono(int i) const { return monos_[i]; }
  int degree(int i) const { return degree_[i]; }
  double factorial(int i) const { return factorial_[i]; }

  /// Rank of a multi-index in graded-lex order; -1 if outside the set.
  int index_of(const Mono& m) const {
    auto it = rank_.find(key(m));
    return it == rank_.end() ? -1 : it->second;
  }

  /// Number of multi-indices in `nvars` variables with total degree <= order.
  static int count(int nvars, int order) {
    // C(nvars + order, order)
    long long c = 1;
    for (int i = 1; i <= nvars; ++i) c = c * (order + i) / i;
    return static_cast<int>(c);
  }

 private:
  void emit_degree(Mono& m, int var, int remaining, int target) {
    if (var == nvars_ - 1) {
      m[var] = static_cast<std::uint8_t>(remaining);
      monos_.push_back(m);
      m[var] = 0;
      return;
    }
    // lexicographic within a degree: larger exponent on earlier variables first
    for (int e = remaining; e >= 0; --e) {
      m[var] = static_cast<std::uint8_t>(e);
      emit_degree(m, var + 1, remaining - e, target);
    }
    m[var] = 0;
  }

  static std::uint64_t key(const Mono& m) {
    std::uint64_t k = 0;
    for (int v = 0; v < kMaxVars; ++v) k = (k << 8) | m[v];
    return k;
  }

  int nvars_, order_;
  std::vector<Mono> monos_;
  std::vector<int> degree_;
  std::vector<double> factorial_;
  std::map<std::uint64_t, int> rank_;
};

/// Precomputed tables driving jet multiplication, division and derivatives
/// at fixed (nvars, order). Built once, cached for the process lifetime.
class JetTables {
 public:
  JetTables(int nvars, int order) : set_(nvars, order) {
    const int sz = set_.size();
    // Product triples (ic, ia, ib) with mono(ic) = mono(ia) + mono(ib),
    // grouped by ic in ascending graded order (division needs that order).
    std::vector<std::vector<std::pair<int, int>>> by_target(sz);
    for (int ia = 0; ia < sz; ++ia) {
      for (int ib = 0; ib < sz; ++ib) {
        if (set_.degree(ia) + set_.degree(ib) > order) continue;
        Mono s{};
        for (int v = 0; v < nvars; ++v) s[v] = static_cast<std::uint8_t>(set_.mono(ia)[v] + set_.mono(ib)[v]);
        const int ic = set_.index_of(s);
        by_target[ic].emplace_back(ia, ib);
      }
    }
    prod_offset_.resize(sz + 1, 0);
    for (int ic = 0; ic < sz; ++ic) {
      prod_offset_[ic + 1] = prod_offset_[ic] + static_cast<int>(by_target[ic].size());
      for (auto [ia, ib] : by_target[ic]) {
        prod_a_.push_back(ia);
        prod_b_.push_back(ib);
      }
    }
    // Derivative maps per variable: (src, dst, exponent) with dst = src - e_v.
    deriv_.resize(nvars);
    for (int v = 0; v < nvars; ++v) {
      for (int i = 0; i < sz; ++i) {
        const int e = set_.mono(i)[v];
        if (e == 0) continue;
        Mono d = set_.mono(i);
        d[v] = static_cast<std::uint8_t>(e - 1);
        deriv_[v].push_back({i, set_.index_of(d), e});
      }
    }
  }

  struct DerivEntry {
    int src, dst, exp;
  };

  const MultiIndexSet& set() const { return set_; }
  int prod_begin(int ic) const { return prod_offset_[ic]; }
  int prod_end(int ic) const { return prod_offset_[ic + 1]; }
  int prod_a(int k) const { return prod_a_[k]; }
  int prod_b(int k) const { return prod_b_[k]; }
  const std::vector<DerivEntry>& deriv(int var) const { return deriv_[var]; }

 private:
  MultiIndexSet set_;
  std::vector<int> prod_offset_, prod_a_, prod_b_;
  std::vector<std::vector<DerivEntry>> deriv_;
};

/// Process-wide table cache keyed by (nvars, order).
inline const JetTables& jet_tables(int nvars, int order) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<JetTables>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{nvars, order}];
  if (!slot) slot = std::make_unique<JetTables>(nvars, order);
  return *slot;
}

}  // namespace cym
