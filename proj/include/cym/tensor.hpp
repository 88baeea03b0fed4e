#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <utility>
#include <vector>

#include "cym/jet.hpp"

namespace cym {

/// Dense row-major array of scalars with runtime rank. The scalar type is
/// either Jet (chart-point evaluation) or the Laurent collar scalar
/// (holography); plain double arrays appear in reports and oracles.
template <class S>
class NDArray {
 public:
  NDArray() = default;
  NDArray(std::vector<int> dims, const S& zero) : dims_(std::move(dims)) {
    std::size_t n = 1;
    for (int d : dims_) n *= static_cast<std::size_t>(d);
    v_.assign(n, zero);
  }

  const std::vector<int>& dims() const { return dims_; }
  int rank() const { return static_cast<int>(dims_.size()); }
  std::size_t size() const { return v_.size(); }
  S* data() { return v_.data(); }
  const S* data() const { return v_.data(); }
  S& flat(std::size_t i) { return v_[i]; }
  const S& flat(std::size_t i) const { return v_[i]; }

  std::size_t offset(std::span<const int> idx) const {
    std::size_t o = 0;
    for (int k = 0; k < rank(); ++k) o = o * dims_[k] + idx[k];
    return o;
  }
  S& at(std::span<const int> idx) { return v_[offset(idx)]; }
  const S& at(std::span<const int> idx) const { return v_[offset(idx)]; }

  template <class... I>
  S& operator()(I... i) {
    const std::array<int, sizeof...(I)> idx{static_cast<int>(i)...};
    return at(idx);
  }
  template <class... I>
  const S& operator()(I... i) const {
    const std::array<int, sizeof...(I)> idx{static_cast<int>(i)...};
    return at(idx);
  }

 private:
  std::vector<int> dims_;
  std::vector<S> v_;
};

/// Run fn over every multi-index of `dims` (odometer order).
inline void for_each_index(std::span<const int> dims, const std::function<void(std::span<const int>)>& fn) {
  std::vector<int> idx(dims.size(), 0);
  if (dims.empty()) {
    fn(idx);
    return;
  }
  for (;;) {
    fn(idx);
    int k = static_cast<int>(dims.size()) - 1;
    while (k >= 0 && ++idx[k] == dims[k]) idx[k--] = 0;
    if (k < 0) break;
  }
}

/// Index-slot roles determine how a covariant derivative couples:
/// coordinate tensor slots get Christoffel terms, tractor slots the
/// (n+2)-rank tractor connection matrices, bundle slots the external
/// gauge connection. Up/down fixes the sign of the matrix action.
enum class SlotKind { Cov, Con, TracDown, TracUp, GaugeUp, GaugeDown };

struct Slot {
  SlotKind kind;
  int size;
  friend bool operator==(const Slot&, const Slot&) = default;
};

inline bool is_tensor_slot(SlotKind k) { return k == SlotKind::Cov || k == SlotKind::Con; }
inline bool is_tractor_slot(SlotKind k) { return k == SlotKind::TracDown || k == SlotKind::TracUp; }
inline bool is_gauge_slot(SlotKind k) { return k == SlotKind::GaugeUp || k == SlotKind::GaugeDown; }
inline bool is_up(SlotKind k) {
  return k == SlotKind::Con || k == SlotKind::TracUp || k == SlotKind::GaugeUp;
}
inline SlotKind flipped(SlotKind k) {
  switch (k) {
    case SlotKind::Cov: return SlotKind::Con;
    case SlotKind::Con: return SlotKind::Cov;
    case SlotKind::TracDown: return SlotKind::TracUp;
    case SlotKind::TracUp: return SlotKind::TracDown;
    case SlotKind::GaugeUp: return SlotKind::GaugeDown;
    case SlotKind::GaugeDown: return SlotKind::GaugeUp;
  }
  return k;
}

/// A tensor value at a point: component array plus slot roles and the
/// conformal weight tag. The weight is metadata; it participates only in
/// rescaling checks, never in pointwise algebra.
template <class S>
struct Tensor {
  NDArray<S> a;
  std::vector<Slot> slots;
  double weight = 0.0;

  Tensor() = default;
  Tensor(NDArray<S> arr, std::vector<Slot> sl, double w = 0.0)
      : a(std::move(arr)), slots(std::move(sl)), weight(w) {}
};

template <class S>
std::vector<int> slot_dims(std::span<const Slot> slots) {
  std::vector<int> d;
  d.reserve(slots.size());
  for (const auto& s : slots) d.push_back(s.size);
  return d;
}

/// ---- scalar helpers shared by Jet and the collar scalar ----

inline Jet zero_like(const Jet& proto) { return Jet(proto.nvars(), proto.order()); }
inline Jet one_like(const Jet& proto) { return Jet::constant(proto.nvars(), proto.order(), 1.0); }
inline double value_of(const Jet& j) { return j.value(); }

/// ---- index algebra ----

template <class S>
Tensor<S> tensor_product(const Tensor<S>& x, const Tensor<S>& y) {
  std::vector<Slot> slots = x.slots;
  slots.insert(slots.end(), y.slots.begin(), y.slots.end());
  std::vector<int> dims = slot_dims<S>(slots);
  const S zero = zero_like(x.a.size() ? x.a.flat(0) : y.a.flat(0));
  Tensor<S> r(NDArray<S>(dims, zero), slots, x.weight + y.weight);
  const int rx = x.a.rank();
  for_each_index(dims, [&](std::span<const int> idx) {
    r.a.at(idx) = x.a.at(idx.subspan(0, rx)) * y.a.at(idx.subspan(rx));
  });
  return r;
}

/// Natural pairing contraction of slots i and j (one up, one down, same
/// family and size). Metric contractions go through raise/lower first.
template <class S>
Tensor<S> contract(const Tensor<S>& t, int i, int j) {
  if (i > j) std::swap(i, j);
  const Slot si = t.slots[i], sj = t.slots[j];
  const bool ok = si.size == sj.size && si.kind == flipped(sj.kind);
  if (!ok) throw invalid_argument("contract: slot arity/kind mismatch");
  std::vector<Slot> slots;
  for (int k = 0; k < static_cast<int>(t.slots.size()); ++k)
    if (k != i && k != j) slots.push_back(t.slots[k]);
  std::vector<int> dims = slot_dims<S>(slots);
  const S zero = zero_like(t.a.flat(0));
  Tensor<S> r(NDArray<S>(dims, zero), slots, t.weight);
  std::vector<int> src(t.slots.size());
  for_each_index(dims, [&](std::span<const int> idx) {
    int w = 0;
    for (int k = 0; k < static_cast<int>(t.slots.size()); ++k)
      if (k != i && k != j) src[k] = idx[w++];
    S acc = zero;
    for (int d = 0; d < si.size; ++d) {
      src[i] = d;
      src[j] = d;
      acc += t.a.at(src);
    }
    r.a.at(idx) = std::move(acc);
  });
  return r;
}

/// Raise or lower slot i with the given (inverse) metric block for its
/// family: g/ginv for coordinate slots, h/hinv for tractor slots.
template <class S>
Tensor<S> flip_slot(const Tensor<S>& t, int i, const NDArray<S>& metric_block) {
  const Slot si = t.slots[i];
  std::vector<Slot> slots = t.slots;
  slots[i].kind = flipped(si.kind);
  const S zero = zero_like(t.a.flat(0));
  Tensor<S> r(NDArray<S>(t.a.dims(), zero), slots, t.weight);
  std::vector<int> src(t.slots.size());
  for_each_index(t.a.dims(), [&](std::span<const int> idx) {
    std::copy(idx.begin(), idx.end(), src.begin());
    S acc = zero;
    for (int d = 0; d < si.size; ++d) {
      src[i] = d;
      acc.fma(metric_block(idx[i], d), t.a.at(src));
    }
    r.a.at(idx) = std::move(acc);
  });
  return r;
}

namespace detail {
template <class Fn>
void over_permutations(std::vector<int> perm, const Fn& fn) {
  std::sort(perm.begin(), perm.end());
  // iterate all permutations with parity tracked by inversion count
  do {
    int inv = 0;
    for (std::size_t a = 0; a < perm.size(); ++a)
      for (std::size_t b = a + 1; b < perm.size(); ++b)
        if (perm[a] > perm[b]) ++inv;
    fn(perm, (inv % 2 == 0) ? 1.0 : -1.0);
  } while (std::next_permutation(perm.begin(), perm.end()));
}
}  // namespace detail

/// (Anti)symmetrize over the given slot positions, with the conventional
/// 1/k! normalization.
template <class S>
Tensor<S> symmetrize(const Tensor<S>& t, std::vector<int> positions, bool anti) {
  for (std::size_t a = 1; a < positions.size(); ++a)
    if (t.slots[positions[a]].size != t.slots[positions[0]].size ||
        t.slots[positions[a]].kind != t.slots[positions[0]].kind)
      throw invalid_argument("symmetrize: slot kind/size mismatch");
  const S zero = zero_like(t.a.flat(0));
  Tensor<S> r(NDArray<S>(t.a.dims(), zero), t.slots, t.weight);
  double count = 1.0;
  for (std::size_t a = 2; a <= positions.size(); ++a) count *= static_cast<double>(a);
  std::vector<int> src(t.slots.size());
  detail::over_permutations(positions, [&](const std::vector<int>& perm, double sign) {
    const double c = (anti ? sign : 1.0) / count;
    for_each_index(t.a.dims(), [&](std::span<const int> idx) {
      std::copy(idx.begin(), idx.end(), src.begin());
      for (std::size_t a = 0; a < positions.size(); ++a) src[positions[a]] = idx[perm[a]];
      S term = t.a.at(src) * c;
      r.a.at(idx) += term;
    });
  });
  return r;
}

template <class S>
Tensor<S> sym(const Tensor<S>& t, std::vector<int> positions) {
  return symmetrize(t, std::move(positions), false);
}
template <class S>
Tensor<S> antisym(const Tensor<S>& t, std::vector<int> positions) {
  return symmetrize(t, std::move(positions), true);
}

template <class S>
Tensor<S> operator+(const Tensor<S>& x, const Tensor<S>& y) {
  if (x.slots != y.slots) throw invalid_argument("tensor sum: slot mismatch");
  Tensor<S> r = x;
  for (std::size_t i = 0; i < r.a.size(); ++i) r.a.flat(i) += y.a.flat(i);
  return r;
}
template <class S>
Tensor<S> operator-(const Tensor<S>& x, const Tensor<S>& y) {
  if (x.slots != y.slots) throw invalid_argument("tensor difference: slot mismatch");
  Tensor<S> r = x;
  for (std::size_t i = 0; i < r.a.size(); ++i) r.a.flat(i) = r.a.flat(i) - y.a.flat(i);
  return r;
}
template <class S>
Tensor<S> operator*(const Tensor<S>& x, double c) {
  Tensor<S> r = x;
  for (std::size_t i = 0; i < r.a.size(); ++i) r.a.flat(i) = r.a.flat(i) * c;
  return r;
}
template <class S>
Tensor<S> operator*(double c, const Tensor<S>& x) {
  return x * c;
}

/// ---- covariant differentiation ----

/// Connection data a covariant derivative may couple to. All matrices act
/// on "up" components; down slots get the transposed negative action.
template <class S>
struct DerivContext {
  const NDArray<S>* gamma = nullptr;    // {n,n,n}: Gamma^a_{bc}
  const NDArray<S>* tractor = nullptr;  // {n,N,N}: tractor connection, up action
  const NDArray<S>* gauge = nullptr;    // {n,r,r}: bundle connection, up action
};

/// nabla_x T with the new covariant slot prepended (nabla_a T_{bc...}).
/// Couples per slot: Christoffel on coordinate slots, tractor matrices on
/// tractor slots, gauge matrices on bundle slots. Output scalars are one
/// order lower; exhaustion surfaces as order_error from the scalar type.
template <class S>
Tensor<S> covariant_derivative(const Tensor<S>& t, const DerivContext<S>& ctx) {
  const int n = ctx.gamma ? ctx.gamma->dims()[0] : 0;
  if (!ctx.gamma) throw invalid_argument("covariant_derivative: missing Christoffel data");
  for (const auto& s : t.slots) {
    if (is_tensor_slot(s.kind) && s.size != n)
      throw invalid_argument("covariant_derivative: tensor slot arity mismatch");
    if (is_tractor_slot(s.kind) && !ctx.tractor)
      throw invalid_argument("covariant_derivative: tractor slot without tractor connection");
    if (is_gauge_slot(s.kind) && !ctx.gauge)
      throw invalid_argument("covariant_derivative: bundle slot without gauge connection");
  }
  std::vector<Slot> slots;
  slots.push_back({SlotKind::Cov, n});
  slots.insert(slots.end(), t.slots.begin(), t.slots.end());
  std::vector<int> dims = slot_dims<S>(slots);
  const S zero = zero_like(t.a.flat(0));
  Tensor<S> r(NDArray<S>(dims, zero), slots, t.weight);

  const int rank = static_cast<int>(t.slots.size());
  std::vector<int> src(rank);
  for_each_index(dims, [&](std::span<const int> idx) {
    const int x = idx[0];
    for (int k = 0; k < rank; ++k) src[k] = idx[k + 1];
    S acc = t.a.at(src).derivative(x);
    for (int k = 0; k < rank; ++k) {
      const Slot s = t.slots[k];
      const int keep = src[k];
      switch (s.kind) {
        case SlotKind::Con:
          for (int d = 0; d < n; ++d) {
            src[k] = d;
            acc.fma((*ctx.gamma)(keep, x, d), t.a.at(src));
          }
          break;
        case SlotKind::Cov:
          for (int d = 0; d < n; ++d) {
            src[k] = d;
            acc.fms((*ctx.gamma)(d, x, keep), t.a.at(src));
          }
          break;
        case SlotKind::TracUp:
        case SlotKind::GaugeUp: {
          const NDArray<S>& m = is_tractor_slot(s.kind) ? *ctx.tractor : *ctx.gauge;
          for (int d = 0; d < s.size; ++d) {
            src[k] = d;
            acc.fma(m(x, keep, d), t.a.at(src));
          }
          break;
        }
        case SlotKind::TracDown:
        case SlotKind::GaugeDown: {
          const NDArray<S>& m = is_tractor_slot(s.kind) ? *ctx.tractor : *ctx.gauge;
          for (int d = 0; d < s.size; ++d) {
            src[k] = d;
            acc.fms(m(x, d, keep), t.a.at(src));
          }
          break;
        }
      }
      src[k] = keep;
    }
    r.a.at(idx) = std::move(acc);
  });
  return r;
}

/// ---- value extraction and residual norms ----

template <class S>
NDArray<double> values(const NDArray<S>& a) {
  NDArray<double> r(a.dims(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) r.flat(i) = value_of(a.flat(i));
  return r;
}

inline double max_abs(const NDArray<double>& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.flat(i)));
  return m;
}

template <class S>
double max_abs_value(const NDArray<S>& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(value_of(a.flat(i))));
  return m;
}

/// Scale-free residual: |x - y|_inf / (1 + max operand magnitude).
inline double normalized_residual(const NDArray<double>& x, const NDArray<double>& y) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    diff = std::max(diff, std::abs(x.flat(i) - y.flat(i)));
    scale = std::max({scale, std::abs(x.flat(i)), std::abs(y.flat(i))});
  }
  return diff / (1.0 + scale);
}

/// Residual of "x = 0" normalized by 1 (the operands' scale is the
/// caller's business when it differs from O(1)).
inline double max_abs_residual(const NDArray<double>& x) { return max_abs(x); }

/// ---- Jet-matrix linear algebra ----

/// Inverse of a square matrix of jets by Gauss-Jordan elimination with
/// value-based partial pivoting. Throws on a singular value matrix.
inline NDArray<Jet> invert_matrix(const NDArray<Jet>& m) {
  const int n = m.dims()[0];
  NDArray<Jet> a = m;
  const Jet zero = zero_like(m(0, 0));
  NDArray<Jet> inv({n, n}, zero);
  for (int i = 0; i < n; ++i) inv(i, i) = one_like(zero);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r2 = col + 1; r2 < n; ++r2)
      if (std::abs(a(r2, col).value()) > std::abs(a(piv, col).value())) piv = r2;
    if (a(piv, col).value() == 0.0) throw domain_error("invert_matrix: singular metric value");
    if (piv != col)
      for (int c = 0; c < n; ++c) {
        std::swap(a(piv, c), a(col, c));
        std::swap(inv(piv, c), inv(col, c));
      }
    const Jet d = a(col, col);
    for (int c = 0; c < n; ++c) {
      a(col, c) = a(col, c) / d;
      inv(col, c) = inv(col, c) / d;
    }
    for (int r2 = 0; r2 < n; ++r2) {
      if (r2 == col) continue;
      const Jet f = a(r2, col);
      if (f.max_abs_coeff() == 0.0) continue;
      for (int c = 0; c < n; ++c) {
        a(r2, c) = a(r2, c) - f * a(col, c);
        inv(r2, c) = inv(r2, c) - f * inv(col, c);
      }
    }
  }
  return inv;
}

}  // namespace cym
