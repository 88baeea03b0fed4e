#pragma once

#include <stdexcept>
#include <string>

namespace cym {

/// Base class for all engine errors.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A jet ran out of Taylor order (a derivative was requested beyond the
/// tracked truncation order). Raise the working order instead of trusting
/// truncated garbage.
struct order_error : error {
  using error::error;
};

/// Evaluation outside a field's chart domain (e.g. upper-half-space metric
/// at x_n <= 0), or an argument outside an operation's precondition.
struct domain_error : error {
  using error::error;
};

/// Malformed input: bad catalog name, bad scenario file, arity mismatch.
struct invalid_argument : error {
  using error::error;
};

}  // namespace cym
