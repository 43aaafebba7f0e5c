#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>

namespace gbpobs {

/// Limits below/above which a finite variance collapses to an exact tag.
struct VarianceLimits {
  double zero = 1e-12;
  double infinite = 1e12;
};

/// A GBP variance in {ZERO, FINITE(v), INFINITE}.
///
/// Stored as one double: 0 is ZERO, +inf is INFINITE, anything in between is
/// FINITE. IEEE arithmetic then gives the absorption rules for free
/// (inf + x = inf, 1/0 = inf, 1/inf = 0) and no NaN can arise because only
/// sums and reciprocals of non-negative values are ever formed.
class ExtendedVariance {
 public:
  enum class Tag : unsigned char { Zero, Finite, Infinite };

  constexpr ExtendedVariance() = default;

  static constexpr ExtendedVariance zero() { return ExtendedVariance(0.0); }
  static constexpr ExtendedVariance infinite() { return ExtendedVariance(std::numeric_limits<double>::infinity()); }
  /// Exact FINITE value; v must be positive and finite.
  static ExtendedVariance finite(double v);
  /// Unchecked: v must already be 0, +inf or a positive finite value.
  static constexpr ExtendedVariance from_raw(double v) { return ExtendedVariance(v); }
  /// Any non-negative value, snapped to ZERO/INFINITE outside the limits.
  static ExtendedVariance normalized(double v, const VarianceLimits& limits) {
    if (v <= limits.zero) return zero();
    if (v >= limits.infinite) return infinite();
    return ExtendedVariance(v);
  }

  constexpr Tag tag() const {
    if (v_ == 0.0) return Tag::Zero;
    if (v_ == std::numeric_limits<double>::infinity()) return Tag::Infinite;
    return Tag::Finite;
  }
  constexpr bool is_zero() const { return v_ == 0.0; }
  constexpr bool is_infinite() const { return v_ == std::numeric_limits<double>::infinity(); }
  constexpr bool is_finite() const { return !is_zero() && !is_infinite(); }
  /// 0 for ZERO, +inf for INFINITE.
  constexpr double value() const { return v_; }

  friend constexpr bool operator==(ExtendedVariance, ExtendedVariance) = default;

 private:
  constexpr explicit ExtendedVariance(double v) : v_(v) {}
  double v_ = 1.0;
};

const char* to_string(ExtendedVariance::Tag tag);

/// Series combination: own + sum(incoming). INFINITE absorbs, ZERO adds
/// nothing, an empty sum with no own term is ZERO.
ExtendedVariance serial_variance(std::span<const ExtendedVariance> incoming,
                                 std::optional<ExtendedVariance> own = std::nullopt,
                                 const VarianceLimits& limits = {});

/// Parallel (harmonic) combination: 1 / sum(1 / v). ZERO absorbs, INFINITE
/// terms drop out, all INFINITE gives INFINITE. `incoming` must be non-empty.
ExtendedVariance parallel_variance(std::span<const ExtendedVariance> incoming, const VarianceLimits& limits = {});

}  // namespace gbpobs
