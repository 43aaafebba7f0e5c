#include "gbpobs/variance.hpp"

#include <stdexcept>
#include <string>

namespace gbpobs {

ExtendedVariance ExtendedVariance::finite(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("finite variance must be positive: " + std::to_string(v));
  return ExtendedVariance(v);
}

const char* to_string(ExtendedVariance::Tag tag) {
  switch (tag) {
    case ExtendedVariance::Tag::Zero: return "ZERO";
    case ExtendedVariance::Tag::Finite: return "FINITE";
    case ExtendedVariance::Tag::Infinite: return "INFINITE";
  }
  return "?";
}

ExtendedVariance serial_variance(std::span<const ExtendedVariance> incoming, std::optional<ExtendedVariance> own,
                                 const VarianceLimits& limits) {
  double sum = own ? own->value() : 0.0;
  for (auto v : incoming) sum += v.value();
  return ExtendedVariance::normalized(sum, limits);
}

ExtendedVariance parallel_variance(std::span<const ExtendedVariance> incoming, const VarianceLimits& limits) {
  if (incoming.empty()) throw std::invalid_argument("parallel_variance needs at least one term");
  double precision = 0.0;
  for (auto v : incoming) precision += 1.0 / v.value();
  return ExtendedVariance::normalized(1.0 / precision, limits);
}

}  // namespace gbpobs
