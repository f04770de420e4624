#include "sgais/observations.hpp"

#include <algorithm>

#include "sgais/errors.hpp"

namespace sgais {

ObsView Dataset::prefix(std::size_t n) const {
  n = std::min(n, size());
  return ObsView(std::span<const double>(values_).first(n * header_.arity), header_.arity);
}

void Dataset::append(Observation obs) {
  if (obs.size() != header_.arity) throw UsageError("Dataset::append: arity mismatch");
  values_.insert(values_.end(), obs.begin(), obs.end());
}

}  // namespace sgais
