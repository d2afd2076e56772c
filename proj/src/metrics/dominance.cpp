#include "pfuse/metrics/dominance.hpp"

#include "pfuse/common/error.hpp"

namespace pfuse::metrics {

bool pareto_dominates(std::span<const double> a, std::span<const double> b, Sense sense) {
  if (a.size() != b.size()) {
    throw ContractViolation("dominance between vectors of length " + std::to_string(a.size()) +
                            " and " + std::to_string(b.size()));
  }
  bool strictly_better = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double better = sense == Sense::maximize ? a[i] - b[i] : b[i] - a[i];
    if (better < 0.0) return false;
    if (better > 0.0) strictly_better = true;
  }
  return strictly_better;
}

bool dominates(const GaucReport& a, const GaucReport& b) {
  if (a.objectives != b.objectives) {
    throw ContractViolation("dominance between reports over different objective sets");
  }
  return pareto_dominates(a.gauc, b.gauc, Sense::maximize);
}

}  // namespace pfuse::metrics
