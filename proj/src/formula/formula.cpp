#include "pfuse/formula/formula.hpp"

#include <cmath>
#include <set>

#include "pfuse/common/error.hpp"

namespace pfuse::formula {

FusionFormula FusionFormula::toy() {
  FusionFormula f;
  f.multiplicative = {{"ctr", "alpha"}, {"lvtr", "beta"}};
  f.additive = {{"evtr", "gamma"}};
  f.bounds = {{"alpha", {0.0, 4.0}}, {"beta", {0.0, 4.0}}, {"gamma", {0.0, 4.0}}};
  return f;
}

std::vector<std::string> FusionFormula::parameter_names() const {
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (const auto* terms : {&multiplicative, &additive}) {
    for (const auto& t : *terms) {
      if (seen.insert(t.parameter).second) names.push_back(t.parameter);
    }
  }
  return names;
}

void FusionFormula::validate(const data::ObjectiveSet& objectives) const {
  if (multiplicative.empty() && additive.empty()) throw ConfigError("formula has no terms");
  for (const auto* terms : {&multiplicative, &additive}) {
    for (const auto& t : *terms) {
      if (!objectives.contains(t.objective)) {
        throw ConfigError("formula term references unknown objective '" + t.objective + "'");
      }
    }
  }
  for (const auto& name : parameter_names()) {
    const auto it = bounds.find(name);
    if (it == bounds.end()) throw ConfigError("formula parameter '" + name + "' has no bounds");
    if (!(it->second.lo < it->second.hi)) {
      throw ConfigError("formula parameter '" + name + "' has bounds lo >= hi");
    }
  }
}

BoundFormula::BoundFormula(const FusionFormula& formula, const data::ObjectiveSet& objectives,
                           const FormulaParams& params) {
  auto bind = [&](const FormulaTerm& t) {
    const auto it = params.find(t.parameter);
    if (it == params.end()) {
      throw ConfigError("formula parameter '" + t.parameter + "' is not bound");
    }
    if (!objectives.contains(t.objective)) {
      throw ConfigError("formula term references unknown objective '" + t.objective + "'");
    }
    return Bound{objectives.index_of(t.objective), it->second};
  };
  for (const auto& t : formula.multiplicative) multiplicative_.push_back(bind(t));
  for (const auto& t : formula.additive) additive_.push_back(bind(t));
}

double BoundFormula::operator()(std::span<const double> pxtr) const {
  double product = 1.0;
  for (const auto& b : multiplicative_) product *= std::pow(1.0 + pxtr[b.objective], b.value);
  double sum = 0.0;
  for (const auto& b : additive_) sum += b.value * pxtr[b.objective];
  return product + sum;
}

std::vector<double> BoundFormula::score_rows(const nn::Tensor& pxtr) const {
  std::vector<double> out(pxtr.rows());
  for (std::size_t r = 0; r < pxtr.rows(); ++r) out[r] = (*this)(pxtr.row(r));
  return out;
}

double formula_score(const FusionFormula& formula, const data::ObjectiveSet& objectives,
                     std::span<const double> pxtr, const FormulaParams& params) {
  if (pxtr.size() != objectives.size()) {
    throw ContractViolation("formula_score: " + std::to_string(pxtr.size()) +
                            " predictions for " + std::to_string(objectives.size()) +
                            " objectives");
  }
  return BoundFormula(formula, objectives, params)(pxtr);
}

EvalMetricSpec EvalMetricSpec::defaults(const data::ObjectiveSet& objectives) {
  std::map<std::string, double> weights;
  if (objectives.contains("ctr")) weights["ctr"] = 2.0;
  if (objectives.contains("lvtr")) weights["lvtr"] = 5.0;
  return from_map(objectives, weights);
}

EvalMetricSpec EvalMetricSpec::from_map(const data::ObjectiveSet& objectives,
                                        const std::map<std::string, double>& overrides) {
  EvalMetricSpec spec;
  spec.weights.assign(objectives.size(), 1.0);
  for (const auto& [name, w] : overrides) {
    if (!objectives.contains(name)) {
      throw ConfigError("eval metric weight for unknown objective '" + name + "'");
    }
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw ConfigError("eval metric weight for '" + name + "' must be positive");
    }
    spec.weights[objectives.index_of(name)] = w;
  }
  return spec;
}

double eval_metric(std::span<const double> scores, const std::vector<data::ImpressionLog>& window,
                   const metrics::UserGroups& groups, const data::ObjectiveSet& objectives,
                   const EvalMetricSpec& spec) {
  if (spec.weights.size() != objectives.size()) {
    throw ContractViolation("eval metric spec covers " + std::to_string(spec.weights.size()) +
                            " objectives, expected " + std::to_string(objectives.size()));
  }
  const auto report = metrics::gauc_report(scores, window, groups, objectives, "");
  double total = 0.0;
  for (std::size_t o = 0; o < objectives.size(); ++o) total += spec.weights[o] * report.gauc[o];
  return total;
}

}  // namespace pfuse::formula
