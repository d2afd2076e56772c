#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "pfuse/data/objectives.hpp"
#include "pfuse/metrics/auc.hpp"
#include "pfuse/nn/tensor.hpp"

namespace pfuse::formula {

struct FormulaTerm {
  std::string objective;
  std::string parameter;
};

struct Bounds {
  double lo = 0.0;
  double hi = 4.0;
};

using FormulaParams = std::map<std::string, double>;

/// Score = Π (1 + ŷ_o)^p  +  Σ c · ŷ_o over the configured term lists.
struct FusionFormula {
  std::vector<FormulaTerm> multiplicative;
  std::vector<FormulaTerm> additive;
  std::map<std::string, Bounds> bounds;

  /// (1 + ŷ_ctr)^alpha · (1 + ŷ_lvtr)^beta + gamma · ŷ_evtr, all in [0, 4].
  static FusionFormula toy();

  /// Parameter names in term order, each listed once.
  std::vector<std::string> parameter_names() const;
  /// Throws ConfigError on unknown objectives, unbounded parameters or lo >= hi.
  void validate(const data::ObjectiveSet& objectives) const;
};

/// Formula bound to objective indices and parameter values, for fast
/// row-by-row evaluation over a prediction matrix.
class BoundFormula {
 public:
  /// Throws ConfigError naming any parameter missing from `params`.
  BoundFormula(const FusionFormula& formula, const data::ObjectiveSet& objectives,
               const FormulaParams& params);

  /// `pxtr` holds one prediction per objective, in ObjectiveSet order.
  double operator()(std::span<const double> pxtr) const;
  std::vector<double> score_rows(const nn::Tensor& pxtr) const;

 private:
  struct Bound {
    std::size_t objective;
    double value;
  };
  std::vector<Bound> multiplicative_;
  std::vector<Bound> additive_;
};

double formula_score(const FusionFormula& formula, const data::ObjectiveSet& objectives,
                     std::span<const double> pxtr, const FormulaParams& params);

/// Positive per-objective weights of the summed-GAUC selection metric.
struct EvalMetricSpec {
  std::vector<double> weights;

  /// ctr → 2, lvtr → 5, every other objective → 1.
  static EvalMetricSpec defaults(const data::ObjectiveSet& objectives);
  static EvalMetricSpec from_map(const data::ObjectiveSet& objectives,
                                 const std::map<std::string, double>& overrides);
};

/// Σ_o spec_o · GAUC(scores, labels_o): one fused score judged against every
/// objective's labels.
double eval_metric(std::span<const double> scores, const std::vector<data::ImpressionLog>& window,
                   const metrics::UserGroups& groups, const data::ObjectiveSet& objectives,
                   const EvalMetricSpec& spec);

}  // namespace pfuse::formula
