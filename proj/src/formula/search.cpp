#include "pfuse/formula/search.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "pfuse/common/error.hpp"
#include "pfuse/common/parallel.hpp"
#include "pfuse/common/rng.hpp"

namespace pfuse::formula {

namespace {

const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;

class Evaluator {
 public:
  Evaluator(const FusionFormula& formula, const data::ObjectiveSet& objectives,
            const nn::Tensor& pxtr, const std::vector<data::ImpressionLog>& window,
            const metrics::UserGroups& groups, const EvalMetricSpec& spec)
      : formula_(formula),
        objectives_(objectives),
        pxtr_(pxtr),
        window_(window),
        groups_(groups),
        spec_(spec) {}

  double operator()(const FormulaParams& params) const {
    const auto scores = BoundFormula(formula_, objectives_, params).score_rows(pxtr_);
    return eval_metric(scores, window_, groups_, objectives_, spec_);
  }

 private:
  const FusionFormula& formula_;
  const data::ObjectiveSet& objectives_;
  const nn::Tensor& pxtr_;
  const std::vector<data::ImpressionLog>& window_;
  const metrics::UserGroups& groups_;
  const EvalMetricSpec& spec_;
};

}  // namespace

TuneResult tune_params(const FusionFormula& formula, const data::ObjectiveSet& objectives,
                       const nn::Tensor& pxtr, const std::vector<data::ImpressionLog>& window,
                       const metrics::UserGroups& groups, const EvalMetricSpec& spec,
                       const SearchConfig& config) {
  if (window.empty()) throw ContractViolation("tune_params: empty evaluation window");
  if (pxtr.rows() != window.size()) {
    throw ContractViolation("tune_params: " + std::to_string(pxtr.rows()) +
                            " prediction rows for a " + std::to_string(window.size()) +
                            "-row window");
  }
  if (config.budget < 1) throw ConfigError("tune_params: budget must be >= 1");
  formula.validate(objectives);
  const auto names = formula.parameter_names();
  const Evaluator evaluate(formula, objectives, pxtr, window, groups, spec);

  TuneResult result;
  Rng rng(derive_seed(config.seed, "formula-search"));
  std::vector<FormulaParams> samples(config.budget);
  for (auto& p : samples) {
    for (const auto& name : names) {
      const auto& b = formula.bounds.at(name);
      p[name] = rng.uniform(b.lo, b.hi);
    }
  }
  std::vector<double> metrics(samples.size());
  parallel_chunks(samples.size(), 8, config.threads,
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    for (std::size_t i = begin; i < end; ++i) metrics[i] = evaluate(samples[i]);
                  });
  std::size_t best = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    result.trace.push_back({i, "random", samples[i], metrics[i]});
    if (metrics[i] > metrics[best]) best = i;
  }
  result.best = samples[best];
  result.best_metric = metrics[best];

  auto probe = [&](const FormulaParams& p) {
    const double m = evaluate(p);
    result.trace.push_back({result.trace.size(), "golden", p, m});
    if (m > result.best_metric) {
      result.best_metric = m;
      result.best = p;
    }
    return m;
  };

  if (config.budget > 1) {
    for (std::size_t sweep = 0; sweep < config.sweeps; ++sweep) {
      for (const auto& name : names) {
        const auto& b = formula.bounds.at(name);
        FormulaParams p = result.best;
        auto at = [&](double x) {
          p[name] = x;
          return probe(p);
        };
        at(b.lo);
        at(b.hi);
        double lo = b.lo;
        double hi = b.hi;
        double c = hi - kInvPhi * (hi - lo);
        double d = lo + kInvPhi * (hi - lo);
        double fc = at(c);
        double fd = at(d);
        for (std::size_t it = 0; it < config.golden_iterations; ++it) {
          if (fc >= fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - kInvPhi * (hi - lo);
            fc = at(c);
          } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + kInvPhi * (hi - lo);
            fd = at(d);
          }
        }
      }
    }
  }
  return result;
}

void write_trace(const std::filesystem::path& path, const std::vector<TraceEntry>& trace) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (const auto& e : trace) {
    nlohmann::ordered_json j;
    j["index"] = e.index;
    j["phase"] = e.phase;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [k, v] : e.params) params[k] = v;
    j["params"] = params;
    j["metric"] = e.metric;
    out << j.dump() << '\n';
  }
}

}  // namespace pfuse::formula
