#include "pfuse/experiment/pipeline.hpp"

#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>

#include "pfuse/common/error.hpp"
#include "pfuse/common/parallel.hpp"
#include "pfuse/data/impressions_io.hpp"
#include "pfuse/data/stream.hpp"
#include "pfuse/experiment/report.hpp"
#include "pfuse/experiment/svg.hpp"
#include "pfuse/formula/search.hpp"
#include "pfuse/ippo/joint_environment.hpp"
#include "pfuse/ippo/runner.hpp"
#include "pfuse/metrics/calibration.hpp"
#include "pfuse/metrics/kendall.hpp"
#include "pfuse/pantheon/joint.hpp"
#include "pfuse/rank/snapshot.hpp"

namespace pfuse::experiment {

using nlohmann::ordered_json;

namespace {

constexpr std::size_t kCurveInterval = 50;

void log(const char* stage, const std::string& message) {
  std::cerr << "[" << stage << "] " << message << '\n';
}

ordered_json by_objective(const data::ObjectiveSet& objectives, const std::vector<double>& v) {
  ordered_json j = ordered_json::object();
  for (std::size_t o = 0; o < objectives.size(); ++o) j[objectives.name(o)] = v.at(o);
  return j;
}

std::vector<double> column(const nn::Tensor& t, std::size_t c) {
  std::vector<double> out(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r) out[r] = t(r, c);
  return out;
}

std::vector<double> ranking_gauc(const nn::Tensor& pxtr, const std::vector<data::ImpressionLog>& w,
                                 const metrics::UserGroups& groups, std::size_t n_objectives) {
  std::vector<double> out;
  for (std::size_t o = 0; o < n_objectives; ++o) {
    out.push_back(metrics::gauc(column(pxtr, o), w, groups, o).gauc);
  }
  return out;
}

struct Splits {
  std::vector<data::ImpressionLog> train;
  std::vector<data::ImpressionLog> eval;
};

std::vector<data::ImpressionLog> load_eval(const ExperimentConfig& c, const ArtifactPaths& p) {
  return data::read_jsonl(p.eval_logs(), c.objectives);
}

Splits load_splits(const ExperimentConfig& c, const ArtifactPaths& p) {
  return {data::read_jsonl(p.train_logs(), c.objectives), load_eval(c, p)};
}

rank::RankingModel load_ranking(const std::filesystem::path& path) {
  return rank::ranking_from_snapshot(rank::read_snapshot(path));
}

std::size_t snapshot_steps(const rank::Snapshot& s) {
  return s.header.contains("stream_batches") ? s.header.at("stream_batches").get<std::size_t>()
                                             : 0;
}

formula::FormulaParams load_formula_params(const ArtifactPaths& p) {
  const auto j = read_json(p.formula_params());
  formula::FormulaParams params;
  try {
    for (const auto& [k, v] : j.at("params").items()) params[k] = v.get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(p.formula_params().string() + ": " + e.what());
  }
  return params;
}

double coefficient_of_variation(const std::vector<data::ImpressionLog>& logs) {
  std::map<std::int64_t, double> counts;
  for (const auto& l : logs) counts[l.user_id] += 1.0;
  if (counts.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [u, c] : counts) sum += c;
  const double mean = sum / static_cast<double>(counts.size());
  double var = 0.0;
  for (const auto& [u, c] : counts) var += (c - mean) * (c - mean);
  var /= static_cast<double>(counts.size());
  return std::sqrt(var) / mean;
}

}  // namespace

ArtifactPaths::ArtifactPaths(std::filesystem::path r) : root(std::move(r)) {}

void cmd_generate(const ExperimentConfig& c) {
  const ArtifactPaths p(c.output_dir);
  log("generate", "building universe");
  const auto universe = data::generate_universe(derive_seed(c.seed, "universe"), c.datagen,
                                                c.objectives);
  const auto train = data::stream_impressions(universe, derive_seed(c.seed, "train-stream"),
                                              c.datagen.n_train, 0);
  const auto eval = data::stream_impressions(universe, derive_seed(c.seed, "eval-stream"),
                                             c.datagen.n_eval,
                                             static_cast<std::int64_t>(c.datagen.n_train));
  std::filesystem::create_directories(p.train_logs().parent_path());
  data::write_jsonl(p.train_logs(), train, c.objectives);
  data::write_jsonl(p.eval_logs(), eval, c.objectives);

  ordered_json j;
  j["users"] = universe.users.size();
  j["items"] = universe.items.size();
  j["dense_dim"] = universe.dense_dim();
  ordered_json models = ordered_json::object();
  for (std::size_t o = 0; o < c.objectives.size(); ++o) {
    const auto& m = universe.models[o];
    models[c.objectives.name(o)] = {{"bias", m.bias},
                                    {"popularity_weight", m.popularity_weight},
                                    {"target_rate", m.target_rate}};
  }
  j["objective_models"] = models;
  j["train_rows"] = train.size();
  j["eval_rows"] = eval.size();
  j["train_positive_rates"] =
      by_objective(c.objectives, data::positive_rates(train, c.objectives.size()));
  j["eval_positive_rates"] =
      by_objective(c.objectives, data::positive_rates(eval, c.objectives.size()));
  j["train_exposure_cv"] = coefficient_of_variation(train);
  write_json(p.universe(), j);
  log("generate", std::to_string(train.size()) + " train / " + std::to_string(eval.size()) +
                      " eval impressions");
}

void cmd_train_ranking(const ExperimentConfig& c) {
  const ArtifactPaths p(c.output_dir);
  const auto splits = load_splits(c, p);
  rank::RankingModel model(c.resolved_ranking(), c.seed);
  data::StreamCursor cursor(splits.train, c.training.max_passes);

  const std::size_t n_obj = c.objectives.size();
  std::ostringstream curve;
  curve << "step";
  for (const auto& name : c.objectives.names()) curve << ',' << name;
  curve << ",total\n";
  std::vector<double> window_sum(n_obj, 0.0);
  std::size_t in_window = 0;
  std::size_t steps = 0;
  bool truncated = false;
  log("train-ranking", "pretraining for " + std::to_string(c.training.pretrain_steps) + " steps");
  for (; steps < c.training.pretrain_steps; ++steps) {
    const auto batch = cursor.next_batch(c.training.batch_size);
    if (batch.empty()) {
      truncated = true;
      break;
    }
    const auto losses = model.train_step(batch);
    for (std::size_t o = 0; o < n_obj; ++o) window_sum[o] += losses[o];
    if (++in_window == kCurveInterval) {
      double total = 0.0;
      curve << steps + 1;
      for (std::size_t o = 0; o < n_obj; ++o) {
        const double mean = window_sum[o] / static_cast<double>(in_window);
        total += mean;
        curve << ',' << format_double(mean);
      }
      curve << ',' << format_double(total) << '\n';
      std::fill(window_sum.begin(), window_sum.end(), 0.0);
      in_window = 0;
    }
  }
  write_text(p.ranking_curve(), curve.str());

  auto snapshot = rank::make_ranking_snapshot(model);
  snapshot.header["stream_batches"] = cursor.batches_served();
  snapshot.header["truncated"] = truncated;
  rank::write_snapshot(p.ranking_snapshot(), snapshot);

  const metrics::UserGroups groups(splits.eval);
  const auto pxtr = pantheon::ranking_pxtr(model, splits.eval, worker_threads());
  ordered_json j;
  j["steps"] = steps;
  j["truncated"] = truncated;
  j["gauc"] = by_objective(c.objectives, ranking_gauc(pxtr, splits.eval, groups, n_obj));
  write_json(p.ranking_eval(), j);
  log("train-ranking", "done after " + std::to_string(steps) + " steps");
}

void cmd_run_ippo(const ExperimentConfig& c) {
  const ArtifactPaths p(c.output_dir);
  const auto ranking_snapshot = rank::read_snapshot(p.ranking_snapshot());
  const auto splits = load_splits(c, p);
  const std::size_t threads = worker_threads();

  data::StreamCursor cursor(splits.train, c.training.max_passes);
  const std::size_t consumed = snapshot_steps(ranking_snapshot);
  for (std::size_t i = 0; i < consumed; ++i) cursor.next_batch(c.training.batch_size);

  pantheon::JointModel joint(rank::ranking_from_snapshot(ranking_snapshot),
                             pantheon::PantheonModel(c.resolved_pantheon(), c.seed));
  const auto uniform = pantheon::WeightVector::uniform(c.objectives.size());
  log("run-ippo", "joint warmup for " + std::to_string(c.training.warmup_steps) + " steps");
  std::size_t warmup = 0;
  for (; warmup < c.training.warmup_steps; ++warmup) {
    const auto batch = cursor.next_batch(c.training.batch_size);
    if (batch.empty()) break;
    joint.step(batch, uniform);
  }
  rank::write_snapshot(p.initial_ranking(), rank::make_ranking_snapshot(joint.ranking()));
  rank::write_snapshot(p.initial_pantheon(),
                       pantheon::make_pantheon_snapshot(joint.pantheon(), uniform));

  ippo::JointEnvironment env(joint, cursor,
                             ippo::make_windows(splits.eval, c.window.policy, c.window.size),
                             c.training.batch_size, threads);
  log("run-ippo", std::to_string(c.ippo.rounds) + " rounds of " +
                      std::to_string(c.ippo.steps_per_round) + " steps");
  const auto result = ippo::run_ippo(env, c.ippo);
  const auto& state = result.state;
  ippo::write_trail(p.ippo_trail(), state.history, c.objectives.names());

  rank::write_snapshot(p.base_ranking(), rank::make_ranking_snapshot(env.base().ranking()));
  rank::write_snapshot(p.base_pantheon(),
                       pantheon::make_pantheon_snapshot(env.base().pantheon(), state.weights));

  ordered_json j;
  j["rounds_requested"] = c.ippo.rounds;
  j["rounds_completed"] = state.history.size();
  j["truncated"] = result.truncated;
  j["warmup_steps"] = warmup;
  j["reference_steps"] = env.steps_trained();
  j["replacements"] = result.replacements;
  j["improvement_chain_holds"] = ippo::improvement_chain_holds(state.history);
  const auto initial = state.history.empty() ? state.base_report.gauc
                                             : state.history.front().base_gauc;
  j["initial_base_gauc"] = by_objective(c.objectives, initial);
  j["final_base_gauc"] = by_objective(c.objectives, state.base_report.gauc);
  bool strictly_better = !state.history.empty();
  for (std::size_t o = 0; o < initial.size(); ++o) {
    strictly_better = strictly_better && state.base_report.gauc[o] > initial[o];
  }
  j["final_base_dominates_initial"] = strictly_better;
  std::vector<double> w(state.weights.values().begin(), state.weights.values().end());
  j["final_weights"] = by_objective(c.objectives, w);
  write_json(p.ippo_summary(), j);
  log("run-ippo", std::to_string(result.replacements) + " base replacements in " +
                      std::to_string(state.history.size()) + " rounds");
}

void cmd_tune_formula(const ExperimentConfig& c) {
  const ArtifactPaths p(c.output_dir);
  const auto ranking = load_ranking(p.base_ranking());
  const auto eval = load_eval(c, p);
  const metrics::UserGroups groups(eval);
  const auto pxtr = pantheon::ranking_pxtr(ranking, eval, worker_threads());
  const auto spec = formula::EvalMetricSpec::from_map(c.objectives, c.formula.eval_metric_weights);
  formula::SearchConfig search;
  search.budget = c.formula.budget;
  search.sweeps = c.formula.sweeps;
  search.golden_iterations = c.formula.golden_iterations;
  search.seed = derive_seed(c.seed, "formula");
  search.threads = worker_threads();
  log("tune-formula", "searching " + std::to_string(search.budget) + " samples");
  const auto result =
      formula::tune_params(c.formula.formula, c.objectives, pxtr, eval, groups, spec, search);
  formula::write_trace(p.formula_trace(), result.trace);

  ordered_json j;
  ordered_json params = ordered_json::object();
  for (const auto& [k, v] : result.best) params[k] = v;
  j["params"] = params;
  j["metric"] = result.best_metric;
  j["evaluations"] = result.trace.size();
  j["eval_metric_weights"] = by_objective(c.objectives, spec.weights);
  write_json(p.formula_params(), j);
  log("tune-formula", "best metric " + format_double(result.best_metric));
}

void cmd_evaluate(const ExperimentConfig& c) {
  const ArtifactPaths p(c.output_dir);
  const auto ranking = load_ranking(p.base_ranking());
  const auto fusion = pantheon::pantheon_from_snapshot(rank::read_snapshot(p.base_pantheon()));
  const auto params = load_formula_params(p);
  const auto eval = load_eval(c, p);
  const metrics::UserGroups groups(eval);
  const std::size_t n_obj = c.objectives.size();

  const auto scores = pantheon::score_window(ranking, fusion, eval, worker_threads());
  const auto formula_scores =
      formula::BoundFormula(c.formula.formula, c.objectives, params).score_rows(scores.pxtr);

  EvaluationTable t;
  t.window_id = "eval";
  t.rows = eval.size();
  t.objectives = c.objectives.names();
  t.ranking = ranking_gauc(scores.pxtr, eval, groups, n_obj);
  t.formula = metrics::gauc_report(formula_scores, eval, groups, c.objectives, "eval").gauc;
  t.pantheon = metrics::gauc_report(scores.fused, eval, groups, c.objectives, "eval").gauc;
  for (std::size_t o = 0; o < n_obj; ++o) {
    const auto col = column(scores.pxtr, o);
    t.kendall_formula.push_back(metrics::kendall_tau(col, formula_scores));
    t.kendall_pantheon.push_back(metrics::kendall_tau(col, scores.fused));
  }
  write_json(p.evaluation(), to_json(t));
  log("evaluate", "pantheon improves on " + std::to_string(t.strictly_improved()) + " of " +
                      std::to_string(n_obj) + " objectives");
}

void cmd_calibrate(const ExperimentConfig& c) {
  const ArtifactPaths p(c.output_dir);
  const auto exp_ranking = load_ranking(p.base_ranking());
  const auto exp_fusion = pantheon::pantheon_from_snapshot(rank::read_snapshot(p.base_pantheon()));
  const auto base_ranking = load_ranking(p.initial_ranking());
  const auto base_fusion =
      pantheon::pantheon_from_snapshot(rank::read_snapshot(p.initial_pantheon()));
  const auto eval = load_eval(c, p);
  const metrics::UserGroups groups(eval);
  const std::size_t threads = worker_threads();

  const auto experimental = pantheon::score_window(exp_ranking, exp_fusion, eval, threads);
  const auto baseline = pantheon::score_window(base_ranking, base_fusion, eval, threads);
  const auto transform = metrics::fit_calibration(experimental.fused, baseline.fused);
  const auto unclipped = metrics::apply_calibration_unclipped(transform, experimental.fused);
  const auto clipped = metrics::apply_calibration(transform, experimental.fused);

  const auto base_moments = metrics::sample_moments(baseline.fused);
  const auto mapped_moments = metrics::sample_moments(unclipped);
  const auto raw_report = metrics::gauc_report(experimental.fused, eval, groups, c.objectives, "eval");
  const auto cal_report = metrics::gauc_report(unclipped, eval, groups, c.objectives, "eval");
  std::vector<double> tau_raw;
  std::vector<double> tau_cal;
  for (std::size_t o = 0; o < c.objectives.size(); ++o) {
    const auto col = column(experimental.pxtr, o);
    tau_raw.push_back(metrics::kendall_tau(col, experimental.fused));
    tau_cal.push_back(metrics::kendall_tau(col, unclipped));
  }
  std::size_t n_clipped = 0;
  for (std::size_t i = 0; i < clipped.size(); ++i) n_clipped += clipped[i] != unclipped[i] ? 1 : 0;

  ordered_json j;
  j["experimental"] = "final fusion model";
  j["baseline"] = "initial fusion model";
  j["transform"] = {{"scale", transform.scale},
                    {"shift", transform.shift},
                    {"source_mean", transform.source_mean},
                    {"source_std", transform.source_std},
                    {"target_mean", transform.target_mean},
                    {"target_std", transform.target_std}};
  j["baseline_moments"] = {{"mean", base_moments.mean}, {"variance", base_moments.variance}};
  j["calibrated_moments"] = {{"mean", mapped_moments.mean},
                             {"variance", mapped_moments.variance}};
  j["clipped_scores"] = n_clipped;
  j["gauc_raw"] = by_objective(c.objectives, raw_report.gauc);
  j["gauc_calibrated"] = by_objective(c.objectives, cal_report.gauc);
  j["kendall_raw"] = by_objective(c.objectives, tau_raw);
  j["kendall_calibrated"] = by_objective(c.objectives, tau_cal);
  write_json(p.calibration(), j);

  std::ostringstream csv;
  csv << "ordinal,raw,calibrated\n";
  for (std::size_t i = 0; i < eval.size(); ++i) {
    csv << eval[i].ordinal << ',' << format_double(experimental.fused[i]) << ','
        << format_double(clipped[i]) << '\n';
  }
  write_text(p.calibrated_scores(), csv.str());
  log("calibrate", "scale " + format_double(transform.scale) + ", shift " +
                       format_double(transform.shift));
}

void cmd_report(const ExperimentConfig& c) {
  const ArtifactPaths p(c.output_dir);
  const auto table = evaluation_from_json(read_json(p.evaluation()));
  const auto summary = read_json(p.ippo_summary());
  const auto formula_params = read_json(p.formula_params());
  const auto calibration = read_json(p.calibration());
  const auto trail = ippo::read_trail(p.ippo_trail());

  auto config = to_json(c);
  config.erase("output_dir");
  ordered_json j;
  j["config"] = config;
  j["evaluation"] = to_json(table);
  j["average_improvement"] = table.average_improvement();
  j["ippo"] = summary;
  j["formula"] = formula_params;
  j["calibration"] = calibration;
  const auto dir = p.report_dir();
  write_json(dir / "report.json", j);
  write_text(dir / "gauc_table.csv", gauc_table_csv(table));
  write_text(dir / "kendall_table.csv", kendall_table_csv(table));
  write_text(dir / "ippo_rounds.csv", rounds_csv(table.objectives, trail));
  write_text(dir / "gauc_bars.svg", gauc_bars_svg(table));
  write_text(dir / "weight_trajectories.svg", weight_trajectories_svg(table.objectives, trail));
  write_text(dir / "kendall_table.svg", kendall_table_svg(table));
  log("report", "wrote " + dir.string());
}

void run_pipeline(const ExperimentConfig& config) {
  cmd_generate(config);
  cmd_train_ranking(config);
  cmd_run_ippo(config);
  cmd_tune_formula(config);
  cmd_evaluate(config);
  cmd_calibrate(config);
  cmd_report(config);
}

}  // namespace pfuse::experiment
