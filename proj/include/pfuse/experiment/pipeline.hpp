#pragma once

#include <filesystem>

#include "pfuse/experiment/config.hpp"

namespace pfuse::experiment {

/// Artifact locations inside an experiment's output directory.
struct ArtifactPaths {
  explicit ArtifactPaths(std::filesystem::path root);

  std::filesystem::path root;
  std::filesystem::path train_logs() const { return root / "data" / "train.jsonl"; }
  std::filesystem::path eval_logs() const { return root / "data" / "eval.jsonl"; }
  std::filesystem::path universe() const { return root / "data" / "universe.json"; }
  std::filesystem::path ranking_snapshot() const { return root / "ranking" / "ranking.snapshot.json"; }
  std::filesystem::path ranking_curve() const { return root / "ranking" / "training_curve.csv"; }
  std::filesystem::path ranking_eval() const { return root / "ranking" / "eval_gauc.json"; }
  std::filesystem::path ippo_trail() const { return root / "ippo" / "trail.jsonl"; }
  std::filesystem::path ippo_summary() const { return root / "ippo" / "summary.json"; }
  std::filesystem::path initial_ranking() const { return root / "ippo" / "initial_ranking.snapshot.json"; }
  std::filesystem::path initial_pantheon() const { return root / "ippo" / "initial_pantheon.snapshot.json"; }
  std::filesystem::path base_ranking() const { return root / "ippo" / "base_ranking.snapshot.json"; }
  std::filesystem::path base_pantheon() const { return root / "ippo" / "pantheon.snapshot.json"; }
  std::filesystem::path formula_params() const { return root / "formula" / "params.json"; }
  std::filesystem::path formula_trace() const { return root / "formula" / "trace.jsonl"; }
  std::filesystem::path evaluation() const { return root / "eval" / "evaluation.json"; }
  std::filesystem::path calibration() const { return root / "calibration" / "calibration.json"; }
  std::filesystem::path calibrated_scores() const { return root / "calibration" / "calibrated_scores.csv"; }
  std::filesystem::path report_dir() const { return root / "report"; }
};

/// Synthetic universe plus the train and evaluation splits.
void cmd_generate(const ExperimentConfig& config);
/// Ranking-only pretraining; writes the snapshot, loss curve and eval GAUC.
void cmd_train_ranking(const ExperimentConfig& config);
/// Joint warmup then the IPPO rounds; writes the trail and the final base.
void cmd_run_ippo(const ExperimentConfig& config);
/// Formula search on the final base ranking model's predictions.
void cmd_tune_formula(const ExperimentConfig& config);
/// Ranking / formula / fusion comparison table with Kendall τ.
void cmd_evaluate(const ExperimentConfig& config);
/// Aligns the final fusion scores to the initial fusion model's distribution.
void cmd_calibrate(const ExperimentConfig& config);
/// Consolidated JSON, CSV tables and SVG charts.
void cmd_report(const ExperimentConfig& config);

/// Every stage in order.
void run_pipeline(const ExperimentConfig& config);

}  // namespace pfuse::experiment
