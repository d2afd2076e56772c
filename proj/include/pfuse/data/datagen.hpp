#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pfuse/data/objectives.hpp"
#include "pfuse/nn/tensor.hpp"

namespace pfuse::data {

struct UserProfile {
  std::int64_t user_id = 0;
  std::vector<double> latent;
  double activity = 1.0;
};

struct ItemProfile {
  std::int64_t item_id = 0;
  std::vector<double> latent;
  double popularity_bias = 0.0;
};

/// Label model of one objective: p = sigmoid(uᵀ·A·i + bias + popularity_weight·pop(i)).
struct ObjectiveModel {
  nn::Tensor affinity;
  double bias = 0.0;
  double popularity_weight = 0.0;
  double target_rate = 0.0;
};

/// One (user, item) exposure with a binary label per objective.
struct ImpressionLog {
  std::int64_t user_id = 0;
  std::int64_t item_id = 0;
  std::vector<double> dense_features;
  std::vector<std::uint8_t> labels;
  std::int64_t ordinal = 0;

  friend bool operator==(const ImpressionLog&, const ImpressionLog&) = default;
};

struct DatagenConfig {
  std::size_t n_users = 2000;
  std::size_t n_items = 1000;
  std::size_t latent_dim = 8;
  std::size_t n_train = 50000;
  std::size_t n_eval = 10000;
  /// σ of the Gaussian noise on every dense feature.
  double feature_noise = 0.1;
  /// σ of the log-normal user activity.
  double activity_sigma = 1.0;
  /// Std of the bilinear logit term.
  double affinity_scale = 1.5;
  /// Fraction of affinity variance shared by all objectives.
  double shared_affinity = 0.5;
  /// Marginal positive rate per objective (after funnel masking).
  std::map<std::string, double> target_rates = {
      {"wtr", 0.05}, {"ltr", 0.08},    {"lvtr", 0.15},  {"ctr", 0.20},
      {"evtr", 0.30}, {"inlvtr", 0.05}, {"inevtr", 0.10},
  };
  /// Monte-Carlo pairs used to fit the objective biases.
  std::size_t calibration_samples = 20000;
};

struct Universe {
  ObjectiveSet objectives = ObjectiveSet::defaults();
  std::size_t latent_dim = 0;
  double feature_noise = 0.0;
  std::vector<UserProfile> users;
  std::vector<ItemProfile> items;
  std::vector<ObjectiveModel> models;
  /// Cumulative activity, for drawing users proportional to activity.
  std::vector<double> activity_cdf;

  std::size_t dense_dim() const noexcept { return 3 * latent_dim; }
  /// Probability of the raw (pre-funnel) label draw.
  double raw_probability(std::size_t objective, const UserProfile& u, const ItemProfile& i) const;
};

/// Users and items get ids 1..n (0 is reserved for out-of-vocabulary rows).
/// Objective biases are fitted by bisection on a seeded Monte-Carlo sample so
/// that the post-funnel positive rate matches each target.
Universe generate_universe(std::uint64_t seed, const DatagenConfig& config,
                           const ObjectiveSet& objectives = ObjectiveSet::defaults());

/// Ordered impressions: user ∝ activity, item uniform, labels Bernoulli per
/// objective then masked by the funnel. Ordinals start at `first_ordinal`.
std::vector<ImpressionLog> stream_impressions(const Universe& universe, std::uint64_t seed,
                                              std::size_t n_impressions,
                                              std::int64_t first_ordinal = 0);

/// True when every funnel edge holds on the record.
bool respects_funnel(const ImpressionLog& log, const ObjectiveSet& objectives);

/// Positive rate per objective over a sample.
std::vector<double> positive_rates(const std::vector<ImpressionLog>& logs,
                                   std::size_t n_objectives);

}  // namespace pfuse::data
