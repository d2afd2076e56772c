#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "pfuse/common/rng.hpp"
#include "pfuse/data/datagen.hpp"
#include "pfuse/pantheon/pantheon.hpp"
#include "pfuse/rank/ranking_model.hpp"
#include "pfuse/nn/graph.hpp"
#include "pfuse/nn/parameter_store.hpp"

namespace pfuse::testing {

/// Builds a scalar loss over the stores currently bound into the closure.
using LossBuilder = std::function<nn::Graph::Var(nn::Graph&)>;

struct GradientMismatch {
  std::string name;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double relative = 0.0;
  /// Entries skipped because the ±h stencil straddles a ReLU kink.
  std::size_t kinks = 0;
  std::size_t checked = 0;
};

inline double loss_value(const LossBuilder& build) {
  nn::Graph graph;
  const auto loss = build(graph);
  return graph.value(loss)[0];
}

/// |a - n| / max(|a|, |n|); pairs below `floor` in magnitude compare absolutely.
inline double relative_error(double a, double n, double floor = 1e-4) {
  const double scale = std::max({std::abs(a), std::abs(n), floor});
  return std::abs(a - n) / scale;
}

/// Central finite differences with step h for every entry of every store,
/// compared against the tape gradients of one backward pass. Returns the
/// worst entry. An entry whose estimates at h and h/2 disagree sits within h
/// of a non-differentiable point; it is counted in `kinks` and not compared.
inline GradientMismatch check_gradients(std::vector<nn::ParameterStore*> stores,
                                        const LossBuilder& build, double h = 1e-4) {
  nn::GradientTape tape;
  for (auto* s : stores) tape.track(*s);
  {
    nn::Graph graph;
    const auto loss = build(graph);
    nn::backward(graph, loss, tape);
  }
  GradientMismatch worst;
  worst.relative = -1.0;
  std::size_t kinks = 0;
  std::size_t checked = 0;
  for (auto* s : stores) {
    for (const auto& name : s->names()) {
      auto& entry = s->mutable_entry(name);
      const auto& g = tape.grad(name);
      for (std::size_t i = 0; i < entry.size(); ++i) {
        const double saved = entry[i];
        auto central = [&](double step) {
          entry[i] = saved + step;
          const double up = loss_value(build);
          entry[i] = saved - step;
          const double down = loss_value(build);
          entry[i] = saved;
          return (up - down) / (2.0 * step);
        };
        const double numeric = central(h);
        const double rel = relative_error(g[i], numeric);
        if (rel > 1e-6 && relative_error(numeric, central(0.5 * h), 1e-6) > 1e-4) {
          ++kinks;
          continue;
        }
        ++checked;
        if (rel > worst.relative) worst = {name, i, g[i], numeric, rel};
      }
    }
  }
  worst.kinks = kinks;
  worst.checked = checked;
  return worst;
}

inline nn::Tensor random_tensor(std::size_t rows, std::size_t cols, Rng& rng,
                                double scale = 1.0) {
  nn::Tensor t(rows, cols);
  for (auto& v : t.values()) v = rng.normal(0.0, scale);
  return t;
}

inline std::vector<double> random_labels(std::size_t n, Rng& rng) {
  std::vector<double> y(n);
  for (auto& v : y) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
  return y;
}

/// Seeded universe with train/eval splits and a matching ranking config.
struct World {
  data::Universe universe;
  std::vector<data::ImpressionLog> train;
  std::vector<data::ImpressionLog> eval;
  rank::RankingConfig ranking;
};

inline World make_world(std::uint64_t seed, std::size_t n_train, std::size_t n_eval,
                        std::size_t n_users = 300, std::size_t n_items = 150) {
  data::DatagenConfig config;
  config.n_users = n_users;
  config.n_items = n_items;
  config.calibration_samples = 5000;
  World w;
  w.universe = data::generate_universe(seed, config);
  w.train = data::stream_impressions(w.universe, seed + 1, n_train);
  w.eval = data::stream_impressions(w.universe, seed + 2, n_eval,
                                    static_cast<std::int64_t>(n_train));
  w.ranking.n_users = n_users;
  w.ranking.n_items = n_items;
  w.ranking.dense_dim = w.universe.dense_dim();
  w.ranking.objectives = w.universe.objectives;
  return w;
}

inline pantheon::PantheonConfig fusion_config(
    const World& w, pantheon::InputVariant input = pantheon::InputVariant::hidden_state,
    pantheon::EncoderVariant encoder = pantheon::EncoderVariant::mlp) {
  pantheon::PantheonConfig c;
  c.input = input;
  c.encoder = encoder;
  c.n_users = w.ranking.n_users;
  c.n_items = w.ranking.n_items;
  c.n_objectives = w.ranking.objectives.size();
  c.hidden_dim = w.ranking.tower_output_dim;
  c.feature_dim = w.ranking.tower_output_dim;
  return c;
}

/// Largest |a - b| / max(|a|, |b|, floor) over every entry of two stores.
inline double max_relative_gap(const nn::ParameterStore& a, const nn::ParameterStore& b,
                               double floor = 1e-12) {
  double worst = 0.0;
  for (const auto& [name, ta] : a.entries()) {
    const auto& tb = b.get(name);
    for (std::size_t i = 0; i < ta.size(); ++i) {
      worst = std::max(worst, relative_error(ta[i], tb[i], floor));
    }
  }
  return worst;
}

}  // namespace pfuse::testing
