// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [--work DIR] [--only N[,N...]]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <ratio>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "metric_oracles.hpp"
#include "pfuse/common/error.hpp"
#include "pfuse/data/impressions_io.hpp"
#include "pfuse/experiment/config.hpp"
#include "pfuse/experiment/pipeline.hpp"
#include "pfuse/experiment/report.hpp"
#include "pfuse/ippo/policy.hpp"
#include "pfuse/metrics/auc.hpp"
#include "pfuse/metrics/calibration.hpp"
#include "pfuse/metrics/dominance.hpp"
#include "pfuse/metrics/kendall.hpp"
#include "pfuse/nn/layers.hpp"
#include "pfuse/pantheon/pantheon.hpp"
#include "scalarization_oracle.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using pfuse::Rng;
using pfuse::nn::Activation;
using pfuse::nn::Graph;
using pfuse::nn::ParameterStore;
using pfuse::pantheon::EncoderVariant;
using pfuse::pantheon::InputVariant;
using pfuse::pantheon::PantheonModel;
using pfuse::pantheon::WeightVector;
using pfuse::rank::RankingModel;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::span<const pfuse::data::ImpressionLog> batch_at(const std::vector<pfuse::data::ImpressionLog>& logs,
                                                      std::size_t step, std::size_t size) {
  const std::size_t n = logs.size() / size;
  return std::span(logs).subspan((step % n) * size, size);
}

void randomize(ParameterStore& store, Rng& rng, double scale) {
  for (const auto& name : store.names()) {
    for (auto& v : store.mutable_entry(name).values()) v = rng.normal(0.0, scale);
  }
}

std::vector<double> row_values(const ordered_json& j) {
  std::vector<double> v;
  for (const auto& [name, value] : j.items()) v.push_back(value.get<double>());
  return v;
}

std::map<std::string, std::vector<double>> gauc_rows(const fs::path& evaluation) {
  std::map<std::string, std::vector<double>> rows;
  const auto j = pfuse::experiment::read_json(evaluation);
  for (const auto& r : j["gauc"]) {
    rows[r["method"].get<std::string>()] = row_values(r["gauc"]);
  }
  return rows;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream bytes;
    bytes << in.rdbuf();
    files[fs::relative(entry.path(), root).string()] = bytes.str();
  }
  return files;
}

class Acceptance {
 public:
  explicit Acceptance(fs::path work) : work_(std::move(work)) {}

  Outcome gradient_oracle() {
    const auto start = std::chrono::steady_clock::now();
    pfuse::testing::GradientMismatch worst;
    worst.relative = -1.0;
    std::size_t checks = 0;
    std::size_t entries = 0;
    std::size_t kinks = 0;
    auto record = [&](const pfuse::testing::GradientMismatch& m) {
      ++checks;
      entries += m.checked;
      kinks += m.kinks;
      if (m.relative > worst.relative) worst = m;
    };
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Rng rng(seed);
      {
        ParameterStore store;
        pfuse::nn::add_dense(store, "l0", 5, 7, rng);
        pfuse::nn::add_dense(store, "l1", 7, 3, rng);
        randomize(store, rng, 0.5);
        const auto x = pfuse::testing::random_tensor(4, 5, rng);
        const auto y = pfuse::testing::random_labels(12, rng);
        record(pfuse::testing::check_gradients({&store}, [&](Graph& g) {
          const auto h = pfuse::nn::dense(g, store, g.constant(x), "l0", Activation::relu);
          return g.bce_mean(pfuse::nn::dense(g, store, h, "l1", Activation::sigmoid), y);
        }));
      }
      {
        ParameterStore store;
        store.add("a", pfuse::testing::random_tensor(3, 4, rng));
        store.add("b", pfuse::testing::random_tensor(3, 4, rng));
        store.add("c", pfuse::testing::random_tensor(3, 2, rng));
        record(pfuse::testing::check_gradients({&store}, [&](Graph& g) {
          const auto a = g.parameter(store, "a");
          const auto b = g.parameter(store, "b");
          const auto prod = g.mul(g.add(a, g.scale(b, -0.7)), g.sigmoid(b));
          const std::vector<Graph::Var> parts = {prod, g.parameter(store, "c")};
          const auto cat = g.concat_cols(parts);
          const auto sm = g.softmax_rows(g.slice_cols(cat, 2, 3));
          const auto rs = g.reshape(g.mul(sm, g.slice_cols(cat, 1, 3)), 9, 1);
          return g.sum(g.mul(rs, rs));
        }));
      }
      {
        ParameterStore store;
        store.add("table", pfuse::testing::random_tensor(6, 3, rng));
        store.add("gate", pfuse::testing::random_tensor(2, 3, rng));
        store.add("e0", pfuse::testing::random_tensor(3, 3, rng));
        store.add("e1", pfuse::testing::random_tensor(3, 3, rng));
        const std::vector<std::size_t> rows = {4, 1, 4, 0, 5};
        const auto y0 = pfuse::testing::random_labels(5, rng);
        const auto y1 = pfuse::testing::random_labels(5, rng);
        const std::vector<double> weights = {0.3, 1.9};
        record(pfuse::testing::check_gradients({&store}, [&](Graph& g) {
          const Graph::Var none;
          const auto x = g.gather_rows(store, "table", rows);
          const auto gates = g.softmax_rows(g.linear(x, g.parameter(store, "gate"), none));
          const std::vector<Graph::Var> experts = {
              g.relu(g.linear(x, g.parameter(store, "e0"), none)),
              g.linear(x, g.parameter(store, "e1"), none)};
          const auto mix = g.mixture(gates, experts);
          const std::vector<Graph::Var> terms = {
              g.bce_mean(g.sigmoid(g.slice_cols(mix, 0, 1)), y0),
              g.bce_mean(g.sigmoid(g.slice_cols(mix, 2, 1)), y1)};
          return g.weighted_sum(terms, weights);
        }));
      }
      {
        ParameterStore store;
        pfuse::nn::add_self_attention(store, "attn", 4, rng);
        pfuse::nn::add_dense(store, "head", 4, 1, rng);
        store.add("tokens", pfuse::testing::random_tensor(6, 4, rng));
        const auto y = pfuse::testing::random_labels(2, rng);
        record(pfuse::testing::check_gradients({&store}, [&](Graph& g) {
          const auto out = pfuse::nn::self_attention(g, store, g.parameter(store, "tokens"), 3, "attn");
          const auto p = pfuse::nn::dense(g, store, g.block_mean(out.tokens, 3), "head",
                                          Activation::sigmoid);
          return g.bce_mean(p, y);
        }));
      }
      auto w = pfuse::testing::make_world(seed, 8, 0, 12, 6);
      w.ranking.n_experts = 2;
      w.ranking.expert_hidden_dims = {6};
      w.ranking.tower_hidden_dims = {5, 4};
      w.ranking.tower_output_dim = 4;
      w.ranking.embedding_dim = 3;
      const auto batch = pfuse::rank::make_batch(w.train, w.ranking.n_users, w.ranking.n_items,
                                                 w.ranking.dense_dim, 7);
      RankingModel ranking(w.ranking, seed + 10);
      randomize(ranking.params(), rng, 0.5);
      record(pfuse::testing::check_gradients({&ranking.params()}, [&](Graph& g) {
        return ranking.loss(g, ranking.forward(g, batch), batch);
      }));
      const WeightVector weights({0.3, 0.1, 0.05, 0.2, 0.15, 0.1, 0.1});
      for (auto [input, encoder] : {std::pair{InputVariant::hidden_state, EncoderVariant::mlp},
                                    std::pair{InputVariant::pxtr, EncoderVariant::mlp},
                                    std::pair{InputVariant::hidden_state, EncoderVariant::transformer}}) {
        auto config = pfuse::testing::fusion_config(w, input, encoder);
        config.mlp_dims = {6, 4};
        PantheonModel model(config, seed + 20);
        randomize(model.params(), rng, 0.3);
        record(pfuse::testing::check_gradients({&model.params()}, [&](Graph& g) {
          const auto f = ranking.forward(g, batch);
          return model.loss(g, model.encode(g, model.assemble(g, f, batch)), batch, weights);
        }));
      }
    }
    const double elapsed = seconds_since(start);
    // Kink-straddling entries are excluded from the comparison; they must stay rare.
    return {worst.relative < 1e-4 && kinks * 100 <= entries && elapsed < 60.0,
            std::to_string(checks) + " finite-difference checks over 5 seeds, " +
                std::to_string(entries) + " entries compared, worst relative error " +
                fmt(worst.relative, 3) + " (" + worst.name + "), " + std::to_string(kinks) +
                " entries at ReLU kinks excluded, " + fmt(elapsed, 3) + " s"};
  }

  Outcome isolation() {
    auto w = pfuse::testing::make_world(3, 3200, 0);
    RankingModel ranking(w.ranking, 4);
    for (std::size_t s = 0; s < 20; ++s) ranking.train_step(batch_at(w.train, s, 32));
    const RankingModel& frozen = ranking;
    const auto before = frozen.params();
    std::size_t nonzero = 0;
    std::size_t calls = 0;
    for (auto [input, encoder] : {std::pair{InputVariant::hidden_state, EncoderVariant::mlp},
                                  std::pair{InputVariant::pxtr, EncoderVariant::mlp},
                                  std::pair{InputVariant::hidden_state, EncoderVariant::transformer}}) {
      auto config = pfuse::testing::fusion_config(w, input, encoder);
      config.debug_isolation_check = true;
      PantheonModel model(config, 5);
      const auto weights = WeightVector::uniform(7);
      for (std::size_t s = 0; s < 100; ++s) {
        const auto logs = batch_at(w.train, s, 32);
        const auto batch = pfuse::rank::make_batch(logs, w.ranking.n_users, w.ranking.n_items,
                                                   w.ranking.dense_dim, 7);
        pfuse::nn::GradientTape tape;
        tape.track(ranking.params());
        tape.track(model.params());
        Graph g;
        const auto f = frozen.forward(g, batch);
        pfuse::nn::backward(g, model.loss(g, model.encode(g, model.assemble(g, f, batch)), batch, weights),
                            tape);
        for (const auto& name : frozen.params().names()) {
          for (double v : tape.grad(name).values()) nonzero += v != 0.0 ? 1 : 0;
        }
        model.train_step(logs, frozen, weights);
        ++calls;
      }
    }
    const bool unchanged = frozen.params() == before;
    return {nonzero == 0 && unchanged,
            std::to_string(calls) + " fusion steps over 3 variants, " + std::to_string(nonzero) +
                " nonzero ranking gradient entries, ranking parameters " +
                (unchanged ? "bit-unchanged" : "CHANGED")};
  }

  Outcome scalarization() {
    const auto start = std::chrono::steady_clock::now();
    std::size_t vectors = 0;
    std::size_t dominated = 0;
    std::size_t largest = 0;
    for (std::size_t objectives : {2u, 3u, 4u}) {
      const auto o = pfuse::testing::check_scalarization(100 + objectives, 6, objectives, 12);
      vectors += o.weight_vectors;
      dominated += o.dominated_minimizers;
      largest = std::max(largest, o.assignments);
    }
    const double elapsed = seconds_since(start);
    return {dominated == 0 && vectors >= 10 && elapsed < 120.0,
            std::to_string(vectors) + " weight vectors over spaces of " + std::to_string(largest) +
                " assignments, " + std::to_string(dominated) + " dominated minimizers, " +
                fmt(elapsed, 3) + " s"};
  }

  Outcome homogeneous_scaling() {
    auto w = pfuse::testing::make_world(8, 4800, 0);
    RankingModel ranking(w.ranking, 9);
    for (std::size_t s = 0; s < 100; ++s) ranking.train_step(batch_at(w.train, s, 32));
    const WeightVector weights({0.3, 0.05, 0.1, 0.25, 0.1, 0.12, 0.08});
    double worst_params = 0.0;
    double worst_weights = 0.0;
    for (double k : {0.5, 3.0, 10.0}) {
      auto config = pfuse::testing::fusion_config(w);
      config.optimizer = pfuse::nn::OptimizerMethod::sgd;
      config.learning_rate = 0.05;
      PantheonModel base(config, 10);
      config.learning_rate = 0.05 / k;
      PantheonModel scaled(config, 10);
      const auto scaled_weights = weights.scaled(k);
      for (std::size_t s = 0; s < 1000; ++s) {
        const auto batch = batch_at(w.train, s, 32);
        base.train_step(batch, ranking, weights);
        scaled.train_step(batch, ranking, scaled_weights);
        worst_params =
            std::max(worst_params, pfuse::testing::max_relative_gap(base.params(), scaled.params()));
      }
      const auto a = weights.normalized();
      const auto b = scaled_weights.normalized();
      for (std::size_t i = 0; i < a.size(); ++i) {
        worst_weights = std::max(worst_weights, std::abs(a[i] - b[i]));
      }
    }
    return {worst_params < 1e-5 && worst_weights < 1e-12,
            "k in {0.5, 3, 10}, 1000 sgd steps: worst parameter gap " + fmt(worst_params, 3) +
                ", normalized weight gap " + fmt(worst_weights, 3)};
  }

  Outcome metric_oracles() {
    Rng rng(2024);
    double worst_gauc = 0.0;
    std::size_t gauc_windows = 0;
    while (gauc_windows < 110) {
      const std::size_t rows = 2 + rng.index(5000 - 1);
      const std::size_t users = 1 + rng.index(std::max<std::size_t>(1, rows / 5));
      const auto window = pfuse::testing::random_window(rng, rows, users, rng.uniform(0.05, 0.6));
      const auto s = pfuse::testing::random_scores(rng, rows, gauc_windows % 3 == 0);
      const double expected = pfuse::testing::brute_gauc(s, window, 0);
      if (!std::isfinite(expected)) continue;
      worst_gauc = std::max(worst_gauc, std::abs(pfuse::metrics::gauc(s, window, 0).gauc - expected));
      ++gauc_windows;
    }
    double worst_tau = 0.0;
    std::size_t tau_windows = 0;
    while (tau_windows < 110) {
      const std::size_t n = 2 + rng.index(5000 - 1);
      const auto x = pfuse::testing::random_scores(rng, n, tau_windows % 2 == 0);
      auto y = pfuse::testing::random_scores(rng, n, tau_windows % 3 == 0);
      for (std::size_t i = 0; i < n; ++i) y[i] += 0.5 * x[i];
      const double expected = pfuse::testing::brute_tau_b(x, y);
      if (!std::isfinite(expected)) continue;
      worst_tau = std::max(worst_tau, std::abs(pfuse::metrics::kendall_tau(x, y) - expected));
      ++tau_windows;
    }
    return {worst_gauc <= 1e-12 && worst_tau <= 1e-12,
            std::to_string(gauc_windows) + " GAUC windows (worst gap " + fmt(worst_gauc, 3) + "), " +
                std::to_string(tau_windows) + " Kendall windows (worst gap " + fmt(worst_tau, 3) + ")"};
  }

  Outcome policy_rules() {
    using Bumped = std::ratio_divide<std::ratio_add<std::ratio<1, 7>, std::ratio<1, 70>>,
                                     std::ratio_add<std::ratio<1>, std::ratio<1, 70>>>;
    static_assert(std::ratio_equal_v<Bumped, std::ratio<11, 71>>);
    const std::vector<std::string> names = {"wtr", "ltr", "lvtr", "ctr", "evtr", "inlvtr", "inevtr"};
    auto report = [&](std::vector<double> g) {
      pfuse::metrics::GaucReport r;
      r.objectives = names;
      r.gauc = std::move(g);
      return r;
    };
    std::vector<std::string> failures;
    auto expect = [&](bool ok, const std::string& what) {
      if (!ok) failures.push_back(what);
    };
    const auto base = report(std::vector<double>(7, 0.6));
    expect(pfuse::ippo::compute_reward(base, report(std::vector<double>(7, 0.61))), "dominating reference");
    expect(!pfuse::ippo::compute_reward(base, base), "equal reference");
    auto mixed = std::vector<double>(7, 0.7);
    mixed[0] = 0.59;
    expect(!pfuse::ippo::compute_reward(base, report(mixed)), "worse on wtr");
    expect(pfuse::ippo::adjust_delta(5) == 0.1 / 5.0, "delta for N=5");

    // Random report pairs against the rules restated directly.
    Rng rng(6);
    std::size_t replaced = 0;
    for (int t = 0; t < 2000; ++t) {
      std::vector<double> b(7);
      std::vector<double> r(7);
      for (std::size_t o = 0; o < 7; ++o) {
        b[o] = rng.uniform(0.5, 0.8);
        r[o] = rng.bernoulli(0.9) ? b[o] + rng.uniform(0.0, 0.02) : b[o] - rng.uniform(0.0, 0.02);
      }
      bool dominates = true;
      for (std::size_t o = 0; o < 7; ++o) dominates = dominates && r[o] - b[o] > 1e-6;
      const bool reward = pfuse::ippo::compute_reward(report(b), report(r));
      expect(reward == dominates, "reward rule");
      const auto action = pfuse::ippo::select_action(reward, report(b), report(r), 0.1 / 7.0);
      if (dominates) {
        ++replaced;
        expect(action.kind == pfuse::ippo::ActionKind::replace_base, "replace on dominance");
        continue;
      }
      std::size_t target = 0;
      for (std::size_t o = 1; o < 7; ++o) {
        if (b[o] - r[o] > b[target] - r[target]) target = o;
      }
      expect(action.kind == pfuse::ippo::ActionKind::adjust_weight && action.target == target,
             "max-gap target");
      auto state = pfuse::ippo::initial_state(7, report(b));
      state = pfuse::ippo::apply_action(action, state, false, report(b), report(r));
      double sum = 0.0;
      for (std::size_t o = 0; o < 7; ++o) {
        const double want = (o == target ? 1.0 / 7.0 + 0.1 / 7.0 : 1.0 / 7.0) / (1.0 + 0.1 / 7.0);
        expect(std::abs(state.weights[o] - want) < 1e-15, "bumped and renormalized weights");
        sum += state.weights[o];
      }
      expect(std::abs(sum - 1.0) < 1e-12, "weights sum to one");
    }

    auto state = pfuse::ippo::initial_state(7, base);
    state = pfuse::ippo::apply_action({pfuse::ippo::ActionKind::adjust_weight, 3, 0.1 / 7.0}, state,
                                      false, base, base);
    const double ctr = state.weights[3];
    expect(std::abs(ctr - 11.0 / 71.0) < 1e-15, "11/71 worked example");
    expect(std::abs(state.weights[0] - 10.0 / 71.0) < 1e-15, "10/71 worked example");
    std::set<std::string> unique(failures.begin(), failures.end());
    std::string detail = "w_ctr = " + fmt(ctr, 17) + " (11/71 = " + fmt(11.0 / 71.0, 17) + "), " +
                         std::to_string(replaced) + " replacements in 2000 random rounds";
    for (const auto& f : unique) detail += "; failed: " + f;
    return {failures.empty(), detail};
  }

  const fs::path& default_run() {
    if (default_run_.empty()) {
      auto config = pfuse::experiment::load_config(fs::path(PFUSE_SOURCE_DIR) / "configs" / "default.json");
      config.output_dir = work_ / "default_a";
      fs::remove_all(config.output_dir);
      const auto start = std::chrono::steady_clock::now();
      pfuse::experiment::run_pipeline(config);
      default_seconds_ = seconds_since(start);
      default_run_ = config.output_dir;
    }
    return default_run_;
  }

  Outcome table_direction() {
    const pfuse::experiment::ArtifactPaths paths(default_run());
    auto rows = gauc_rows(paths.evaluation());
    const auto names = pfuse::experiment::read_json(paths.evaluation())["objectives"];
    const auto& ranking = rows.at("ranking");
    const auto& formula = rows.at("formula");
    const auto& pantheon = rows.at("pantheon");
    std::size_t ceiling = 0;
    std::size_t not_worse = 0;
    std::size_t improved = 0;
    std::string ceiling_misses;
    std::string regressions;
    for (std::size_t o = 0; o < ranking.size(); ++o) {
      const auto name = names[o].get<std::string>();
      if (ranking[o] > std::max(formula[o], pantheon[o])) {
        ++ceiling;
      } else {
        ceiling_misses += " " + name;
      }
      const double gap = pantheon[o] - formula[o];
      if (gap >= 0.0) {
        ++not_worse;
      } else {
        regressions += " " + name + "(" + fmt(gap, 2) + ")";
      }
      if (gap > 0.0) ++improved;
    }
    const std::size_t n = ranking.size();
    const bool a = ceiling == n;
    const bool b = not_worse == n && improved >= 4;
    std::string detail = "(a) ranking ceiling on " + std::to_string(ceiling) + "/" + std::to_string(n);
    if (!ceiling_misses.empty()) detail += " [misses:" + ceiling_misses + "]";
    detail += "; (b) fusion >= formula on " + std::to_string(not_worse) + "/" + std::to_string(n) +
              ", strictly on " + std::to_string(improved);
    if (!regressions.empty()) detail += " [below formula:" + regressions + "]";
    detail += "; pipeline " + fmt(default_seconds_, 3) + " s";
    return {a && b && default_seconds_ < 600.0, detail};
  }

  Outcome improvement_chain() {
    const pfuse::experiment::ArtifactPaths paths(default_run());
    const auto trail = pfuse::ippo::read_trail(paths.ippo_trail());
    std::vector<std::vector<double>> bases;
    for (const auto& r : trail) {
      if (r["action"] == "replace_base") bases.push_back(row_values(r["reference_gauc"]));
    }
    bool chain = true;
    for (std::size_t i = 1; i < bases.size(); ++i) {
      for (std::size_t o = 0; o < bases[i].size(); ++o) chain = chain && bases[i][o] > bases[i - 1][o];
    }
    return {!bases.empty() && chain,
            std::to_string(bases.size()) + " replace_base events in " + std::to_string(trail.size()) +
                " rounds, successive bases " + (chain ? "strictly dominate" : "DO NOT dominate")};
  }

  Outcome ablation() {
    struct Variant {
      std::string name;
      InputVariant input;
      EncoderVariant encoder;
    };
    const std::vector<Variant> variants = {
        {"hidden_state+mlp", InputVariant::hidden_state, EncoderVariant::mlp},
        {"pxtr+mlp", InputVariant::pxtr, EncoderVariant::mlp},
        {"hidden_state+transformer", InputVariant::hidden_state, EncoderVariant::transformer}};
    const std::vector<std::uint64_t> seeds = {1, 2, 3};
    std::map<std::string, std::vector<double>> mean;
    std::vector<std::string> objectives;
    for (auto seed : seeds) {
      auto config = pfuse::experiment::load_config(fs::path(PFUSE_SOURCE_DIR) / "configs" / "default.json");
      config.seed = seed;
      config.ippo.rounds = 10;
      config.formula.budget = 64;
      config.output_dir = work_ / "ablation" / ("seed" + std::to_string(seed)) / "shared";
      fs::remove_all(config.output_dir.parent_path());
      pfuse::experiment::cmd_generate(config);
      pfuse::experiment::cmd_train_ranking(config);
      for (const auto& v : variants) {
        auto c = config;
        c.output_dir = config.output_dir.parent_path() / v.name;
        fs::copy(config.output_dir, c.output_dir, fs::copy_options::recursive);
        c.pantheon.input = v.input;
        c.pantheon.encoder = v.encoder;
        pfuse::experiment::cmd_run_ippo(c);
        pfuse::experiment::cmd_tune_formula(c);
        pfuse::experiment::cmd_evaluate(c);
        const pfuse::experiment::ArtifactPaths paths(c.output_dir);
        const auto rows = gauc_rows(paths.evaluation());
        auto& m = mean[v.name];
        m.resize(rows.at("pantheon").size(), 0.0);
        for (std::size_t o = 0; o < m.size(); ++o) m[o] += rows.at("pantheon")[o] / seeds.size();
        if (objectives.empty()) {
          const auto j = pfuse::experiment::read_json(paths.evaluation());
          for (const auto& n : j["objectives"]) {
            objectives.push_back(n.get<std::string>());
          }
        }
      }
    }
    std::ostringstream table;
    table << "variant";
    for (const auto& o : objectives) table << ',' << o;
    table << '\n';
    for (const auto& v : variants) {
      table << v.name;
      for (double g : mean[v.name]) table << ',' << pfuse::experiment::format_double(g);
      table << '\n';
    }
    pfuse::experiment::write_text(work_ / "ablation" / "ablation_gauc.csv", table.str());
    std::size_t wins = 0;
    for (std::size_t o = 0; o < objectives.size(); ++o) {
      wins += mean["hidden_state+mlp"][o] >= mean["pxtr+mlp"][o] ? 1 : 0;
    }
    auto average = [&](const std::string& name) {
      double s = 0.0;
      for (double g : mean[name]) s += g;
      return s / static_cast<double>(mean[name].size());
    };
    return {wins >= 5, "hidden_state+mlp >= pxtr+mlp on " + std::to_string(wins) + "/" +
                           std::to_string(objectives.size()) + " (3-seed mean GAUC " +
                           fmt(average("hidden_state+mlp")) + " vs " + fmt(average("pxtr+mlp")) +
                           ", transformer " + fmt(average("hidden_state+transformer")) + ")"};
  }

  Outcome calibration() {
    // Fit on the default run's artifacts, then recompute from the score file.
    const pfuse::experiment::ArtifactPaths paths(default_run());
    const auto cal = pfuse::experiment::read_json(paths.calibration());
    const auto& t = cal["transform"];
    pfuse::metrics::CalibrationTransform transform;
    transform.scale = t["scale"].get<double>();
    transform.shift = t["shift"].get<double>();
    std::vector<double> raw;
    std::ifstream in(paths.calibrated_scores());
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const auto a = line.find(',');
      const auto b = line.find(',', a + 1);
      raw.push_back(std::stod(line.substr(a + 1, b - a - 1)));
    }
    const auto mapped = pfuse::metrics::apply_calibration_unclipped(transform, raw);
    const auto got = pfuse::metrics::sample_moments(mapped);
    const double target_mean = t["target_mean"].get<double>();
    const double target_var = t["target_std"].get<double>() * t["target_std"].get<double>();
    const double moment_gap = std::max(std::abs(got.mean - target_mean), std::abs(got.variance - target_var));

    const auto objectives = pfuse::data::ObjectiveSet::defaults();
    const auto window = pfuse::data::read_jsonl(paths.eval_logs(), objectives);
    const pfuse::metrics::UserGroups groups(window);
    double rank_gap = 0.0;
    for (std::size_t o = 0; o < objectives.size(); ++o) {
      rank_gap = std::max(rank_gap, std::abs(pfuse::metrics::gauc(mapped, window, groups, o).gauc -
                                             pfuse::metrics::gauc(raw, window, groups, o).gauc));
      std::vector<double> labels(window.size());
      for (std::size_t r = 0; r < window.size(); ++r) labels[r] = window[r].labels[o];
      rank_gap = std::max(rank_gap, std::abs(pfuse::metrics::kendall_tau(mapped, labels) -
                                             pfuse::metrics::kendall_tau(raw, labels)));
    }
    const auto artifact_gap = std::max(
        std::abs(cal["calibrated_moments"]["mean"].get<double>() - cal["baseline_moments"]["mean"].get<double>()),
        std::abs(cal["calibrated_moments"]["variance"].get<double>() -
                 cal["baseline_moments"]["variance"].get<double>()));
    return {moment_gap < 1e-9 && artifact_gap < 1e-9 && rank_gap <= 1e-12,
            std::to_string(raw.size()) + " scores: moment gap " + fmt(std::max(moment_gap, artifact_gap), 3) +
                ", GAUC/tau gap " + fmt(rank_gap, 3)};
  }

  Outcome determinism() {
    const auto a = default_run();
    auto config = pfuse::experiment::load_config(fs::path(PFUSE_SOURCE_DIR) / "configs" / "default.json");
    config.output_dir = work_ / "default_b";
    fs::remove_all(config.output_dir);
    pfuse::experiment::run_pipeline(config);
    const auto first = read_tree(a);
    const auto second = read_tree(config.output_dir);
    std::size_t reports = 0;
    std::size_t differing = 0;
    for (const auto& [name, bytes] : first) {
      const auto ext = fs::path(name).extension();
      if (ext == ".json" || ext == ".csv" || ext == ".svg") ++reports;
      const auto it = second.find(name);
      if (it == second.end() || it->second != bytes) ++differing;
    }
    if (second.size() != first.size()) ++differing;
    return {differing == 0 && reports > 0,
            std::to_string(first.size()) + " artifacts (" + std::to_string(reports) +
                " JSON/CSV/SVG), " + std::to_string(differing) + " differ between two runs"};
  }

 private:
  fs::path work_;
  fs::path default_run_;
  double default_seconds_ = 0.0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string work = "acceptance-work";
  std::vector<int> only;
  app.add_option("--work", work, "scratch directory");
  app.add_option("--only", only, "criteria to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  Acceptance run{fs::path(work)};
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient oracle", [&] { return run.gradient_oracle(); }},
      {"stop-gradient isolation", [&] { return run.isolation(); }},
      {"scalarization optimality", [&] { return run.scalarization(); }},
      {"homogeneous scaling", [&] { return run.homogeneous_scaling(); }},
      {"metric oracles", [&] { return run.metric_oracles(); }},
      {"policy rules", [&] { return run.policy_rules(); }},
      {"fusion vs formula direction", [&] { return run.table_direction(); }},
      {"improvement chain", [&] { return run.improvement_chain(); }},
      {"input ablation", [&] { return run.ablation(); }},
      {"calibration", [&] { return run.calibration(); }},
      {"determinism", [&] { return run.determinism(); }},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("error: ") + e.what()};
    }
    all = all && outcome.pass;
    std::cout << "criterion " << std::setw(2) << id << ": " << (outcome.pass ? "PASS" : "FAIL")
              << "  " << criteria[i].first << ": " << outcome.detail << std::endl;
  }
  return all ? 0 : 1;
}
