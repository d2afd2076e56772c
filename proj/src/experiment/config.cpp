#include "pfuse/experiment/config.hpp"

#include <fstream>
#include <set>

#include "pfuse/common/error.hpp"
#include "pfuse/rank/snapshot.hpp"

namespace pfuse::experiment {

namespace {

using nlohmann::ordered_json;

/// Reads optional keys from one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const ordered_json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    known_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  const ordered_json* child(const char* key) {
    known_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string path(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!known_.count(key)) throw ConfigError(path_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const ordered_json& j_;
  std::string path_;
  std::set<std::string> known_;
};

std::vector<formula::FormulaTerm> terms_from_json(const ordered_json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array of terms");
  std::vector<formula::FormulaTerm> terms;
  for (const auto& item : j) {
    Section s(item, path + "[]");
    formula::FormulaTerm t;
    s.read("objective", t.objective);
    s.read("parameter", t.parameter);
    s.finish();
    if (t.objective.empty() || t.parameter.empty()) {
      throw ConfigError(path + ": terms need an objective and a parameter");
    }
    terms.push_back(std::move(t));
  }
  return terms;
}

ordered_json terms_to_json(const std::vector<formula::FormulaTerm>& terms) {
  ordered_json j = ordered_json::array();
  for (const auto& t : terms) j.push_back({{"objective", t.objective}, {"parameter", t.parameter}});
  return j;
}

}  // namespace

rank::RankingConfig ExperimentConfig::resolved_ranking() const {
  rank::RankingConfig r = ranking;
  r.n_users = datagen.n_users;
  r.n_items = datagen.n_items;
  r.dense_dim = 3 * datagen.latent_dim;
  r.objectives = objectives;
  return r;
}

pantheon::PantheonConfig ExperimentConfig::resolved_pantheon() const {
  pantheon::PantheonConfig p = pantheon;
  p.n_users = datagen.n_users;
  p.n_items = datagen.n_items;
  p.n_objectives = objectives.size();
  p.hidden_dim = ranking.tower_output_dim;
  p.feature_dim = ranking.tower_output_dim;
  return p;
}

void ExperimentConfig::validate() const {
  if (datagen.n_users < 1 || datagen.n_items < 1 || datagen.latent_dim < 1) {
    throw ConfigError("datagen: counts must be >= 1");
  }
  if (datagen.n_train < 1 || datagen.n_eval < 1) {
    throw ConfigError("datagen: n_train and n_eval must be >= 1");
  }
  resolved_ranking().validate();
  resolved_pantheon().validate();
  if (training.batch_size < 1) throw ConfigError("training.batch_size must be >= 1");
  if (training.max_passes < 1) throw ConfigError("training.max_passes must be >= 1");
  if (!(ippo.delta_scale > 0.0)) throw ConfigError("ippo.delta_scale must be positive");
  if (window.policy == ippo::WindowPolicy::rolling &&
      (window.size < 1 || window.size > datagen.n_eval)) {
    throw ConfigError("window.size must lie in [1, datagen.n_eval] for rolling windows");
  }
  formula.formula.validate(objectives);
  formula::EvalMetricSpec::from_map(objectives, formula.eval_metric_weights);
  if (formula.budget < 1) throw ConfigError("formula.budget must be >= 1");
}

ExperimentConfig config_from_json(const ordered_json& j) {
  ExperimentConfig c;
  Section root(j, "config");
  int version = 0;
  root.read("schema_version", version);
  if (version != kSchemaVersion) {
    throw ConfigError("config: schema_version must be " + std::to_string(kSchemaVersion) +
                      ", found " + std::to_string(version));
  }
  root.read("seed", c.seed);
  std::string out_dir = c.output_dir.string();
  root.read("output_dir", out_dir);
  c.output_dir = out_dir;

  if (const auto* o = root.child("objectives")) {
    try {
      c.objectives = rank::objectives_from_json(*o);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config.objectives: ") + e.what());
    }
  }

  if (const auto* d = root.child("datagen")) {
    Section s(*d, root.path("datagen"));
    auto& g = c.datagen;
    s.read("n_users", g.n_users);
    s.read("n_items", g.n_items);
    s.read("latent_dim", g.latent_dim);
    s.read("n_train", g.n_train);
    s.read("n_eval", g.n_eval);
    s.read("feature_noise", g.feature_noise);
    s.read("activity_sigma", g.activity_sigma);
    s.read("affinity_scale", g.affinity_scale);
    s.read("shared_affinity", g.shared_affinity);
    s.read("target_rates", g.target_rates);
    s.read("calibration_samples", g.calibration_samples);
    s.finish();
  }

  if (const auto* r = root.child("ranking")) {
    Section s(*r, root.path("ranking"));
    auto& m = c.ranking;
    s.read("n_experts", m.n_experts);
    s.read("expert_hidden_dims", m.expert_hidden_dims);
    s.read("tower_hidden_dims", m.tower_hidden_dims);
    s.read("tower_output_dim", m.tower_output_dim);
    s.read("embedding_dim", m.embedding_dim);
    s.read("learning_rate", m.learning_rate);
    std::string optimizer(nn::to_string(m.optimizer));
    s.read("optimizer", optimizer);
    m.optimizer = nn::parse_optimizer(optimizer);
    s.finish();
  }

  if (const auto* p = root.child("pantheon")) {
    Section s(*p, root.path("pantheon"));
    auto& m = c.pantheon;
    std::string input(pantheon::to_string(m.input));
    std::string encoder(pantheon::to_string(m.encoder));
    std::string optimizer(nn::to_string(m.optimizer));
    s.read("input", input);
    s.read("encoder", encoder);
    s.read("mlp_dims", m.mlp_dims);
    s.read("learning_rate", m.learning_rate);
    s.read("optimizer", optimizer);
    s.read("debug_isolation_check", m.debug_isolation_check);
    s.finish();
    m.input = pantheon::parse_input_variant(input);
    m.encoder = pantheon::parse_encoder_variant(encoder);
    m.optimizer = nn::parse_optimizer(optimizer);
  }

  if (const auto* t = root.child("training")) {
    Section s(*t, root.path("training"));
    s.read("batch_size", c.training.batch_size);
    s.read("pretrain_steps", c.training.pretrain_steps);
    s.read("warmup_steps", c.training.warmup_steps);
    s.read("max_passes", c.training.max_passes);
    s.finish();
  }

  if (const auto* i = root.child("ippo")) {
    Section s(*i, root.path("ippo"));
    s.read("rounds", c.ippo.rounds);
    s.read("steps_per_round", c.ippo.steps_per_round);
    s.read("delta_scale", c.ippo.delta_scale);
    s.read("warm_start", c.ippo.warm_start);
    s.finish();
  }

  if (const auto* w = root.child("window")) {
    Section s(*w, root.path("window"));
    std::string policy(ippo::to_string(c.window.policy));
    s.read("policy", policy);
    s.read("size", c.window.size);
    s.finish();
    c.window.policy = ippo::parse_window_policy(policy);
  }

  if (const auto* f = root.child("formula")) {
    Section s(*f, root.path("formula"));
    if (const auto* m = s.child("multiplicative")) {
      c.formula.formula.multiplicative = terms_from_json(*m, s.path("multiplicative"));
    }
    if (const auto* a = s.child("additive")) {
      c.formula.formula.additive = terms_from_json(*a, s.path("additive"));
    }
    if (const auto* b = s.child("bounds")) {
      if (!b->is_object()) throw ConfigError(s.path("bounds") + ": expected an object");
      c.formula.formula.bounds.clear();
      for (const auto& [name, range] : b->items()) {
        if (!range.is_array() || range.size() != 2 || !range[0].is_number() ||
            !range[1].is_number()) {
          throw ConfigError(s.path("bounds") + "." + name + ": expected [lo, hi]");
        }
        c.formula.formula.bounds[name] = {range[0].get<double>(), range[1].get<double>()};
      }
    }
    s.read("eval_metric", c.formula.eval_metric_weights);
    s.read("budget", c.formula.budget);
    s.read("sweeps", c.formula.sweeps);
    s.read("golden_iterations", c.formula.golden_iterations);
    s.finish();
  }
  root.finish();
  c.validate();
  return c;
}

ordered_json to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir.string();
  j["objectives"] = rank::to_json(c.objectives);
  const auto& g = c.datagen;
  j["datagen"] = {{"n_users", g.n_users},
                  {"n_items", g.n_items},
                  {"latent_dim", g.latent_dim},
                  {"n_train", g.n_train},
                  {"n_eval", g.n_eval},
                  {"feature_noise", g.feature_noise},
                  {"activity_sigma", g.activity_sigma},
                  {"affinity_scale", g.affinity_scale},
                  {"shared_affinity", g.shared_affinity},
                  {"target_rates", g.target_rates},
                  {"calibration_samples", g.calibration_samples}};
  const auto& r = c.ranking;
  j["ranking"] = {{"n_experts", r.n_experts},
                  {"expert_hidden_dims", r.expert_hidden_dims},
                  {"tower_hidden_dims", r.tower_hidden_dims},
                  {"tower_output_dim", r.tower_output_dim},
                  {"embedding_dim", r.embedding_dim},
                  {"learning_rate", r.learning_rate},
                  {"optimizer", nn::to_string(r.optimizer)}};
  const auto& p = c.pantheon;
  j["pantheon"] = {{"input", pantheon::to_string(p.input)},
                   {"encoder", pantheon::to_string(p.encoder)},
                   {"mlp_dims", p.mlp_dims},
                   {"learning_rate", p.learning_rate},
                   {"optimizer", nn::to_string(p.optimizer)},
                   {"debug_isolation_check", p.debug_isolation_check}};
  j["training"] = {{"batch_size", c.training.batch_size},
                   {"pretrain_steps", c.training.pretrain_steps},
                   {"warmup_steps", c.training.warmup_steps},
                   {"max_passes", c.training.max_passes}};
  j["ippo"] = {{"rounds", c.ippo.rounds},
               {"steps_per_round", c.ippo.steps_per_round},
               {"delta_scale", c.ippo.delta_scale},
               {"warm_start", c.ippo.warm_start}};
  j["window"] = {{"policy", ippo::to_string(c.window.policy)}, {"size", c.window.size}};
  ordered_json bounds = ordered_json::object();
  for (const auto& [name, b] : c.formula.formula.bounds) bounds[name] = {b.lo, b.hi};
  j["formula"] = {{"multiplicative", terms_to_json(c.formula.formula.multiplicative)},
                  {"additive", terms_to_json(c.formula.formula.additive)},
                  {"bounds", bounds},
                  {"eval_metric", c.formula.eval_metric_weights},
                  {"budget", c.formula.budget},
                  {"sweeps", c.formula.sweeps},
                  {"golden_iterations", c.formula.golden_iterations}};
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact(path.string());
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace pfuse::experiment
