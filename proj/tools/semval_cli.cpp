// Command-line front end. Five subcommands share one JSON config:
//
//   exact       enumerate ground-truth labels for every context
//   gen-labels  one noisy estimate per context, in parallel
//   train       fit an amortized model to a label file
//   eval        score amortized predictions (and optionally the raw noisy
//               labels) against the exact table
//   verify      run the statistical self-checks and report pass/fail
//
// Outputs land in --out under fixed names; every invocation also copies the
// raw config bytes to run_config.json there. All outputs are deterministic
// given (config, seed): reruns and different worker counts produce identical
// bytes.
//
// Exit codes: 0 success, 2 config error, 3 numerical or resource failure,
// 4 verification failure.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "semval/amortize.hpp"
#include "semval/dataset.hpp"
#include "semval/errors.hpp"
#include "semval/estimators.hpp"
#include "semval/exact.hpp"
#include "semval/fingerprint.hpp"
#include "semval/games.hpp"
#include "semval/io.hpp"
#include "semval/math_util.hpp"
#include "semval/metrics.hpp"
#include "semval/parallel.hpp"
#include "semval/record.hpp"
#include "semval/retrain.hpp"
#include "semval/rng.hpp"
#include "semval/theory.hpp"
#include "semval/version.hpp"

namespace {

using json = nlohmann::json;
using namespace semval;

// --- config access -----------------------------------------------------------

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* a : allowed) {
      if (it.key() == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw InvalidArgument("config: unknown key '" + it.key() + "' in " + where);
    }
  }
}

json get_section(const json& cfg, const std::string& key) {
  if (!cfg.contains(key)) return json::object();
  const json& s = cfg.at(key);
  if (!s.is_object()) throw InvalidArgument("config: '" + key + "' must be an object");
  return s;
}

double get_num(const json& s, const char* key, double dflt) {
  if (!s.contains(key)) return dflt;
  const json& v = s.at(key);
  if (!v.is_number()) throw InvalidArgument(std::string("config: '") + key + "' must be a number");
  return v.get<double>();
}

int get_int(const json& s, const char* key, int dflt) {
  if (!s.contains(key)) return dflt;
  const json& v = s.at(key);
  if (!v.is_number_integer()) {
    throw InvalidArgument(std::string("config: '") + key + "' must be an integer");
  }
  return v.get<int>();
}

std::uint64_t get_u64(const json& s, const char* key, std::uint64_t dflt) {
  if (!s.contains(key)) return dflt;
  const json& v = s.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw InvalidArgument(std::string("config: '") + key + "' must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

bool get_bool(const json& s, const char* key, bool dflt) {
  if (!s.contains(key)) return dflt;
  const json& v = s.at(key);
  if (!v.is_boolean()) throw InvalidArgument(std::string("config: '") + key + "' must be a boolean");
  return v.get<bool>();
}

std::string get_str(const json& s, const char* key, const std::string& dflt) {
  if (!s.contains(key)) return dflt;
  const json& v = s.at(key);
  if (!v.is_string()) throw InvalidArgument(std::string("config: '") + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<int> get_int_list(const json& s, const char* key, std::vector<int> dflt) {
  if (!s.contains(key)) return dflt;
  const json& v = s.at(key);
  if (!v.is_array()) {
    throw InvalidArgument(std::string("config: '") + key + "' must be an integer array");
  }
  std::vector<int> out;
  for (const json& e : v) {
    if (!e.is_number_integer()) {
      throw InvalidArgument(std::string("config: '") + key + "' must be an integer array");
    }
    out.push_back(e.get<int>());
  }
  return out;
}

// --- task families -----------------------------------------------------------

bool is_feature_task(const std::string& task) {
  return task == "shapley" || task == "banzhaf" || task == "lime";
}

// tanh of a linear score. A purely linear predictor makes the masking game
// additive, which every sampling estimator nails with zero variance; the
// squashed score keeps the attribution problem honest.
class TanhPredictor : public Predictor {
 public:
  TanhPredictor(int input_dim, std::vector<double> w)
      : d_(input_dim),
        w_(std::move(w)),
        fingerprint_(fingerprint_doubles("tanh-predictor", w_)) {}
  int input_dim() const override { return d_; }
  int output_dim() const override { return 1; }
  void predict(const double* x, double* out) const override {
    double score = 0.0;
    for (int i = 0; i < d_; ++i) score += w_[static_cast<std::size_t>(i)] * x[i];
    out[0] = std::tanh(score);
  }
  std::string fingerprint() const override { return fingerprint_; }

 private:
  int d_;
  std::vector<double> w_;
  std::string fingerprint_;
};

bool is_retrain_task(const std::string& task) {
  return task == "data_shapley" || task == "distributional" || task == "datamodels";
}

std::string context_name(const char* prefix, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s-%04d", prefix, index);
  return buf;
}

// Everything a command needs to rebuild the estimand: the context list, the
// game behind each context, and a content fingerprint that label files carry
// so mismatched reuse is caught.
struct Family {
  std::string task;
  int label_dim = 0;
  std::string fingerprint;
  std::vector<ContextRecord> contexts;

  // feature attribution
  std::shared_ptr<const Predictor> predictor;
  double lime_width = 0.25;

  // retraining-backed tasks
  std::shared_ptr<RetrainValuer> valuer;
  std::optional<CooperativeGame> pool_game;  // data_shapley; copies share the eval counter
  std::vector<LabeledPoint> queries;         // distributional / datamodels
  double dm_q = 0.3;
  DatamodelsOutput dm_output = DatamodelsOutput::kPrediction;
  Dataset train_data;  // mislabel flags for eval

  CooperativeGame feature_game(int c) const {
    const std::vector<double>& x = contexts[static_cast<std::size_t>(c)].features;
    return make_feature_game(predictor, x, std::vector<double>(x.size(), 0.0), 0);
  }

  CooperativeGame datamodels_game(int c) const {
    return make_datamodels_game(valuer, queries[static_cast<std::size_t>(c)], dm_output);
  }
};

RetrainConfig parse_retrain_config(const json& game) {
  RetrainConfig rc;
  const std::string learner = get_str(game, "learner", "ridge");
  if (learner == "ridge") {
    rc.learner = LearnerKind::kRidge;
  } else if (learner == "logistic") {
    rc.learner = LearnerKind::kLogisticNewton;
  } else {
    throw InvalidArgument("config: learner must be 'ridge' or 'logistic', got '" + learner + "'");
  }
  rc.regularization = get_num(game, "regularization", 1e-3);
  rc.newton_steps = get_int(game, "newton_steps", 8);
  const std::string metric = get_str(game, "metric", "accuracy");
  if (metric == "accuracy") {
    rc.metric = HoldoutMetric::kAccuracy;
  } else if (metric == "negloss") {
    rc.metric = HoldoutMetric::kNegLoss;
  } else {
    throw InvalidArgument("config: metric must be 'accuracy' or 'negloss', got '" + metric + "'");
  }
  return rc;
}

ContextRecord retrain_context(const char* prefix, int index, const LabeledPoint& p,
                              bool classification) {
  ContextRecord ctx;
  ctx.id = context_name(prefix, index);
  ctx.features = p.x;
  ctx.features.push_back(p.y);
  ctx.class_index = classification ? static_cast<int>(std::lround(p.y)) : -1;
  return ctx;
}

Family build_family(const json& cfg) {
  const std::string task = get_str(cfg, "task", "");
  if (task.empty()) throw InvalidArgument("config: 'task' is required");
  const json game = get_section(cfg, "game");

  Family fam;
  fam.task = task;

  if (is_feature_task(task)) {
    check_keys(game, "game",
               {"players", "contexts", "predictor", "predictor_seed", "context_seed",
                "lime_width"});
    const int n = get_int(game, "players", 8);
    const int num_contexts = get_int(game, "contexts", 32);
    if (n < 1) throw InvalidArgument("config: players must be >= 1");
    if (num_contexts < 1) throw InvalidArgument("config: contexts must be >= 1");
    const std::uint64_t predictor_seed = get_u64(game, "predictor_seed", 1);
    const std::uint64_t context_seed = get_u64(game, "context_seed", 2);
    fam.lime_width = get_num(game, "lime_width", 0.25);
    if (task == "lime" && !(fam.lime_width > 0.0)) {
      throw InvalidArgument("config: lime_width must be positive");
    }

    Rng wr(predictor_seed);
    std::vector<double> w(static_cast<std::size_t>(n));
    for (double& v : w) v = wr.gauss() / std::sqrt(static_cast<double>(n));
    const std::string predictor = get_str(game, "predictor", "tanh");
    if (predictor == "tanh") {
      fam.predictor = std::make_shared<TanhPredictor>(n, std::move(w));
    } else if (predictor == "linear") {
      fam.predictor = std::make_shared<LinearPredictor>(n, 1, std::move(w), std::vector<double>{0.0});
    } else {
      throw InvalidArgument("config: predictor must be 'tanh' or 'linear', got '" + predictor +
                            "'");
    }

    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(num_contexts));
    for (int c = 0; c < num_contexts; ++c) {
      ContextRecord ctx;
      ctx.id = context_name("ctx", c);
      Rng cr(mix_seed(context_seed, static_cast<std::uint64_t>(c)));
      ctx.features.resize(static_cast<std::size_t>(n));
      for (double& v : ctx.features) v = cr.gauss();
      flat.insert(flat.end(), ctx.features.begin(), ctx.features.end());
      fam.contexts.push_back(std::move(ctx));
    }
    fam.label_dim = n;

    std::string text = task + "|" + fam.predictor->fingerprint() + "|" +
                       fingerprint_doubles("contexts", flat);
    if (task == "lime") text += "|width=" + format_double(fam.lime_width);
    fam.fingerprint = hex64(fnv1a64(text));
    return fam;
  }

  if (!is_retrain_task(task)) {
    throw InvalidArgument(
        "config: unknown task '" + task +
        "' (expected shapley, banzhaf, lime, data_shapley, distributional, datamodels)");
  }

  check_keys(game, "game",
             {"points", "dim", "spread", "flip_fraction", "data_seed", "holdout_points", "learner",
              "regularization", "newton_steps", "metric", "query_points", "query_seed", "q",
              "output"});
  const int points = get_int(game, "points", 40);
  const int dim = get_int(game, "dim", 5);
  const double spread = get_num(game, "spread", 1.0);
  const double flip_fraction = get_num(game, "flip_fraction", 0.2);
  const std::uint64_t data_seed = get_u64(game, "data_seed", 7);
  const int holdout_points = get_int(game, "holdout_points", 64);
  if (points < 1) throw InvalidArgument("config: points must be >= 1");
  if (dim < 1) throw InvalidArgument("config: dim must be >= 1");
  if (holdout_points < 1) throw InvalidArgument("config: holdout_points must be >= 1");

  fam.train_data = make_blobs(points, dim, spread, flip_fraction, data_seed);
  Dataset holdout = make_blobs(holdout_points, dim, spread, 0.0, data_seed + 1);
  fam.valuer =
      std::make_shared<RetrainValuer>(fam.train_data, std::move(holdout), parse_retrain_config(game));
  const bool classification = fam.valuer->classification();

  if (task == "data_shapley") {
    fam.pool_game = make_valuation_game(fam.valuer);
    for (int i = 0; i < points; ++i) {
      fam.contexts.push_back(retrain_context("point", i, fam.train_data.point(i), classification));
    }
    fam.label_dim = 1;
    fam.fingerprint = hex64(fnv1a64(task + "|" + fam.valuer->fingerprint()));
    return fam;
  }

  // External query points for the distributional and datamodels tasks, drawn
  // from the same blob generator with clean labels.
  const int query_points = get_int(game, "query_points", 16);
  if (query_points < 1) throw InvalidArgument("config: query_points must be >= 1");
  const std::uint64_t query_seed = get_u64(game, "query_seed", 11);
  Dataset query_data = make_blobs(query_points, dim, spread, 0.0, query_seed);
  std::vector<double> flat;
  for (int i = 0; i < query_points; ++i) {
    LabeledPoint p = query_data.point(i);
    fam.contexts.push_back(retrain_context("query", i, p, classification));
    flat.insert(flat.end(), p.x.begin(), p.x.end());
    flat.push_back(p.y);
    fam.queries.push_back(std::move(p));
  }

  std::string text =
      task + "|" + fam.valuer->fingerprint() + "|" + fingerprint_doubles("queries", flat);
  if (task == "distributional") {
    fam.label_dim = 1;
  } else {
    fam.label_dim = points;
    fam.dm_q = get_num(game, "q", 0.3);
    if (!(fam.dm_q >= 0.0 && fam.dm_q <= 1.0)) {
      throw InvalidArgument("config: q must lie in [0, 1]");
    }
    const std::string output = get_str(game, "output", "prediction");
    if (output == "prediction") {
      fam.dm_output = DatamodelsOutput::kPrediction;
    } else if (output == "loss") {
      fam.dm_output = DatamodelsOutput::kLoss;
    } else {
      throw InvalidArgument("config: output must be 'prediction' or 'loss', got '" + output + "'");
    }
    text += "|q=" + format_double(fam.dm_q) + "|output=" + output;
  }
  fam.fingerprint = hex64(fnv1a64(text));
  return fam;
}

// --- oracles -----------------------------------------------------------------

struct OracleConfig {
  std::string method;
  std::uint64_t samples = 64;
  SgdShapleyConfig sgd;
  int min_cardinality = 0;
  int max_cardinality = -1;
  bool with_replacement = true;
  bool paired = false;
};

OracleConfig parse_oracle(const json& cfg, const Family& fam) {
  const json o = get_section(cfg, "oracle");
  check_keys(o, "oracle",
             {"method", "samples", "iterations", "learning_rate", "minibatch", "paired",
              "min_cardinality", "max_cardinality", "with_replacement"});
  OracleConfig oc;
  oc.method = get_str(o, "method", "");
  if (oc.method.empty()) throw InvalidArgument("config: oracle.method is required");
  const std::uint64_t samples = get_u64(o, "samples", 64);
  if (samples < 1) throw InvalidArgument("config: oracle.samples must be >= 1");
  oc.samples = samples;
  oc.sgd.iterations = get_u64(o, "iterations", 100);
  oc.sgd.learning_rate = get_num(o, "learning_rate", 5e-4);
  oc.sgd.minibatch = get_int(o, "minibatch", 2);
  oc.sgd.paired = get_bool(o, "paired", true);
  oc.min_cardinality = get_int(o, "min_cardinality", 0);
  oc.max_cardinality = get_int(o, "max_cardinality", -1);
  oc.with_replacement = get_bool(o, "with_replacement", true);
  oc.paired = get_bool(o, "paired", false);

  static const std::vector<std::pair<std::string, std::vector<std::string>>> kAllowed = {
      {"shapley", {"permutation", "kernelshap", "sgd_shapley", "mc_semivalue"}},
      {"banzhaf", {"msr_banzhaf", "mc_semivalue"}},
      {"lime", {"lime"}},
      {"data_shapley", {"mc_semivalue"}},
      {"distributional", {"mc_distributional"}},
      {"datamodels", {"mc_datamodels"}},
  };
  for (const auto& [task, methods] : kAllowed) {
    if (task != fam.task) continue;
    if (std::find(methods.begin(), methods.end(), oc.method) != methods.end()) return oc;
    std::string allowed;
    for (const std::string& m : methods) {
      if (!allowed.empty()) allowed += ", ";
      allowed += m;
    }
    throw InvalidArgument("config: oracle.method '" + oc.method + "' does not apply to task '" +
                          fam.task + "' (allowed: " + allowed + ")");
  }
  throw InvalidArgument("config: no oracle methods for task '" + fam.task + "'");
}

SamplingPlan plan_from(const OracleConfig& oc) {
  SamplingPlan plan;
  plan.num_samples = oc.samples;
  plan.min_cardinality = oc.min_cardinality;
  plan.max_cardinality = oc.max_cardinality;
  plan.with_replacement = oc.with_replacement;
  plan.paired = oc.paired;
  return plan;
}

// Assembles a full per-player vector from scalar single-player estimates.
NoisyLabelRecord combine_player_records(const std::string& method, std::uint64_t num_samples,
                                        std::uint64_t seed, std::vector<NoisyLabelRecord> parts) {
  NoisyLabelRecord rec;
  rec.method = method;
  rec.num_samples = num_samples;
  rec.seed = seed;
  for (const NoisyLabelRecord& p : parts) {
    rec.label.push_back(p.label.at(0));
    rec.evals_used += p.evals_used;
    rec.biased = rec.biased || p.biased;
    rec.partial = rec.partial || p.partial;
  }
  return rec;
}

ContextOracle make_oracle(std::shared_ptr<const Family> fam, const OracleConfig& oc) {
  const std::string& task = fam->task;
  if (is_feature_task(task)) {
    if (oc.method == "permutation") {
      return [fam, oc](int i, std::uint64_t seed) {
        return permutation_sampling(fam->feature_game(i), oc.samples, seed);
      };
    }
    if (oc.method == "kernelshap") {
      return [fam, oc](int i, std::uint64_t seed) {
        return kernelshap(fam->feature_game(i), oc.samples, seed);
      };
    }
    if (oc.method == "sgd_shapley") {
      return [fam, oc](int i, std::uint64_t seed) {
        return sgd_shapley(fam->feature_game(i), oc.sgd, seed);
      };
    }
    if (oc.method == "msr_banzhaf") {
      return [fam, oc](int i, std::uint64_t seed) {
        return msr_banzhaf(fam->feature_game(i), oc.samples, seed);
      };
    }
    if (oc.method == "lime") {
      return [fam, oc](int i, std::uint64_t seed) {
        return lime_ls(fam->feature_game(i), oc.samples, fam->lime_width, seed);
      };
    }
    // mc_semivalue: one scalar estimate per player on a shared game instance.
    const SemivalueWeights weights =
        task == "banzhaf" ? banzhaf_weights(fam->label_dim) : shapley_weights(fam->label_dim);
    const SamplingPlan plan = plan_from(oc);
    return [fam, oc, weights, plan](int i, std::uint64_t seed) {
      const CooperativeGame game = fam->feature_game(i);
      std::vector<NoisyLabelRecord> parts;
      for (int p = 0; p < game.num_players(); ++p) {
        parts.push_back(
            mc_semivalue(game, p, weights, plan, mix_seed(seed, static_cast<std::uint64_t>(p))));
      }
      return combine_player_records(oc.method, oc.samples, seed, std::move(parts));
    };
  }
  if (task == "data_shapley") {
    const SemivalueWeights weights = shapley_weights(fam->valuer->num_points());
    const SamplingPlan plan = plan_from(oc);
    return [fam, plan, weights](int i, std::uint64_t seed) {
      return mc_semivalue(*fam->pool_game, i, weights, plan, seed);
    };
  }
  if (task == "distributional") {
    const SamplingPlan plan = plan_from(oc);
    return [fam, plan](int i, std::uint64_t seed) {
      return mc_distributional(*fam->valuer, fam->queries[static_cast<std::size_t>(i)], plan, seed);
    };
  }
  // datamodels: scalar per pool point, assembled into one vector label.
  return [fam, oc](int i, std::uint64_t seed) {
    const CooperativeGame game = fam->datamodels_game(i);
    std::vector<NoisyLabelRecord> parts;
    for (int p = 0; p < game.num_players(); ++p) {
      parts.push_back(mc_datamodels(game, p, fam->dm_q, oc.samples,
                                    mix_seed(seed, static_cast<std::uint64_t>(p))));
    }
    return combine_player_records(oc.method, oc.samples, seed, std::move(parts));
  };
}

// --- shared command plumbing -------------------------------------------------

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int workers = 1;
  bool list_only = false;  // verify --list
};

json load_config(const CommonOpts& opts, std::string* raw) {
  *raw = read_text_file(opts.config_path);
  json cfg = json::parse(*raw);
  if (!cfg.is_object()) throw InvalidArgument("config: top level must be a JSON object");
  check_keys(cfg, "the top level", {"task", "seed", "game", "oracle", "model", "train", "verify"});
  return cfg;
}

std::uint64_t resolve_seed(const CommonOpts& opts, const json& cfg) {
  if (opts.seed_given) return opts.seed;
  return get_u64(cfg, "seed", 1);
}

std::string out_path(const CommonOpts& opts, const char* name) {
  return (std::filesystem::path(opts.out_dir) / name).string();
}

void prepare_out_dir(const CommonOpts& opts, const std::string& raw_config) {
  std::filesystem::create_directories(opts.out_dir);
  write_text_file(out_path(opts, "run_config.json"), raw_config);
}

void validate_label_file(const LabelFile& file, const Family& fam, const std::string& path) {
  if (file.task != fam.task) {
    throw InvalidArgument(path + ": task '" + file.task + "' does not match config task '" +
                          fam.task + "'");
  }
  if (file.game_fingerprint != fam.fingerprint) {
    throw InvalidArgument(path + ": game fingerprint " + file.game_fingerprint +
                          " does not match the configured game " + fam.fingerprint);
  }
  if (file.label_dim != fam.label_dim) {
    throw InvalidArgument(path + ": label_dim " + std::to_string(file.label_dim) +
                          " does not match the configured " + std::to_string(fam.label_dim));
  }
  if (file.records.size() != fam.contexts.size()) {
    throw InvalidArgument(path + ": record count " + std::to_string(file.records.size()) +
                          " does not match the configured " + std::to_string(fam.contexts.size()) +
                          " contexts");
  }
  for (std::size_t i = 0; i < file.records.size(); ++i) {
    if (file.records[i].context_id != fam.contexts[i].id) {
      throw InvalidArgument(path + ": record " + std::to_string(i) + " is for context '" +
                            file.records[i].context_id + "', expected '" + fam.contexts[i].id +
                            "'");
    }
  }
}

// --- exact -------------------------------------------------------------------

std::uint64_t require_small_pool(int n, const char* what) {
  if (n > kMaxExactPlayers) {
    throw ResourceLimitError(std::string(what) + " supports at most " +
                             std::to_string(kMaxExactPlayers) + " players, got " +
                             std::to_string(n));
  }
  return std::uint64_t{1} << n;
}

int cmd_exact(const CommonOpts& opts) {
  std::string raw;
  const json cfg = load_config(opts, &raw);
  const Family fam = build_family(cfg);
  prepare_out_dir(opts, raw);

  LabelFile file;
  file.task = fam.task;
  file.game_fingerprint = fam.fingerprint;
  file.base_seed = 0;  // exact values are seed-free
  file.label_dim = fam.label_dim;
  file.records.resize(fam.contexts.size());

  if (is_feature_task(fam.task)) {
    file.method = fam.task == "shapley"   ? "exact_shapley"
                  : fam.task == "banzhaf" ? "exact_banzhaf"
                                          : "exact_lime";
    require_small_pool(fam.label_dim, "exact enumeration");
    parallel_for(static_cast<int>(fam.contexts.size()), opts.workers, [&](int c) {
      const CooperativeGame game = fam.feature_game(c);
      NoisyLabelRecord rec;
      rec.method = file.method;
      if (fam.task == "shapley") {
        rec.label = exact_shapley(game);
      } else if (fam.task == "banzhaf") {
        rec.label = exact_banzhaf(game);
      } else {
        rec.label = exact_weighted_ls(game, lime_ls_kernel(game.num_players(), fam.lime_width))
                        .coeffs;
      }
      rec.evals_used = game.evals();
      file.records[static_cast<std::size_t>(c)] = std::move(rec);
    });
  } else if (fam.task == "data_shapley") {
    file.method = "exact_shapley";
    require_small_pool(fam.valuer->num_points(), "exact enumeration");
    const std::vector<double> values = exact_shapley(*fam.pool_game);
    for (std::size_t c = 0; c < fam.contexts.size(); ++c) {
      file.records[c].method = file.method;
      file.records[c].label = {values[c]};
    }
  } else if (fam.task == "distributional") {
    // The estimand is defined by the sampling plan, so the oracle section is
    // read here too. Closed-form enumeration only exists for draws without
    // replacement: uniform cardinality, then a uniform subset of that size.
    file.method = "exact_distributional";
    const OracleConfig oc = parse_oracle(cfg, fam);
    if (oc.with_replacement) {
      throw InvalidArgument(
          "exact distributional values require oracle.with_replacement=false; sampling with "
          "replacement has no closed form here");
    }
    const int n = fam.valuer->num_points();
    require_small_pool(n, "exact enumeration");
    const int min_c = oc.min_cardinality;
    const int max_c = oc.max_cardinality < 0 ? n : oc.max_cardinality;
    if (min_c < 0 || min_c > max_c || max_c > n) {
      throw InvalidArgument("config: cardinality bounds must satisfy 0 <= min <= max <= points");
    }
    const std::uint32_t num_masks = std::uint32_t{1} << n;
    std::vector<double> base(num_masks, 0.0);
    std::vector<std::uint32_t> masks;
    for (std::uint32_t mask = 0; mask < num_masks; ++mask) {
      const int card = std::popcount(mask);
      if (card >= min_c && card <= max_c) masks.push_back(mask);
    }
    const auto rows_of = [n](std::uint32_t mask) {
      std::vector<int> rows;
      for (int i = 0; i < n; ++i) {
        if (mask & (std::uint32_t{1} << i)) rows.push_back(i);
      }
      return rows;
    };
    parallel_for(static_cast<int>(masks.size()), opts.workers, [&](int m) {
      base[masks[static_cast<std::size_t>(m)]] =
          fam.valuer->metric_value(rows_of(masks[static_cast<std::size_t>(m)]));
    });
    parallel_for(static_cast<int>(fam.contexts.size()), opts.workers, [&](int c) {
      const LabeledPoint& query = fam.queries[static_cast<std::size_t>(c)];
      std::vector<double> by_card(static_cast<std::size_t>(max_c - min_c + 1), 0.0);
      for (const std::uint32_t mask : masks) {
        const std::vector<int> rows = rows_of(mask);
        const double with = fam.valuer->metric_value(rows, &query);
        by_card[static_cast<std::size_t>(std::popcount(mask) - min_c)] += with - base[mask];
      }
      double value = 0.0;
      for (int card = min_c; card <= max_c; ++card) {
        value += by_card[static_cast<std::size_t>(card - min_c)] / binom(n, card);
      }
      value /= static_cast<double>(max_c - min_c + 1);
      NoisyLabelRecord rec;
      rec.method = file.method;
      rec.label = {value};
      rec.evals_used = masks.size();
      file.records[static_cast<std::size_t>(c)] = std::move(rec);
    });
  } else {
    file.method = "exact_datamodels";
    require_small_pool(fam.valuer->num_points(), "exact enumeration");
    parallel_for(static_cast<int>(fam.contexts.size()), opts.workers, [&](int c) {
      const CooperativeGame game = fam.datamodels_game(c);
      NoisyLabelRecord rec;
      rec.method = file.method;
      rec.label = exact_datamodels(game, fam.dm_q);
      rec.evals_used = game.evals();
      file.records[static_cast<std::size_t>(c)] = std::move(rec);
    });
  }

  std::uint64_t evals_total = 0;
  for (std::size_t c = 0; c < file.records.size(); ++c) {
    file.records[c].context_id = fam.contexts[c].id;
    evals_total += file.records[c].evals_used;
  }
  if (fam.task == "data_shapley") evals_total = fam.pool_game->evals();

  const std::string path = out_path(opts, "exact_labels.jsonl");
  save_label_file(path, file);
  std::cout << "exact: task=" << fam.task << " contexts=" << file.records.size()
            << " label_dim=" << fam.label_dim << " evals_total=" << evals_total << " -> " << path
            << "\n";
  return 0;
}

// --- gen-labels --------------------------------------------------------------

int cmd_gen_labels(const CommonOpts& opts) {
  std::string raw;
  const json cfg = load_config(opts, &raw);
  auto fam = std::make_shared<const Family>(build_family(cfg));
  const OracleConfig oc = parse_oracle(cfg, *fam);
  const std::uint64_t base_seed = resolve_seed(opts, cfg);
  prepare_out_dir(opts, raw);

  LabelFile file;
  file.task = fam->task;
  file.method = oc.method;
  file.game_fingerprint = fam->fingerprint;
  file.base_seed = base_seed;
  file.label_dim = fam->label_dim;
  file.records = build_label_dataset(fam->contexts, make_oracle(fam, oc), base_seed, opts.workers);

  std::uint64_t evals_total = 0;
  std::size_t failures = 0;
  for (const NoisyLabelRecord& rec : file.records) {
    evals_total += rec.evals_used;
    if (rec.failed) {
      ++failures;
      std::cerr << "gen-labels: context " << rec.context_id << " failed: " << rec.error << "\n";
    }
  }

  const std::string path = out_path(opts, "labels.jsonl");
  save_label_file(path, file);
  std::cout << "gen-labels: task=" << fam->task << " method=" << oc.method
            << " contexts=" << file.records.size() << " failed=" << failures
            << " evals_total=" << evals_total << " -> " << path << "\n";
  if (!file.records.empty() && failures == file.records.size()) {
    std::cerr << "gen-labels: every context failed\n";
    return 3;
  }
  return 0;
}

// --- train -------------------------------------------------------------------

PreprocessMode parse_preprocess(const std::string& name) {
  if (name == "none") return PreprocessMode::kNone;
  if (name == "global_std") return PreprocessMode::kGlobalStdRescale;
  if (name == "unit_norm") return PreprocessMode::kPerLabelUnitNorm;
  throw InvalidArgument("config: preprocess must be 'none', 'global_std' or 'unit_norm', got '" +
                        name + "'");
}

int cmd_train(const CommonOpts& opts) {
  std::string raw;
  const json cfg = load_config(opts, &raw);
  const Family fam = build_family(cfg);
  const std::uint64_t base_seed = resolve_seed(opts, cfg);

  const std::string labels_path = out_path(opts, "labels.jsonl");
  const LabelFile labels = load_label_file(labels_path);
  validate_label_file(labels, fam, labels_path);

  const json model = get_section(cfg, "model");
  check_keys(model, "model", {"kind", "hidden", "use_bias", "per_class_head"});
  ModelConfig mc;
  const std::string kind = get_str(model, "kind", "linear");
  if (kind == "linear") {
    mc.kind = ModelKind::kLinear;
  } else if (kind == "mlp") {
    mc.kind = ModelKind::kMlp;
  } else {
    throw InvalidArgument("config: model.kind must be 'linear' or 'mlp', got '" + kind + "'");
  }
  mc.input_dim = static_cast<int>(fam.contexts.front().features.size());
  mc.hidden = get_int(model, "hidden", 64);
  mc.use_bias = get_bool(model, "use_bias", false);
  mc.per_class_head = get_bool(model, "per_class_head", false);
  if (mc.per_class_head) {
    if (fam.label_dim != 1) {
      throw InvalidArgument("config: per_class_head requires scalar labels");
    }
    int num_classes = 0;
    for (const ContextRecord& ctx : fam.contexts) {
      if (ctx.class_index < 0) {
        throw InvalidArgument("config: per_class_head requires a class for every context");
      }
      num_classes = std::max(num_classes, ctx.class_index + 1);
    }
    mc.output_dim = num_classes;
  } else {
    mc.output_dim = fam.label_dim;
  }

  const json train = get_section(cfg, "train");
  check_keys(train, "train",
             {"epochs", "batch_size", "learning_rate", "momentum", "val_fraction", "preprocess"});
  TrainConfig tc;
  tc.epochs = get_int(train, "epochs", 200);
  tc.batch_size = get_int(train, "batch_size", 32);
  tc.learning_rate = get_num(train, "learning_rate", 1e-2);
  tc.momentum = get_num(train, "momentum", 0.9);
  tc.val_fraction = get_num(train, "val_fraction", 0.2);
  tc.preprocess = parse_preprocess(get_str(train, "preprocess", "none"));
  tc.seed = mix_seed(base_seed, "train");

  const TrainResult result = train_regression(fam.contexts, labels.records, mc, tc);
  prepare_out_dir(opts, raw);

  Checkpoint ckpt;
  ckpt.model = result.model;
  ckpt.meta["task"] = fam.task;
  ckpt.meta["method"] = labels.method;
  ckpt.meta["game_fingerprint"] = fam.fingerprint;
  ckpt.meta["base_seed"] = std::to_string(base_seed);
  ckpt.meta["label_dim"] = std::to_string(fam.label_dim);
  ckpt.meta["best_epoch"] = std::to_string(result.best_epoch);
  ckpt.meta["best_val_loss"] = format_double(result.best_val_loss);
  ckpt.meta["used_records"] = std::to_string(result.used_records);
  ckpt.meta["skipped_records"] = std::to_string(result.skipped_contexts.size());
  ckpt.meta["labels_biased"] = result.labels_biased ? "true" : "false";
  const std::string ckpt_path = out_path(opts, "checkpoint.json");
  save_checkpoint(ckpt_path, ckpt);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t e = 0; e < result.train_curve.size(); ++e) {
    rows.push_back({std::to_string(e), format_double(result.train_curve[e]),
                    format_double(result.val_curve[e])});
  }
  write_csv(out_path(opts, "train_log.csv"), {"epoch", "train_loss", "val_loss"}, rows);

  std::cout << "train: task=" << fam.task << " records=" << result.used_records << "/"
            << labels.records.size() << " best_epoch=" << result.best_epoch
            << " best_val_loss=" << format_double(result.best_val_loss) << " -> " << ckpt_path
            << "\n";
  return 0;
}

// --- eval --------------------------------------------------------------------

std::string opt_cell(const std::optional<double>& v) {
  return v.has_value() ? format_double(*v) : std::string();
}

std::vector<std::string> metric_row(const std::string& source, const std::string& mode,
                                    const MetricReport& r) {
  return {source,
          mode,
          format_double(r.mse),
          opt_cell(r.mse_normalized),
          opt_cell(r.pearson),
          opt_cell(r.spearman),
          format_double(r.sign_agreement),
          opt_cell(r.auroc),
          opt_cell(r.aupr),
          opt_cell(r.negative_fraction),
          std::to_string(r.evals_total),
          std::to_string(r.num_examples),
          std::to_string(r.label_dim),
          std::to_string(r.num_missing)};
}

int cmd_eval(const CommonOpts& opts) {
  std::string raw;
  const json cfg = load_config(opts, &raw);
  const Family fam = build_family(cfg);

  const std::string exact_path = out_path(opts, "exact_labels.jsonl");
  const LabelFile exact = load_label_file(exact_path);
  validate_label_file(exact, fam, exact_path);
  std::vector<std::vector<double>> truth;
  for (const NoisyLabelRecord& rec : exact.records) {
    if (rec.failed) throw InvalidArgument(exact_path + ": contains failed records");
    truth.push_back(rec.label);
  }

  const std::string ckpt_path = out_path(opts, "checkpoint.json");
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const auto meta_task = ckpt.meta.find("task");
  if (meta_task != ckpt.meta.end() && meta_task->second != fam.task) {
    throw InvalidArgument(ckpt_path + ": trained for task '" + meta_task->second +
                          "', config says '" + fam.task + "'");
  }
  const auto meta_fp = ckpt.meta.find("game_fingerprint");
  if (meta_fp != ckpt.meta.end() && meta_fp->second != fam.fingerprint) {
    throw InvalidArgument(ckpt_path + ": trained against game " + meta_fp->second +
                          ", config builds " + fam.fingerprint);
  }
  if (static_cast<int>(fam.contexts.front().features.size()) != ckpt.model.cfg.input_dim) {
    throw InvalidArgument(ckpt_path + ": model input width does not match the configured contexts");
  }
  if (!ckpt.model.cfg.per_class_head && ckpt.model.cfg.output_dim != fam.label_dim) {
    throw InvalidArgument(ckpt_path + ": model output width does not match the configured labels");
  }

  std::vector<std::vector<double>> estimates(fam.contexts.size());
  for (std::size_t i = 0; i < fam.contexts.size(); ++i) {
    const std::vector<double> out = ckpt.model.predict(fam.contexts[i].features);
    if (ckpt.model.cfg.per_class_head) {
      const int cls = fam.contexts[i].class_index;
      if (cls < 0 || cls >= ckpt.model.cfg.output_dim) {
        throw InvalidArgument("eval: context " + fam.contexts[i].id +
                              " has no class for the per-class head");
      }
      estimates[i] = {out[static_cast<std::size_t>(cls)]};
    } else {
      estimates[i] = out;
    }
  }

  // Noisy labels are optional at eval time; when present their generation cost
  // is charged to the amortized rows too, since training consumed them.
  std::optional<LabelFile> labels;
  const std::string labels_path = out_path(opts, "labels.jsonl");
  if (std::filesystem::exists(labels_path)) {
    labels = load_label_file(labels_path);
    validate_label_file(*labels, fam, labels_path);
  }
  std::uint64_t label_evals = 0;
  if (labels.has_value()) {
    for (const NoisyLabelRecord& rec : labels->records) label_evals += rec.evals_used;
  }

  const bool has_flags = fam.task == "data_shapley" && !fam.train_data.flipped.empty();
  std::vector<bool> flags;
  if (has_flags) {
    for (std::size_t i = 0; i < fam.contexts.size(); ++i) {
      flags.push_back(fam.train_data.flipped[i] != 0);
    }
  }
  const bool both_classes =
      has_flags && std::find(flags.begin(), flags.end(), true) != flags.end() &&
      std::find(flags.begin(), flags.end(), false) != flags.end();

  const auto attach_ranking = [&](MetricReport* report, const std::vector<double>& scores,
                                  const std::vector<bool>& point_flags) {
    const bool any = std::find(point_flags.begin(), point_flags.end(), true) != point_flags.end();
    if (both_classes && any) {
      report->auroc = auroc_mislabeled(scores, point_flags);
      report->aupr = aupr_mislabeled(scores, point_flags);
    }
    if (any) report->negative_fraction = negative_fraction(scores, point_flags);
  };

  std::vector<std::vector<std::string>> rows;
  MetricReport amort = compare(estimates, truth, CorrelationMode::kGlobal, label_evals);
  if (has_flags) {
    std::vector<double> scores;
    for (const std::vector<double>& e : estimates) scores.push_back(e.at(0));
    attach_ranking(&amort, scores, flags);
  }
  rows.push_back(metric_row("amortized", "global", amort));
  if (fam.label_dim > 1) {
    rows.push_back(metric_row(
        "amortized", "per_example",
        compare(estimates, truth, CorrelationMode::kPerExample, label_evals)));
  }

  if (labels.has_value()) {
    MetricReport noisy = compare(labels->records, truth, CorrelationMode::kGlobal);
    if (has_flags) {
      // Failed records carry no usable score; rank only the rest.
      std::vector<double> scores;
      std::vector<bool> present_flags;
      for (std::size_t i = 0; i < labels->records.size(); ++i) {
        if (labels->records[i].failed) continue;
        scores.push_back(labels->records[i].label.at(0));
        present_flags.push_back(flags[i]);
      }
      attach_ranking(&noisy, scores, present_flags);
    }
    rows.push_back(metric_row("labels", "global", noisy));
    if (fam.label_dim > 1) {
      rows.push_back(metric_row("labels", "per_example",
                                compare(labels->records, truth, CorrelationMode::kPerExample)));
    }
  }

  prepare_out_dir(opts, raw);
  const std::string metrics_path = out_path(opts, "metrics.csv");
  write_csv(metrics_path,
            {"source", "mode", "mse", "mse_normalized", "pearson", "spearman", "sign_agreement",
             "auroc", "aupr", "negative_fraction", "evals_total", "num_examples", "label_dim",
             "num_missing"},
            rows);

  std::cout << "eval: task=" << fam.task << " examples=" << amort.num_examples
            << " amortized_mse=" << format_double(amort.mse);
  if (amort.pearson.has_value()) std::cout << " pearson=" << format_double(*amort.pearson);
  std::cout << " -> " << metrics_path << "\n";
  return 0;
}

// --- verify ------------------------------------------------------------------

struct VerifyRow {
  std::string check;
  bool pass = false;
  std::string observed;
  std::string limit;
  std::string detail;
};

const std::vector<std::string>& verify_inventory() {
  static const std::vector<std::string> kChecks = {
      "sgd_convergence_noisy", "sgd_convergence_noiseless", "oracle_bias_flag",
      "sandwich_unbiased",     "sandwich_biased",           "convexity",
  };
  return kChecks;
}

int cmd_verify(const CommonOpts& opts) {
  if (opts.list_only) {
    for (const std::string& name : verify_inventory()) std::cout << name << "\n";
    return 0;
  }

  std::string raw = "{}\n";
  json cfg = json::object();
  if (!opts.config_path.empty()) cfg = load_config(opts, &raw);
  const json v = get_section(cfg, "verify");
  check_keys(v, "verify",
             {"runs", "step_grid", "contexts", "draws", "dim", "sigma", "offset", "models",
              "inject_bias"});
  const std::uint64_t seed = resolve_seed(opts, cfg);
  const int runs = get_int(v, "runs", 200);
  const std::vector<int> step_grid = get_int_list(v, "step_grid", {10, 100, 1000});
  const int num_contexts = get_int(v, "contexts", 60);
  const int draws = get_int(v, "draws", 50);
  const int dim = get_int(v, "dim", 3);
  const double sigma = get_num(v, "sigma", 1.0);
  const double offset = get_num(v, "offset", 0.5);
  const int models = get_int(v, "models", 10);
  // Deliberately corrupts the oracle that the flag check expects to be clean;
  // the run must then fail, which is itself worth testing end to end.
  const bool inject_bias = get_bool(v, "inject_bias", false);
  if (num_contexts < 2 || draws < 2 || dim < 1 || models < 1) {
    throw InvalidArgument("config: verify fixture sizes are too small");
  }

  std::vector<VerifyRow> rows;
  const auto add = [&rows](const std::string& check, bool pass, const std::string& observed,
                           const std::string& limit, const std::string& detail) {
    rows.push_back({check, pass, observed, limit, detail});
  };

  // Averaged projected SGD against its excess-loss guarantee, noisy and
  // noiseless, plus the 1/T decay rate on the noisy grid.
  for (const double s : {sigma, 0.0}) {
    const std::string check = s > 0.0 ? "sgd_convergence_noisy" : "sgd_convergence_noiseless";
    SgdConvergenceConfig sc;
    sc.sigma = s;
    sc.runs = runs;
    sc.step_grid = step_grid;
    sc.base_seed = mix_seed(seed, s > 0.0 ? "sgd-noisy" : "sgd-noiseless");
    sc.workers = opts.workers;
    const std::vector<SgdConvergenceRow> result = run_sgd_convergence_experiment(sc);
    std::vector<double> xs, ys;
    for (const SgdConvergenceRow& row : result) {
      add(check, row.empirical_excess <= row.bound, format_double(row.empirical_excess),
          format_double(row.bound), "steps=" + std::to_string(row.steps));
      xs.push_back(static_cast<double>(row.steps));
      ys.push_back(row.empirical_excess);
    }
    if (s > 0.0 && result.size() >= 2) {
      const double slope = fit_loglog_slope(xs, ys);
      add(check, slope >= -1.3 && slope <= -0.7, format_double(slope), "[-1.3,-0.7]",
          "loglog_slope");
    }
    if (s == sigma && sigma == 0.0) break;  // noiseless config: one pass is the whole story
  }

  // Bias/noise estimation on a Gaussian oracle, with and without a constant
  // offset. The first oracle is clean unless the config injects bias.
  std::vector<std::vector<double>> targets(static_cast<std::size_t>(num_contexts));
  const std::uint64_t target_seed = mix_seed(seed, "targets");
  for (int c = 0; c < num_contexts; ++c) {
    Rng rng(mix_seed(target_seed, static_cast<std::uint64_t>(c)));
    targets[static_cast<std::size_t>(c)].resize(static_cast<std::size_t>(dim));
    for (double& t : targets[static_cast<std::size_t>(c)]) t = rng.gauss();
  }
  const ExactFn exact = [&targets](int c) { return targets[static_cast<std::size_t>(c)]; };
  const auto oracle_with_offset = [&targets, dim, sigma](double shift) {
    return [&targets, dim, sigma, shift](int c, std::uint64_t draw_seed) {
      Rng rng(draw_seed);
      std::vector<double> out = targets[static_cast<std::size_t>(c)];
      for (int k = 0; k < dim; ++k) {
        out[static_cast<std::size_t>(k)] += shift + sigma * rng.gauss();
      }
      return out;
    };
  };
  const OracleStats clean =
      estimate_bias_noise(oracle_with_offset(inject_bias ? offset : 0.0), exact, num_contexts,
                          draws, mix_seed(seed, "draws-clean"), opts.workers);
  const OracleStats shifted = estimate_bias_noise(
      oracle_with_offset(offset), exact, num_contexts, draws, mix_seed(seed, "draws-shifted"),
      opts.workers);
  add("oracle_bias_flag", !clean.flagged_biased, format_double(clean.bias_hat), "no flag",
      "clean oracle");
  add("oracle_bias_flag", shifted.flagged_biased && shifted.bias_hat > 0.0,
      format_double(shifted.bias_hat), "flag", "offset oracle");

  // Loss sandwich for a ladder of models from perfect to far off, against both
  // oracles. The equality refinement only binds when the oracle is clean.
  const auto sandwich_rows = [&](const std::string& check, const OracleStats& stats,
                                 bool expect_equality) {
    int holds = 0;
    int equality = 0;
    int applicable = 0;
    for (int j = 0; j < models; ++j) {
      Rng rng(mix_seed(mix_seed(seed, "sandwich-model"), static_cast<std::uint64_t>(j)));
      const double scale = 0.5 * static_cast<double>(j);
      std::vector<std::vector<double>> preds = targets;
      for (std::vector<double>& p : preds) {
        for (double& x : p) x += scale * rng.gauss();
      }
      const SandwichReport rep = check_sandwich(preds, stats, targets);
      if (rep.sandwich_holds) ++holds;
      if (rep.equality_applicable) {
        ++applicable;
        if (rep.equality_holds) ++equality;
      }
    }
    add(check, holds == models, std::to_string(holds), std::to_string(models),
        "models with both bounds holding");
    if (expect_equality) {
      add(check, applicable == models && equality == models, std::to_string(equality),
          std::to_string(models), "models with the noisy-loss identity holding");
    } else {
      add(check, applicable == 0, std::to_string(applicable), "0",
          "models where the identity was wrongly applied despite bias");
    }
  };
  sandwich_rows("sandwich_unbiased", clean, !inject_bias);
  sandwich_rows("sandwich_biased", shifted, false);

  // Quadratic objective sandwich: isotropic curvature pins the objective to
  // the regression loss; anisotropic curvature only brackets it.
  {
    Rng rng(mix_seed(seed, "convexity"));
    std::vector<std::vector<double>> truth(static_cast<std::size_t>(num_contexts));
    std::vector<std::vector<double>> preds(static_cast<std::size_t>(num_contexts));
    for (int c = 0; c < num_contexts; ++c) {
      truth[static_cast<std::size_t>(c)].resize(3);
      preds[static_cast<std::size_t>(c)].resize(3);
      for (int k = 0; k < 3; ++k) {
        truth[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)] = rng.gauss();
        preds[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)] =
            truth[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)] + rng.gauss();
      }
    }
    const std::vector<double> iso = {2, 0, 0, 0, 2, 0, 0, 0, 2};
    const ConvexityReport r1 = check_convexity_sandwich(iso, 3, preds, truth);
    const double gap = std::abs(r1.l_obj - r1.l_reg);
    add("convexity", r1.holds && gap <= 1e-9 * std::max(1.0, r1.l_reg), format_double(gap),
        "<= 1e-9 relative", "isotropic curvature ties objective to loss");
    const std::vector<double> aniso = {1, 0, 0, 0, 2, 0, 0, 0, 4};
    const ConvexityReport r2 = check_convexity_sandwich(aniso, 3, preds, truth);
    add("convexity", r2.holds, format_double(r2.l_obj), "within [a/2,b/2] * loss",
        "anisotropic curvature brackets the objective");
  }

  prepare_out_dir(opts, raw);
  std::vector<std::vector<std::string>> csv_rows;
  int failures = 0;
  for (const VerifyRow& row : rows) {
    if (!row.pass) ++failures;
    csv_rows.push_back(
        {row.check, row.pass ? "pass" : "fail", row.observed, row.limit, row.detail});
    std::cout << (row.pass ? "pass" : "FAIL") << "  " << row.check << "  " << row.detail
              << " (observed " << row.observed << ", limit " << row.limit << ")\n";
  }
  const std::string report_path = out_path(opts, "verify_report.csv");
  write_csv(report_path, {"check", "status", "observed", "limit", "detail"}, csv_rows);
  std::cout << "verify: " << rows.size() << " checks, " << failures << " failed -> " << report_path
            << "\n";
  return failures == 0 ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic amortization of semivalue and data-valuation labels"};
  app.set_version_flag("--version", std::string("semval ") + kVersion);
  app.require_subcommand(1);

  CommonOpts opts;
  const auto add_common = [&opts](CLI::App* sub, bool config_required) {
    CLI::Option* c = sub->add_option("--config", opts.config_path, "JSON config file");
    if (config_required) c->required();
    sub->add_option("--out", opts.out_dir, "output directory (created if missing)");
    sub->add_option("--seed", opts.seed, "base seed, overrides the config")
        ->each([&opts](const std::string&) { opts.seed_given = true; });
    sub->add_option("--workers", opts.workers, "worker threads")->check(CLI::PositiveNumber);
  };

  CLI::App* exact = app.add_subcommand("exact", "enumerate exact labels for every context");
  add_common(exact, true);
  CLI::App* gen = app.add_subcommand("gen-labels", "draw one noisy label per context");
  add_common(gen, true);
  CLI::App* train = app.add_subcommand("train", "fit an amortized model to labels.jsonl");
  add_common(train, true);
  CLI::App* eval = app.add_subcommand("eval", "score predictions against exact_labels.jsonl");
  add_common(eval, true);
  CLI::App* verify = app.add_subcommand("verify", "run the statistical self-checks");
  add_common(verify, false);
  verify->add_flag("--list", opts.list_only, "print the check inventory and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (exact->parsed()) return cmd_exact(opts);
    if (gen->parsed()) return cmd_gen_labels(opts);
    if (train->parsed()) return cmd_train(opts);
    if (eval->parsed()) return cmd_eval(opts);
    return cmd_verify(opts);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ResourceLimitError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
