#pragma once

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccs/simulator.hpp"

namespace ccs {

// Configuration problem with the offending key path in the message.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

using json = nlohmann::json;

inline const json& section(const json& doc, const std::string& name, bool required) {
  static const json empty = json::object();
  if (!doc.contains(name)) {
    if (required) throw ConfigError(name + ": missing section");
    return empty;
  }
  if (!doc.at(name).is_object()) throw ConfigError(name + ": must be an object");
  return doc.at(name);
}

inline void reject_unknown(const json& sec, const std::string& name,
                           std::initializer_list<const char*> known) {
  for (auto it = sec.begin(); it != sec.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) { ok = true; break; }
    if (!ok) throw ConfigError(name + "." + it.key() + ": unknown key");
  }
}

template <typename T>
T require(const json& sec, const std::string& path, const char* key) {
  if (!sec.contains(key)) throw ConfigError(path + "." + key + ": missing required key");
  try {
    return sec.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

template <typename T>
T value_or(const json& sec, const std::string& path, const char* key, T def) {
  if (!sec.contains(key)) return def;
  try {
    return sec.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

}  // namespace detail

// Parses an experiment config file. The format is JSON with five sections
// (tree, codebook, channel, lasso, sweep) of flat keys; unknown keys are
// rejected and missing optional keys take the documented defaults.
inline ExperimentConfig load_config(const std::string& path) {
  using detail::json;
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": parse error: " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(path + ": top level must be an object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& k = it.key();
    if (k != "tree" && k != "codebook" && k != "channel" && k != "lasso" && k != "sweep")
      throw ConfigError(k + ": unknown section");
  }

  ExperimentConfig cfg;

  const json& tree = detail::section(doc, "tree", true);
  detail::reject_unknown(tree, "tree",
                         {"n", "J", "l", "B", "fade_prune", "fade_rel_tol",
                          "fade_check_delay", "max_paths", "root_policy", "keep_best_k"});
  int n = detail::require<int>(tree, "tree", "n");
  int j = detail::require<int>(tree, "tree", "J");
  auto l = detail::require<std::vector<int>>(tree, "tree", "l");
  int b_derived = 0;
  for (int li : l) b_derived += j - li;
  int b = detail::value_or<int>(tree, "tree", "B", b_derived);
  try {
    cfg.tree = TreeCodeParams(n, j, l, b);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("tree.l: ") + e.what());
  }
  cfg.fade.enabled = detail::value_or<bool>(tree, "tree", "fade_prune", false);
  cfg.fade.rel_tolerance = detail::value_or<double>(tree, "tree", "fade_rel_tol", 0.5);
  cfg.fade.check_delay = detail::value_or<bool>(tree, "tree", "fade_check_delay", false);
  cfg.max_paths = detail::value_or<std::size_t>(tree, "tree", "max_paths", std::size_t{1} << 14);
  std::string policy = detail::value_or<std::string>(tree, "tree", "root_policy", "unique");
  if (policy == "unique")
    cfg.root_policy = RootPolicy::kUniquePath;
  else if (policy == "all")
    cfg.root_policy = RootPolicy::kAllPaths;
  else
    throw ConfigError("tree.root_policy: must be \"unique\" or \"all\"");
  cfg.keep_best_k = detail::value_or<bool>(tree, "tree", "keep_best_k", false);

  const json& cbk = detail::section(doc, "codebook", true);
  detail::reject_unknown(cbk, "codebook", {"slot_length", "max_delay", "per_slot_rows"});
  cfg.slot_len = detail::require<int>(cbk, "codebook", "slot_length");
  cfg.max_delay = detail::value_or<int>(cbk, "codebook", "max_delay", 0);
  cfg.per_slot_codebooks = detail::value_or<bool>(cbk, "codebook", "per_slot_rows", false);

  const json& ch = detail::section(doc, "channel", true);
  detail::reject_unknown(ch, "channel",
                         {"model", "k_active", "k_total", "h_lower", "eta", "alpha", "noise_on"});
  std::string model = detail::require<std::string>(ch, "channel", "model");
  if (model == "I")
    cfg.channel.model = ChannelConfig::Model::kFadingI;
  else if (model == "II")
    cfg.channel.model = ChannelConfig::Model::kFadingII;
  else
    throw ConfigError("channel.model: must be \"I\" or \"II\"");
  cfg.k_active = detail::require<int>(ch, "channel", "k_active");
  if (ch.contains("k_total"))
    cfg.k_total = detail::require<std::uint64_t>(ch, "channel", "k_total");
  cfg.channel.h_lower = detail::value_or<double>(ch, "channel", "h_lower", 1.0);
  cfg.channel.eta = detail::value_or<double>(ch, "channel", "eta", 0.05);
  cfg.channel.alpha = detail::value_or<double>(ch, "channel", "alpha", 2.0);
  cfg.channel.noise_on = detail::value_or<bool>(ch, "channel", "noise_on", true);

  const json& lasso = detail::section(doc, "lasso", false);
  detail::reject_unknown(lasso, "lasso", {"lambda_scale", "max_iters", "tol", "debias"});
  cfg.lasso.lambda_scale = detail::value_or<double>(lasso, "lasso", "lambda_scale", 1.0);
  cfg.lasso.max_iters = detail::value_or<int>(lasso, "lasso", "max_iters", 1000);
  cfg.lasso.tol = detail::value_or<double>(lasso, "lasso", "tol", 1e-4);
  cfg.lasso.debias = detail::value_or<bool>(lasso, "lasso", "debias", true);

  const json& sweep = detail::section(doc, "sweep", true);
  detail::reject_unknown(sweep, "sweep", {"snr_db", "trials", "seed"});
  cfg.snr_db = detail::require<std::vector<double>>(sweep, "sweep", "snr_db");
  cfg.trials = detail::require<int>(sweep, "sweep", "trials");
  cfg.master_seed = detail::value_or<std::uint64_t>(sweep, "sweep", "seed", 1);

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

// Full resolved configuration (defaults included) for the run manifest.
inline nlohmann::json config_echo(const ExperimentConfig& cfg) {
  nlohmann::json doc;
  doc["tree"] = {
      {"n", cfg.tree.n},
      {"J", cfg.tree.J},
      {"l", cfg.tree.l},
      {"B", cfg.tree.B},
      {"fade_prune", cfg.fade.enabled},
      {"fade_rel_tol", cfg.fade.rel_tolerance},
      {"fade_check_delay", cfg.fade.check_delay},
      {"max_paths", cfg.max_paths},
      {"root_policy", cfg.root_policy == RootPolicy::kUniquePath ? "unique" : "all"},
      {"keep_best_k", cfg.keep_best_k},
  };
  doc["codebook"] = {
      {"slot_length", cfg.slot_len},
      {"max_delay", cfg.max_delay},
      {"per_slot_rows", cfg.per_slot_codebooks},
  };
  doc["channel"] = {
      {"model", cfg.channel.model == ChannelConfig::Model::kFadingI ? "I" : "II"},
      {"k_active", cfg.k_active},
      {"h_lower", cfg.channel.h_lower},
      {"eta", cfg.channel.eta},
      {"alpha", cfg.channel.alpha},
      {"noise_on", cfg.channel.noise_on},
  };
  if (cfg.k_total) doc["channel"]["k_total"] = *cfg.k_total;
  doc["lasso"] = {
      {"lambda_scale", cfg.lasso.lambda_scale},
      {"max_iters", cfg.lasso.max_iters},
      {"tol", cfg.lasso.tol},
      {"debias", cfg.lasso.debias},
  };
  doc["sweep"] = {
      {"snr_db", cfg.snr_db},
      {"trials", cfg.trials},
      {"seed", cfg.master_seed},
  };
  return doc;
}

}  // namespace ccs
