#include "stochograd/experiments/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>

namespace stochograd {

using nlohmann::json;

namespace {

struct Field {
  std::string key;
  std::function<void(const ExperimentConfig&, json&)> put;
  /// Returns false on a type mismatch.
  std::function<bool(const json&, ExperimentConfig&)> get;
};

template <class T>
Field field(std::string key, T ExperimentConfig::*member) {
  Field f;
  f.key = key;
  f.put = [key, member](const ExperimentConfig& c, json& j) { j[key] = c.*member; };
  f.get = [member](const json& v, ExperimentConfig& c) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) return false;
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) return false;
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) return false;
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) return false;
    } else {
      if (!v.is_number_integer()) return false;
    }
    c.*member = v.get<T>();
    return true;
  };
  return f;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = [] {
    std::vector<Field> f{
        field("experiment", &ExperimentConfig::experiment),
        field("d", &ExperimentConfig::d),
        field("kappa", &ExperimentConfig::kappa),
        field("n_spikes", &ExperimentConfig::n_spikes),
        field("size", &ExperimentConfig::size),
        field("angles", &ExperimentConfig::angles),
        field("noise", &ExperimentConfig::noise),
        field("noise_sigma", &ExperimentConfig::noise_sigma),
        field("I0", &ExperimentConfig::I0),
        field("attenuation", &ExperimentConfig::attenuation),
        field("reg", &ExperimentConfig::reg),
        field("reg2", &ExperimentConfig::reg2),
        field("algorithm", &ExperimentConfig::algorithm),
        field("n_subsets", &ExperimentConfig::n_subsets),
        field("partition", &ExperimentConfig::partition),
        field("sampler", &ExperimentConfig::sampler),
        field("tau", &ExperimentConfig::tau),
        field("sigma", &ExperimentConfig::sigma),
        field("schedule", &ExperimentConfig::schedule),
        field("decay_c", &ExperimentConfig::decay_c),
        field("decay_power", &ExperimentConfig::decay_power),
        field("momentum", &ExperimentConfig::momentum),
        field("restart", &ExperimentConfig::restart),
        field("saga_form", &ExperimentConfig::saga_form),
        field("svrg_inner", &ExperimentConfig::svrg_inner),
        field("loopless_p", &ExperimentConfig::loopless_p),
        field("eta_rule", &ExperimentConfig::eta_rule),
        field("eta", &ExperimentConfig::eta),
        field("rho", &ExperimentConfig::rho),
        field("gamma", &ExperimentConfig::gamma),
        field("adaptive", &ExperimentConfig::adaptive),
        field("warm_start_passes", &ExperimentConfig::warm_start_passes),
        field("allow_large_step", &ExperimentConfig::allow_large_step),
        field("tv_iters", &ExperimentConfig::tv_iters),
        field("budget_passes", &ExperimentConfig::budget_passes),
        field("tol", &ExperimentConfig::tol),
        field("log_every", &ExperimentConfig::log_every),
        field("seed", &ExperimentConfig::seed),
        field("out_dir", &ExperimentConfig::out_dir),
        field("record_wall_time", &ExperimentConfig::record_wall_time),
        field("reference_passes", &ExperimentConfig::reference_passes),
        field("reference_tol", &ExperimentConfig::reference_tol),
        field("noise_spacing", &ExperimentConfig::noise_spacing),
    };
    Field target;
    target.key = "target_rel_dist";
    target.put = [](const ExperimentConfig& c, json& j) {
      j["target_rel_dist"] = c.target_rel_dist ? json(*c.target_rel_dist) : json(nullptr);
    };
    target.get = [](const json& v, ExperimentConfig& c) {
      if (v.is_null()) {
        c.target_rel_dist.reset();
        return true;
      }
      if (!v.is_number()) return false;
      c.target_rel_dist = v.get<double>();
      return true;
    };
    f.push_back(std::move(target));
    return f;
  }();
  return all;
}

bool one_of(const std::string& v, std::initializer_list<const char*> options) {
  return std::any_of(options.begin(), options.end(), [&](const char* o) { return v == o; });
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"spikes-deblur", "ct-shepp-logan", "denoise-tv", "denoise-tgv",
                                              "tridiag-ls"};
  return names;
}

const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names{
      "gd",   "nag",  "pgd",  "fista", "pdhg",          "admm",     "condat-vu", "pd3o",     "cd",
      "sgd",  "sag",  "saga", "svrg",  "loopless-svrg", "acc-saga", "acc-svrg",  "spdhg",    "diag-accum",
      "adam"};
  return names;
}

json to_json(const ExperimentConfig& cfg) {
  json j = json::object();
  for (const Field& f : fields()) f.put(cfg, j);
  return j;
}

ExperimentConfig config_from_json(const json& j, const ExperimentConfig& base) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object", {"<root>"});
  ExperimentConfig cfg = base;
  std::vector<std::string> bad;
  for (const auto& [key, value] : j.items()) {
    const auto& all = fields();
    auto it = std::find_if(all.begin(), all.end(), [&](const Field& f) { return f.key == key; });
    if (it == all.end() || !it->get(value, cfg)) bad.push_back(key);
  }
  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    for (const auto& k : e.keys)
      if (std::find(bad.begin(), bad.end(), k) == bad.end()) bad.push_back(k);
  }
  if (!bad.empty()) throw ConfigError("unknown keys, wrong value types or invalid values", bad);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path, {"--config"});
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what(), {"<root>"});
  }
  return config_from_json(j);
}

void validate(const ExperimentConfig& c) {
  std::vector<std::string> bad;
  auto check = [&](bool ok, const char* key) {
    if (!ok) bad.emplace_back(key);
  };
  const auto& ex = experiment_names();
  const auto& al = algorithm_names();
  check(std::find(ex.begin(), ex.end(), c.experiment) != ex.end(), "experiment");
  check(std::find(al.begin(), al.end(), c.algorithm) != al.end(), "algorithm");
  check(c.d >= 1, "d");
  check(c.kappa >= 1 && c.kappa % 2 == 1 && c.kappa <= c.d, "kappa");
  check(c.n_spikes >= 0 && c.n_spikes <= c.d, "n_spikes");
  check(c.size >= 16, "size");
  check(c.angles >= 1, "angles");
  check(one_of(c.noise, {"gaussian", "beer-lambert", "none"}), "noise");
  check(c.noise_sigma >= 0.0, "noise_sigma");
  check(c.I0 > 0.0, "I0");
  check(c.attenuation >= 0.0, "attenuation");
  check(c.n_subsets >= 1, "n_subsets");
  check(one_of(c.partition, {"staggered", "contiguous"}), "partition");
  check(one_of(c.sampler, {"uniform", "permutation", "cyclic", "herman-meyer", "importance"}), "sampler");
  check(c.tau >= 0.0, "tau");
  check(c.sigma >= 0.0, "sigma");
  check(one_of(c.schedule, {"constant", "sgd-decay"}), "schedule");
  check(c.decay_c >= 0.0, "decay_c");
  check(c.decay_power > 0.0, "decay_power");
  check(one_of(c.momentum, {"none", "fista", "constant", "nag-sc"}), "momentum");
  check(one_of(c.restart, {"off", "function-value", "gradient"}), "restart");
  check(one_of(c.saga_form, {"standard", "modified"}), "saga_form");
  check(c.svrg_inner >= 0, "svrg_inner");
  check(c.loopless_p >= 0.0 && c.loopless_p <= 1.0, "loopless_p");
  check(one_of(c.eta_rule, {"constant", "decay"}), "eta_rule");
  check(c.eta > 0.0 && c.eta <= 1.0, "eta");
  check(c.rho > 0.0 && c.rho < 1.0, "rho");
  check(c.gamma > 0.0, "gamma");
  check(one_of(c.adaptive, {"adam", "diag-accum"}), "adaptive");
  check(c.warm_start_passes >= 0.0, "warm_start_passes");
  check(c.tv_iters >= 1, "tv_iters");
  check(c.budget_passes > 0.0, "budget_passes");
  check(c.tol >= 0.0, "tol");
  check(!c.target_rel_dist || *c.target_rel_dist > 0.0, "target_rel_dist");
  check(c.log_every >= 1, "log_every");
  check(!c.out_dir.empty(), "out_dir");
  check(c.reference_passes >= 0.0, "reference_passes");
  check(c.reference_tol > 0.0, "reference_tol");
  check(c.noise_spacing == "linear", "noise_spacing");
  if (!bad.empty()) throw ConfigError("invalid config values", bad);
}

}  // namespace stochograd
