#pragma once

#include "stochograd/vector.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stochograd {

/// Raised for malformed configs; `keys` names every offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::vector<std::string> keys)
      : std::runtime_error(what), keys(std::move(keys)) {}
  std::vector<std::string> keys;
};

/// Everything a run needs. Zero-valued step sizes and weights mean "derive a default".
struct ExperimentConfig {
  std::string experiment = "spikes-deblur";

  // problem
  Index d = 1000;
  Index kappa = 25;
  Index n_spikes = 20;
  Index size = 64;
  Index angles = 120;
  std::string noise = "gaussian";
  double noise_sigma = 0.01;
  double I0 = 5000.0;
  /// Scale applied to the X-ray transform; 0 picks 1 for Gaussian noise and 4/size for Beer-Lambert.
  double attenuation = 0.0;
  /// Regularisation weight; negative means the experiment's default.
  double reg = -1.0;
  /// Second TGV weight (on the symmetrised gradient block).
  double reg2 = -1.0;

  // algorithm
  std::string algorithm = "pgd";
  Index n_subsets = 10;
  std::string partition = "staggered";
  std::string sampler = "uniform";
  double tau = 0.0;
  double sigma = 0.0;
  std::string schedule = "constant";
  double decay_c = 0.01;
  double decay_power = 1.0;
  std::string momentum = "fista";
  std::string restart = "off";
  std::string saga_form = "standard";
  Index svrg_inner = 0;
  double loopless_p = 0.0;
  std::string eta_rule = "decay";
  double eta = 1.0;
  double rho = 0.99;
  double gamma = 1.0;
  std::string adaptive = "adam";
  double warm_start_passes = 0.0;
  bool allow_large_step = false;
  int tv_iters = 50;

  // run
  double budget_passes = 20.0;
  double tol = 0.0;
  std::optional<double> target_rel_dist;
  Index log_every = 1;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  bool record_wall_time = false;
  /// Reference solve: budget in data passes (0 skips it) and relative-change tolerance.
  double reference_passes = 3000.0;
  double reference_tol = 1e-9;
  /// Spacing of noise-level sweeps; only "linear" is supported.
  std::string noise_spacing = "linear";
};

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Start from `base` and overwrite the keys present in `j`. Unknown keys,
/// wrong types and out-of-range values raise ConfigError listing all of them.
ExperimentConfig config_from_json(const nlohmann::json& j, const ExperimentConfig& base = {});
ExperimentConfig load_config(const std::string& path);
/// Semantic checks (known names, positive sizes); throws ConfigError.
void validate(const ExperimentConfig& cfg);

const std::vector<std::string>& experiment_names();
const std::vector<std::string>& algorithm_names();

}  // namespace stochograd
