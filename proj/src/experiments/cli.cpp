#include "stochograd/experiments/cli.hpp"

#include "stochograd/experiments/data.hpp"
#include "stochograd/experiments/runner.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <ostream>

namespace stochograd {

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> algorithm;
  std::optional<Index> subsets;
  std::optional<double> passes;
  std::optional<std::string> out;
  bool paper_scale = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "experiment config (JSON)");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--algorithm", f.algorithm, "algorithm name");
  cmd->add_option("--subsets", f.subsets, "number of subsets");
  cmd->add_option("--passes", f.passes, "budget in data passes");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_flag("--paper-scale", f.paper_scale, "CT at 128x128 with 240 angles");
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  nlohmann::json over = nlohmann::json::object();
  if (f.seed) over["seed"] = *f.seed;
  if (f.algorithm) over["algorithm"] = *f.algorithm;
  if (f.subsets) over["n_subsets"] = *f.subsets;
  if (f.passes) over["budget_passes"] = *f.passes;
  if (f.out) over["out_dir"] = *f.out;
  if (f.paper_scale) over["size"] = 128, over["angles"] = 240;
  return config_from_json(over, cfg);
}

void print_summary(std::ostream& out, const RunResult& r, const std::string& algorithm) {
  out << algorithm << ": stop=" << r.trace.stop_reason << " passes=" << format_double(r.trace.final_passes)
      << " iterations=" << r.trace.iterations;
  if (!r.rows.empty()) {
    const MetricsRow& last = r.rows.back();
    out << " objective=" << format_double(last.objective);
    if (last.subopt) out << " subopt=" << format_double(*last.subopt);
    if (last.rel_dist) out << " rel_dist=" << format_double(*last.rel_dist);
  }
  out << "\n";
  for (const auto& w : r.trace.warnings) out << "  warning: " << w << "\n";
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic and deterministic first-order solvers for imaging inverse problems", "stochograd"};
  app.require_subcommand(1);

  Index phantom_size = 128;
  std::string phantom_out = "out";
  auto* phantom = app.add_subcommand("phantom", "write the Shepp-Logan phantom");
  phantom->add_option("--size", phantom_size, "image size")->check(CLI::Range(16, 4096));
  phantom->add_option("--out", phantom_out, "output directory");

  CommonFlags ref_flags, run_flags, cmp_flags, diag_flags;
  auto* reference = app.add_subcommand("reference", "compute and store a reference solution");
  add_common(reference, ref_flags);
  auto* run = app.add_subcommand("run", "run one algorithm");
  add_common(run, run_flags);
  auto* compare = app.add_subcommand("compare", "run several algorithms on one problem");
  add_common(compare, cmp_flags);
  std::vector<std::string> algorithms;
  unsigned threads = 0;
  compare->add_option("--algorithms", algorithms, "comma-separated algorithm names")->delimiter(',')->required();
  compare->add_option("--threads", threads, "worker threads (0 = all cores)");
  auto* diag = app.add_subcommand("diagnose", "print L, L_max, upsilon and step-size guards");
  add_common(diag, diag_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*phantom) {
      const DenseVector img = gen_shepp_logan(phantom_size);
      std::filesystem::create_directories(phantom_out);
      const auto base = std::filesystem::path(phantom_out) / "phantom";
      write_pgm(base.string() + ".pgm", img);
      write_raw(base.string() + ".f64", img);
      out << "phantom " << phantom_size << "x" << phantom_size << " checksum=" << checksum(img.values()) << "\n";
      return 0;
    }
    if (*reference) {
      const ExperimentConfig cfg = resolve(ref_flags);
      const BuiltProblem bp = build_problem(cfg);
      const Reference ref = compute_reference(bp, cfg.reference_passes, cfg.reference_tol);
      std::filesystem::create_directories(cfg.out_dir);
      write_raw((std::filesystem::path(cfg.out_dir) / "reference.f64").string(), ref.x);
      out << "phi_ref=" << format_double(ref.phi) << " passes=" << format_double(ref.passes)
          << " stop=" << ref.stop_reason << "\n";
      return 0;
    }
    if (*run) {
      const ExperimentConfig cfg = resolve(run_flags);
      const RunResult r = run_experiment(cfg);
      print_summary(out, r, cfg.algorithm);
      return r.trace.diverged ? kExitDiverged : 0;
    }
    if (*compare) {
      const ExperimentConfig cfg = resolve(cmp_flags);
      const auto results = run_compare(cfg, algorithms, threads);
      bool diverged = false;
      for (std::size_t i = 0; i < results.size(); ++i) {
        print_summary(out, results[i], algorithms[i]);
        diverged = diverged || results[i].trace.diverged;
      }
      return diverged ? kExitDiverged : 0;
    }
    const ExperimentConfig cfg = resolve(diag_flags);
    out << diagnose(cfg);
    return 0;
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << "; offending keys:";
    for (const auto& k : e.keys) err << ' ' << k;
    err << "\n";
    return kExitConfig;
  }
}

}  // namespace stochograd
