#pragma once

#include "stochograd/experiments/config.hpp"
#include "stochograd/problem.hpp"
#include "stochograd/trace.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stochograd {

/// A built experiment. Finite-sum experiments fill `problem`; every
/// experiment fills the saddle form f(A x) + g(x) + h(x).
struct BuiltProblem {
  std::string experiment;
  std::optional<PartitionedProblem> problem;
  std::optional<SmoothnessInfo> info;
  /// Unpartitioned forward operator of the data term, when there is one.
  LinearMapPtr K;
  FunctionalPtr f;
  LinearMapPtr A;
  FunctionalPtr g;
  FunctionalPtr h;
  /// Split used by the three-operator methods: f3(A3 x) + g3(x) + h3(x), h3 smooth.
  /// For finite-sum experiments h3 is the unpartitioned data term, which the
  /// full-gradient methods use directly.
  FunctionalPtr f3;
  LinearMapPtr A3;
  FunctionalPtr g3;
  FunctionalPtr h3;
  /// g with a high-budget TV prox, for reference solves.
  FunctionalPtr g_reference;
  DenseVector x0;
  DenseVector truth;
  DenseVector data;
  double reg = 0.0;

  double objective(Eigen::Ref<const Vec> x) const;
};

BuiltProblem build_problem(const ExperimentConfig& cfg);

struct Reference {
  DenseVector x;
  double phi = 0.0;
  double passes = 0.0;
  std::string stop_reason;
};

/// FISTA with function-value restart (PDHG for the denoising experiments),
/// run to relative iterate change <= tol or `budget_passes`.
Reference compute_reference(const BuiltProblem& bp, double budget_passes, double tol = 1e-9);

struct MetricsRow {
  std::string experiment;
  std::string algorithm;
  std::uint64_t seed = 0;
  Index k = 0;
  double data_passes = 0.0;
  std::optional<double> seconds;
  double objective = 0.0;
  std::optional<double> subopt;
  std::optional<double> rel_dist;
};

struct RunResult {
  IterateTrace trace;
  std::vector<MetricsRow> rows;
  std::optional<Reference> reference;
};

/// Run the configured algorithm on a built problem. `reference` feeds the
/// subopt/rel_dist columns.
RunResult run_algorithm(const ExperimentConfig& cfg, const BuiltProblem& bp,
                        const std::optional<Reference>& reference);

/// Build, solve the reference (unless disabled), run, and write
/// metrics.csv, config.json and the reconstruction into cfg.out_dir.
RunResult run_experiment(const ExperimentConfig& cfg);

/// Run several algorithms on one problem, `threads` at a time. Writes
/// metrics_<algorithm>.csv per algorithm and a merged metrics.csv.
std::vector<RunResult> run_compare(const ExperimentConfig& cfg, const std::vector<std::string>& algorithms,
                                   unsigned threads);

/// L, L_max, upsilon and the step-size guard verdicts for the configured algorithm.
std::string diagnose(const ExperimentConfig& cfg);

std::vector<MetricsRow> to_metrics(const ExperimentConfig& cfg, const IterateTrace& trace);

/// Shortest round-trip decimal.
std::string format_double(double v);
inline constexpr const char* kCsvHeader = "experiment,algorithm,seed,k,data_passes,seconds,objective,subopt,rel_dist";
void write_csv(std::ostream& out, const std::vector<MetricsRow>& rows);
void write_csv(const std::string& path, const std::vector<MetricsRow>& rows);

/// 16-bit binary PGM of an image scaled from [min, max] to [0, 65535].
void write_pgm(const std::string& path, const DenseVector& image);
/// Raw little-endian float64 at `path` plus `path`.json with shape and dtype.
void write_raw(const std::string& path, const DenseVector& x);
void write_json(const std::string& path, const nlohmann::json& j);

/// Worker count: `requested` capped by STOCHOGRAD_THREADS and hardware concurrency.
unsigned worker_count(unsigned requested);

}  // namespace stochograd
