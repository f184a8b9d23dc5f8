#pragma once

#include "stochograd/vector.hpp"

#include <chrono>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace stochograd {

/// One logging event. Data passes are stored as an exact fraction.
struct TraceRow {
  Index k = 0;
  Index pass_units = 0;
  Index units_per_pass = 1;
  double seconds = 0.0;
  double objective = 0.0;
  std::optional<double> subopt;
  std::optional<double> rel_dist;

  double data_passes() const { return static_cast<double>(pass_units) / static_cast<double>(units_per_pass); }
};

struct IterateTrace {
  std::vector<TraceRow> rows;
  bool diverged = false;
  /// "budget", "tolerance", "target", "divergence" or "max-iter".
  std::string stop_reason;
  std::vector<std::string> warnings;
  Index iterations = 0;
  /// Data passes spent when the run stopped.
  double final_passes = 0.0;
  DenseVector x;
  /// Final dual variable for primal-dual methods; empty otherwise.
  Vec y;
  /// Per-iteration constraint residual ||A x_k - z_k|| (ADMM only).
  std::vector<double> residuals;
};

/// What to measure while running and when to stop.
struct Monitor {
  double max_passes = 100.0;
  Index max_iter = std::numeric_limits<Index>::max();
  /// Stop when ||x_{k+1} - x_k|| <= tol * max(||x_{k+1}||, tiny); 0 disables.
  double tol = 0.0;
  /// Reference minimiser and optimal value for rel_dist and subopt.
  std::optional<Vec> x_ref;
  std::optional<double> phi_ref;
  /// Stop as soon as rel_dist <= target (checked every iteration).
  std::optional<double> target_rel_dist;
  /// Replaces the solver's own objective when set.
  std::function<double(Eigen::Ref<const Vec>)> objective;
  /// Log every `log_every` data passes.
  Index log_every = 1;
};

/// Accumulates the work counter and emits rows at data-pass boundaries.
class TraceRecorder {
 public:
  TraceRecorder(const Monitor& monitor, Index units_per_pass, std::function<double(Eigen::Ref<const Vec>)> objective);

  void charge(Index units) { units_ += units; }
  Index units() const { return units_; }
  double passes() const { return static_cast<double>(units_) / static_cast<double>(per_pass_); }
  bool budget_left() const { return passes() < monitor_.max_passes; }

  /// Row for the starting point.
  void start(Eigen::Ref<const Vec> x0);
  /// Called after each iteration. `change` is ||x_{k+1} - x_k|| when known.
  /// Returns true when the run must stop.
  bool after_iteration(Eigen::Ref<const Vec> x, std::optional<double> change = std::nullopt);
  /// Flag divergence from a non-finite auxiliary variable.
  bool check_finite(Eigen::Ref<const Vec> v);

  void warn(std::string message) { trace_.warnings.push_back(std::move(message)); }
  void record_residual(double r) { trace_.residuals.push_back(r); }
  IterateTrace finish(Eigen::Ref<const Vec> x, const Shape& shape, Vec y = Vec());
  Index iterations() const { return k_; }
  /// Optional relative distance at x (needs a reference).
  std::optional<double> rel_dist(Eigen::Ref<const Vec> x) const;

 private:
  void log(Eigen::Ref<const Vec> x);
  void stop(const std::string& reason);

  Monitor monitor_;
  Index per_pass_;
  std::function<double(Eigen::Ref<const Vec>)> objective_;
  IterateTrace trace_;
  Index units_ = 0;
  Index k_ = 0;
  Index last_logged_pass_ = -1;
  Index last_logged_units_ = -1;
  double ref_norm_ = 0.0;
  bool stopped_ = false;
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace stochograd
