#include "stochograd/trace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stochograd {

TraceRecorder::TraceRecorder(const Monitor& monitor, Index units_per_pass,
                             std::function<double(Eigen::Ref<const Vec>)> objective)
    : monitor_(monitor), per_pass_(units_per_pass), objective_(std::move(objective)) {
  if (per_pass_ < 1) throw std::invalid_argument("units per pass must be >= 1");
  if (!(monitor_.max_passes > 0.0)) throw std::invalid_argument("pass budget must be positive");
  if (monitor_.log_every < 1) throw std::invalid_argument("log_every must be >= 1");
  if (monitor_.objective) objective_ = monitor_.objective;
  if (monitor_.x_ref) ref_norm_ = monitor_.x_ref->norm();
  t0_ = std::chrono::steady_clock::now();
}

std::optional<double> TraceRecorder::rel_dist(Eigen::Ref<const Vec> x) const {
  if (!monitor_.x_ref) return std::nullopt;
  const double diff = (x - *monitor_.x_ref).norm();
  return ref_norm_ > 0.0 ? diff / ref_norm_ : diff;
}

void TraceRecorder::log(Eigen::Ref<const Vec> x) {
  if (last_logged_units_ == units_ && !trace_.rows.empty()) return;
  TraceRow row;
  row.k = k_;
  row.pass_units = units_;
  row.units_per_pass = per_pass_;
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  row.objective = objective_(x);
  if (monitor_.phi_ref) row.subopt = row.objective - *monitor_.phi_ref;
  row.rel_dist = rel_dist(x);
  trace_.rows.push_back(row);
  last_logged_units_ = units_;
  last_logged_pass_ = units_ / per_pass_;
}

void TraceRecorder::start(Eigen::Ref<const Vec> x0) {
  if (!x0.allFinite()) {
    trace_.diverged = true;
    stop("divergence");
  }
  log(x0);
}

void TraceRecorder::stop(const std::string& reason) {
  if (!stopped_) trace_.stop_reason = reason;
  stopped_ = true;
}

bool TraceRecorder::check_finite(Eigen::Ref<const Vec> v) {
  if (v.allFinite()) return false;
  trace_.diverged = true;
  stop("divergence");
  return true;
}

bool TraceRecorder::after_iteration(Eigen::Ref<const Vec> x, std::optional<double> change) {
  ++k_;
  if (stopped_) {
    log(x);
    return true;
  }
  if (!x.allFinite()) {
    trace_.diverged = true;
    stop("divergence");
    log(x);
    return true;
  }
  const Index pass = units_ / per_pass_;
  bool done = false;
  if (monitor_.target_rel_dist) {
    auto rd = rel_dist(x);
    if (rd && *rd <= *monitor_.target_rel_dist) {
      stop("target");
      done = true;
    }
  }
  if (!done && change && monitor_.tol > 0.0) {
    const double scale = std::max(x.norm(), 1e-300);
    if (*change <= monitor_.tol * scale) {
      stop("tolerance");
      done = true;
    }
  }
  if (!done && !budget_left()) {
    stop("budget");
    done = true;
  }
  if (!done && k_ >= monitor_.max_iter) {
    stop("max-iter");
    done = true;
  }
  if (done || pass / monitor_.log_every > last_logged_pass_ / monitor_.log_every) log(x);
  return done;
}

IterateTrace TraceRecorder::finish(Eigen::Ref<const Vec> x, const Shape& shape, Vec y) {
  log(x);
  if (trace_.stop_reason.empty()) trace_.stop_reason = "budget";
  trace_.iterations = k_;
  trace_.final_passes = passes();
  trace_.x = DenseVector(shape, Vec(x));
  trace_.y = std::move(y);
  return std::move(trace_);
}

}  // namespace stochograd
