#pragma once

#include "stochograd/problem.hpp"
#include "stochograd/sampling.hpp"
#include "stochograd/trace.hpp"

#include <optional>
#include <string>

namespace stochograd {

enum class Estimator { sgd, sag, saga, svrg };
enum class SagaForm { standard, modified };

std::string to_string(Estimator e);

/// tau_k = tau0 / (1 + c * k^power / n); c = 0 gives a constant step.
struct StepSchedule {
  double tau0 = 0.0;
  double c = 0.0;
  double power = 1.0;
  Index n = 1;

  static StepSchedule constant(double tau) { return {tau, 0.0, 1.0, 1}; }
  static StepSchedule sgd_decay(double tau0, double c, double power, Index n) { return {tau0, c, power, n}; }

  bool is_constant() const { return c == 0.0; }
  double at(Index k) const;
};

/// Weight in front of the sampled term: 1/p_i (n under uniform selection).
struct SamplingWeights {
  std::vector<double> inv_p;
  static SamplingWeights of(const Sampler& s, const std::vector<double>& probabilities);
};

/// Stochastic gradient estimator with its memory (table, dual slots or anchor).
class GradientEstimator {
 public:
  GradientEstimator(const PartitionedProblem& problem, Estimator kind, SagaForm form = SagaForm::standard,
                    std::vector<double> inv_p = {});

  Estimator kind() const { return kind_; }
  SagaForm form() const { return form_; }

  /// SAG/SAGA: fill the memory with the gradients at x. SVRG: set the anchor to x.
  void initialise(Eigen::Ref<const Vec> x);
  bool initialised() const { return initialised_; }

  /// Direction for index i at x, then the memory update the method prescribes.
  void next(Index i, Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out);
  /// Direction only; the memory is left untouched.
  void peek(Index i, Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const;
  /// Subset gradient evaluations spent by one call to next().
  Index cost_per_step() const { return kind_ == Estimator::svrg ? 2 : 1; }

  const Vec& running_sum() const { return sum_; }
  /// || running sum - sum of stored gradients ||, recomputed from scratch.
  double running_sum_error() const;
  const Vec& anchor() const { return anchor_; }

 private:
  void direction(Index i, Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out, Vec* grad_cache, Vec* slot_cache) const;
  double weight(Index i) const;

  const PartitionedProblem* problem_;
  Estimator kind_;
  SagaForm form_;
  std::vector<double> inv_p_;
  bool initialised_ = false;
  Mat table_;
  std::vector<Vec> slots_;
  Vec sum_;
  Vec anchor_;
};

/// D = eps + sum_k |d_k| per coordinate; the step is tau * d / D.
class DiagAccumulator {
 public:
  DiagAccumulator(Index dim, double eps) : acc_(Vec::Constant(dim, eps)) {}
  void add(const Vec& d) { acc_ += d.cwiseAbs(); }
  const Vec& accumulation() const { return acc_; }
  /// Per-coordinate effective step tau / D_i.
  Vec effective_steps(double tau) const { return tau * acc_.cwiseInverse(); }

 private:
  Vec acc_;
};

enum class AdaptiveVariant { diag_accum, adam };
enum class EtaRule { constant, decay };

struct StochasticConfig {
  StepSchedule step;
  SamplerKind sampler = SamplerKind::uniform;
  std::uint64_t seed = 0;
  /// Selection probabilities for the importance sampler.
  std::vector<double> probabilities;

  SagaForm saga_form = SagaForm::standard;
  /// SVRG inner loop length; 0 selects 2n.
  Index svrg_inner = 0;
  /// Loopless SVRG: refresh the anchor with this probability after each step.
  std::optional<double> loopless_p;

  /// Accelerated scheme: estimator, eta rule and value for EtaRule::constant.
  Estimator acc_estimator = Estimator::saga;
  EtaRule eta_rule = EtaRule::decay;
  double eta = 1.0;

  /// SPDHG parameters: sigma = gamma * rho / K_max, tau = 1 / (l * gamma * K_max)
  /// unless set explicitly.
  double rho = 0.99;
  double gamma = 1.0;
  double spdhg_sigma = 0.0;
  double spdhg_tau = 0.0;
  /// Use the dual update at x^(k) as literally printed instead of x^(k+1).
  bool spdhg_dual_at_old_x = false;

  AdaptiveVariant adaptive = AdaptiveVariant::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adaptive_eps = 1e-8;

  /// Data passes of plain SGD run before a variance-reduced method starts.
  double warm_start_passes = 0.0;

  /// L_max for the step-size guards; 0 skips them.
  double L_max = 0.0;
  /// Permit SAGA/SVRG steps beyond 1/(3 n L_max).
  bool allow_large_step = false;
  /// Verify running sums and the SPDHG image every data pass.
  bool check_invariants = false;

  Monitor monitor;
};

IterateTrace run_sgd(const PartitionedProblem& problem, const StochasticConfig& cfg, const DenseVector& x0);
IterateTrace run_sag(const PartitionedProblem& problem, const StochasticConfig& cfg, const DenseVector& x0);
IterateTrace run_saga(const PartitionedProblem& problem, const StochasticConfig& cfg, const DenseVector& x0);
IterateTrace run_svrg(const PartitionedProblem& problem, const StochasticConfig& cfg, const DenseVector& x0);
IterateTrace run_accelerated_vr(const PartitionedProblem& problem, const StochasticConfig& cfg, const DenseVector& x0);
IterateTrace run_spdhg(const PartitionedProblem& problem, const StochasticConfig& cfg, const DenseVector& x0);
IterateTrace run_adaptive(const PartitionedProblem& problem, const StochasticConfig& cfg, const DenseVector& x0);

/// SPDHG iteration state, exposed for bookkeeping checks.
class SpdhgState {
 public:
  SpdhgState(const PartitionedProblem& problem, double sigma, double tau, bool dual_at_old_x, const Vec& x0);
  void step(Index i);
  const Vec& x() const { return x_; }
  const Vec& w() const { return w_; }
  /// sum_i A_i* ybar_i computed from the stored blocks.
  Vec recompute_w() const;
  const std::vector<Vec>& y() const { return y_; }

 private:
  const PartitionedProblem* problem_;
  double sigma_, tau_;
  bool dual_at_old_x_;
  Vec x_, x_new_, z_, w_;
  std::vector<Vec> y_;
  Index last_ = -1;
  Vec last_ybar_;
  ProxState warm_g_;
};

std::optional<std::string> guard_spdhg(double sigma, double tau, Index l, double max_block_norm);

}  // namespace stochograd
