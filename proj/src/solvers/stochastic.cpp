#include "stochograd/stochastic.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace stochograd {

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::sgd: return "sgd";
    case Estimator::sag: return "sag";
    case Estimator::saga: return "saga";
    case Estimator::svrg: return "svrg";
  }
  return "unknown";
}

double StepSchedule::at(Index k) const {
  if (c == 0.0) return tau0;
  return tau0 / (1.0 + c * (std::pow(static_cast<double>(k), power) / static_cast<double>(n)));
}

SamplingWeights SamplingWeights::of(const Sampler& s, const std::vector<double>& probabilities) {
  SamplingWeights w;
  const auto n = static_cast<std::size_t>(s.n());
  if (s.kind() == SamplerKind::importance) {
    if (probabilities.size() != n) throw std::invalid_argument("importance sampling needs n probabilities");
    for (double p : probabilities) {
      if (!(p > 0.0)) throw std::invalid_argument("importance probabilities must be positive");
      w.inv_p.push_back(1.0 / p);
    }
  } else {
    w.inv_p.assign(n, static_cast<double>(n));
  }
  return w;
}

// ---------------------------------------------------------------- estimator

GradientEstimator::GradientEstimator(const PartitionedProblem& problem, Estimator kind, SagaForm form,
                                     std::vector<double> inv_p)
    : problem_(&problem), kind_(kind), form_(form), inv_p_(std::move(inv_p)) {
  if (inv_p_.empty()) inv_p_.assign(static_cast<std::size_t>(problem.n()), static_cast<double>(problem.n()));
  if (static_cast<Index>(inv_p_.size()) != problem.n()) throw std::invalid_argument("one weight per block needed");
  if (kind_ == Estimator::sgd) initialised_ = true;
}

double GradientEstimator::weight(Index i) const { return inv_p_[static_cast<std::size_t>(i)]; }

void GradientEstimator::initialise(Eigen::Ref<const Vec> x) {
  const Index n = problem_->n(), d = problem_->dim();
  sum_ = Vec::Zero(d);
  switch (kind_) {
    case Estimator::sgd: break;
    case Estimator::svrg:
      anchor_ = x;
      problem_->full_gradient(x, sum_);
      break;
    case Estimator::sag:
    case Estimator::saga:
      if (form_ == SagaForm::standard) {
        table_.resize(d, n);
        for (Index i = 0; i < n; ++i) {
          problem_->block_gradient(i, x, table_.col(i));
          sum_ += table_.col(i);
        }
      } else {
        slots_.assign(static_cast<std::size_t>(n), Vec());
        for (Index i = 0; i < n; ++i) {
          slots_[static_cast<std::size_t>(i)] = problem_->block_dual_gradient(i, x);
          problem_->block(i).op->adjoint_add(1.0, slots_[static_cast<std::size_t>(i)], sum_);
        }
      }
      break;
  }
  initialised_ = true;
}

void GradientEstimator::direction(Index i, Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out, Vec* grad_cache,
                                  Vec* slot_cache) const {
  if (!initialised_) throw std::logic_error("gradient estimator used before initialisation");
  if (i < 0 || i >= problem_->n()) throw std::out_of_range("block index out of range");
  const double w = weight(i);
  const Index d = problem_->dim();
  switch (kind_) {
    case Estimator::sgd:
      problem_->block_gradient(i, x, out);
      out *= w;
      return;
    case Estimator::svrg: {
      Vec g(d), ga(d);
      problem_->block_gradient(i, x, g);
      problem_->block_gradient(i, anchor_, ga);
      out = w * (g - ga) + sum_;
      return;
    }
    case Estimator::sag:
    case Estimator::saga: {
      const double factor = kind_ == Estimator::saga ? w : 1.0;
      Vec delta(d);
      if (form_ == SagaForm::standard) {
        Vec g(d);
        problem_->block_gradient(i, x, g);
        delta = g - table_.col(i);
        if (grad_cache) *grad_cache = std::move(g);
      } else {
        Vec slot = problem_->block_dual_gradient(i, x);
        delta.setZero();
        problem_->block(i).op->adjoint_add(1.0, slot - slots_[static_cast<std::size_t>(i)], delta);
        if (slot_cache) *slot_cache = std::move(slot);
      }
      out = factor * delta + sum_;
      if (grad_cache && form_ == SagaForm::modified) *grad_cache = std::move(delta);
      return;
    }
  }
}

void GradientEstimator::peek(Index i, Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const {
  direction(i, x, out, nullptr, nullptr);
}

void GradientEstimator::next(Index i, Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) {
  if (kind_ == Estimator::sgd || kind_ == Estimator::svrg) {
    direction(i, x, out, nullptr, nullptr);
    return;
  }
  Vec cache, slot;
  direction(i, x, out, &cache, &slot);
  if (form_ == SagaForm::standard) {
    sum_ += cache - table_.col(i);
    table_.col(i) = cache;
  } else {
    sum_ += cache;
    slots_[static_cast<std::size_t>(i)] = std::move(slot);
  }
}

double GradientEstimator::running_sum_error() const {
  if (kind_ == Estimator::sgd) return 0.0;
  Vec fresh = Vec::Zero(problem_->dim());
  if (kind_ == Estimator::svrg) {
    problem_->full_gradient(anchor_, fresh);
  } else if (form_ == SagaForm::standard) {
    fresh = table_.rowwise().sum();
  } else {
    for (Index i = 0; i < problem_->n(); ++i) {
      problem_->block(i).op->adjoint_add(1.0, slots_[static_cast<std::size_t>(i)], fresh);
    }
  }
  return (fresh - sum_).norm();
}

// ------------------------------------------------------------------ solvers

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void require_step(const StochasticConfig& cfg) {
  if (!(cfg.step.tau0 > 0.0) || !std::isfinite(cfg.step.tau0)) throw std::invalid_argument("step size must be positive");
  if (cfg.step.c < 0.0) throw std::invalid_argument("schedule decay must be >= 0");
}

std::function<double(Eigen::Ref<const Vec>)> objective_of(const PartitionedProblem& p) {
  return [&p](Eigen::Ref<const Vec> x) { return p.objective(x); };
}

void check_x0(const PartitionedProblem& p, const DenseVector& x0) {
  if (!(x0.shape() == p.domain())) throw ShapeError("x0 shape " + x0.shape().str() + " differs from " + p.domain().str());
}

// Variance-reduced step guard: theory asks for tau <= 1/(3 n L_max).
void guard_vr(const PartitionedProblem& p, const StochasticConfig& cfg, TraceRecorder& rec) {
  if (!(cfg.L_max > 0.0)) return;
  const double bound = 1.0 / (3.0 * static_cast<double>(p.n()) * cfg.L_max);
  if (cfg.step.tau0 <= bound * (1.0 + 1e-12)) return;
  const std::string msg = "step " + fmt(cfg.step.tau0) + " exceeds 1/(3 n L_max) = " + fmt(bound);
  if (!cfg.allow_large_step) throw std::invalid_argument(msg + "; set allow_large_step to override");
  rec.warn(msg);
}

struct Loop {
  const PartitionedProblem& p;
  const StochasticConfig& cfg;
  TraceRecorder rec;
  Sampler sampler;
  SamplingWeights weights;
  Vec x, z, x_new;
  ProxState warm;
  Index k = 0;

  Loop(const PartitionedProblem& prob, const StochasticConfig& c, const DenseVector& x0)
      : p(prob),
        cfg(c),
        rec(c.monitor, prob.n(), objective_of(prob)),
        sampler(c.sampler, prob.n(), c.seed, c.probabilities),
        weights(SamplingWeights::of(sampler, c.probabilities)),
        x(x0.values()),
        z(x.size()),
        x_new(x.size()) {}

  // x <- prox_{tau g}(x - tau d); returns true when the run stops.
  bool prox_step(double tau, const Vec& d) {
    z = x - tau * d;
    p.g()->prox_into(tau, z, x_new, &warm);
    const double change = (x_new - x).norm();
    x.swap(x_new);
    ++k;
    return rec.after_iteration(x, change);
  }

  // Plain SGD for the warm-start phase; true when the budget ran out.
  bool warm_start() {
    if (!(cfg.warm_start_passes > 0.0)) return false;
    GradientEstimator sgd(p, Estimator::sgd, SagaForm::standard, weights.inv_p);
    Vec d(x.size());
    const auto target = static_cast<Index>(std::ceil(cfg.warm_start_passes * static_cast<double>(p.n())));
    const Index stop_units = rec.units() + target;
    while (rec.units() < stop_units) {
      sgd.next(sampler.next(), x, d);
      rec.charge(1);
      if (prox_step(cfg.step.at(k), d)) return true;
    }
    return false;
  }
};

IterateTrace run_table_method(const PartitionedProblem& p, const StochasticConfig& cfg, const DenseVector& x0,
                              Estimator kind) {
  require_step(cfg);
  check_x0(p, x0);
  Loop L(p, cfg, x0);
  guard_vr(p, cfg, L.rec);
  GradientEstimator est(p, kind, cfg.saga_form, L.weights.inv_p);
  Vec d(L.x.size());
  bool stopped = false;
  if (cfg.warm_start_passes > 0.0) {
    L.rec.start(L.x);
    stopped = L.warm_start();
    est.initialise(L.x);
    L.rec.charge(p.n());
  } else {
    // Filling the table costs one pass before the first logged point.
    est.initialise(L.x);
    L.rec.charge(p.n());
    L.rec.start(L.x);
  }
  while (!stopped) {
    est.next(L.sampler.next(), L.x, d);
    L.rec.charge(1);
    if (cfg.check_invariants && L.rec.units() % p.n() == 0 && est.running_sum_error() > 1e-10 * (1.0 + est.running_sum().norm())) {
      L.rec.warn("running gradient sum drifted from the table at pass " + fmt(L.rec.passes()));
    }
    stopped = L.prox_step(cfg.step.at(L.k), d);
  }
  return L.rec.finish(L.x, x0.shape());
}

}  // namespace

IterateTrace run_sgd(const PartitionedProblem& p, const StochasticConfig& cfg, const DenseVector& x0) {
  require_step(cfg);
  check_x0(p, x0);
  Loop L(p, cfg, x0);
  GradientEstimator est(p, Estimator::sgd, SagaForm::standard, L.weights.inv_p);
  Vec d(L.x.size());
  L.rec.start(L.x);
  while (true) {
    est.next(L.sampler.next(), L.x, d);
    L.rec.charge(1);
    if (L.prox_step(cfg.step.at(L.k), d)) break;
  }
  return L.rec.finish(L.x, x0.shape());
}

IterateTrace run_sag(const PartitionedProblem& p, const StochasticConfig& cfg, const DenseVector& x0) {
  return run_table_method(p, cfg, x0, Estimator::sag);
}

IterateTrace run_saga(const PartitionedProblem& p, const StochasticConfig& cfg, const DenseVector& x0) {
  return run_table_method(p, cfg, x0, Estimator::saga);
}

IterateTrace run_svrg(const PartitionedProblem& p, const StochasticConfig& cfg, const DenseVector& x0) {
  require_step(cfg);
  check_x0(p, x0);
  if (cfg.loopless_p && !(*cfg.loopless_p > 0.0 && *cfg.loopless_p <= 1.0)) {
    throw std::invalid_argument("loopless probability must lie in (0, 1]");
  }
  const Index inner = cfg.svrg_inner > 0 ? cfg.svrg_inner : 2 * p.n();
  Loop L(p, cfg, x0);
  guard_vr(p, cfg, L.rec);
  GradientEstimator est(p, Estimator::svrg, SagaForm::standard, L.weights.inv_p);
  Pcg64 coin(cfg.seed, streams::loopless);
  Vec d(L.x.size());
  L.rec.start(L.x);
  bool stopped = L.warm_start();
  Index since_anchor = inner;
  bool refresh = true;
  while (!stopped) {
    if (cfg.loopless_p ? refresh : since_anchor >= inner) {
      est.initialise(L.x);
      L.rec.charge(p.n());
      since_anchor = 0;
      refresh = false;
    }
    est.next(L.sampler.next(), L.x, d);
    L.rec.charge(est.cost_per_step());
    ++since_anchor;
    stopped = L.prox_step(cfg.step.at(L.k), d);
    if (cfg.loopless_p) refresh = coin.uniform() < *cfg.loopless_p;
  }
  return L.rec.finish(L.x, x0.shape());
}

IterateTrace run_accelerated_vr(const PartitionedProblem& p, const StochasticConfig& cfg, const DenseVector& x0) {
  require_step(cfg);
  check_x0(p, x0);
  const Estimator kind = cfg.acc_estimator;
  if (kind != Estimator::saga && kind != Estimator::svrg) {
    throw std::invalid_argument("accelerated scheme needs a saga or svrg estimator");
  }
  if (cfg.eta_rule == EtaRule::constant && !(cfg.eta > 0.0 && cfg.eta <= 1.0)) {
    throw std::invalid_argument("eta must lie in (0, 1]");
  }
  const Index inner = cfg.svrg_inner > 0 ? cfg.svrg_inner : 2 * p.n();
  Loop L(p, cfg, x0);
  guard_vr(p, cfg, L.rec);
  GradientEstimator est(p, kind, cfg.saga_form, L.weights.inv_p);
  Vec y = L.x, zz = L.x, xk(L.x.size()), d(L.x.size()), arg(L.x.size()), z_new(L.x.size());
  est.initialise(y);
  L.rec.charge(p.n());
  L.rec.start(y);
  Index since_anchor = 0;
  ProxState warm;
  for (Index k = 0;; ++k) {
    if (kind == Estimator::svrg && since_anchor >= inner) {
      est.initialise(y);
      L.rec.charge(p.n());
      since_anchor = 0;
    }
    const double eta = cfg.eta_rule == EtaRule::constant ? cfg.eta : 2.0 / (static_cast<double>(k) + 2.0);
    xk = eta * zz + (1.0 - eta) * y;
    est.next(L.sampler.next(), xk, d);
    L.rec.charge(est.cost_per_step());
    ++since_anchor;
    // The z-sequence takes the long step tau/eta so that y moves by about tau.
    const double tz = cfg.step.at(k) / eta;
    arg = zz - tz * d;
    p.g()->prox_into(tz, arg, z_new, &warm);
    zz.swap(z_new);
    Vec y_new = eta * zz + (1.0 - eta) * y;
    const double change = (y_new - y).norm();
    y.swap(y_new);
    if (L.rec.check_finite(zz) || L.rec.after_iteration(y, change)) break;
  }
  return L.rec.finish(y, x0.shape());
}

// -------------------------------------------------------------------- spdhg

std::optional<std::string> guard_spdhg(double sigma, double tau, Index l, double max_block_norm) {
  const double s = sigma * tau * static_cast<double>(l) * max_block_norm * max_block_norm;
  if (s >= 1.0) return "sigma*tau*l*max||A_i||^2=" + fmt(s) + " violates the bound 1";
  return std::nullopt;
}

SpdhgState::SpdhgState(const PartitionedProblem& problem, double sigma, double tau, bool dual_at_old_x, const Vec& x0)
    : problem_(&problem), sigma_(sigma), tau_(tau), dual_at_old_x_(dual_at_old_x), x_(x0), x_new_(x0.size()) {
  z_ = Vec::Zero(x0.size());
  for (const auto& b : problem.blocks()) y_.push_back(Vec::Zero(b.op->rows()));
  w_ = z_;
}

void SpdhgState::step(Index i) {
  const auto& b = problem_->block(i);
  Vec arg = x_ - tau_ * w_;
  problem_->g()->prox_into(tau_, arg, x_new_, &warm_g_);
  Vec& yi = y_[static_cast<std::size_t>(i)];
  Vec ax(b.op->rows());
  b.op->apply_into(dual_at_old_x_ ? x_ : x_new_, ax);
  Vec y_new(yi.size());
  b.outer->prox_conjugate_into(sigma_, yi + sigma_ * ax, y_new);
  const Vec dy = y_new - yi;
  Vec delta = Vec::Zero(x_.size());
  b.op->adjoint_add(1.0, dy, delta);
  const double l = static_cast<double>(problem_->n());
  z_ += delta;
  w_ = z_ + l * delta;
  last_ = i;
  last_ybar_ = y_new + l * dy;
  yi = std::move(y_new);
  x_.swap(x_new_);
}

Vec SpdhgState::recompute_w() const {
  Vec w = Vec::Zero(x_.size());
  for (Index i = 0; i < problem_->n(); ++i) {
    const Vec& ybar = i == last_ ? last_ybar_ : y_[static_cast<std::size_t>(i)];
    problem_->block(i).op->adjoint_add(1.0, ybar, w);
  }
  return w;
}

IterateTrace run_spdhg(const PartitionedProblem& p, const StochasticConfig& cfg, const DenseVector& x0) {
  check_x0(p, x0);
  double k_max = 0.0;
  for (const auto& b : p.blocks()) k_max = std::max(k_max, operator_norm(*b.op, cfg.seed));
  const double l = static_cast<double>(p.n());
  const double sigma = cfg.spdhg_sigma > 0.0 ? cfg.spdhg_sigma : cfg.gamma * cfg.rho / k_max;
  const double tau = cfg.spdhg_tau > 0.0 ? cfg.spdhg_tau : 1.0 / (l * cfg.gamma * k_max);
  if (!(sigma > 0.0) || !(tau > 0.0) || !std::isfinite(sigma) || !std::isfinite(tau)) {
    throw std::invalid_argument("spdhg step sizes must be positive");
  }
  Loop L(p, cfg, x0);
  if (auto m = guard_spdhg(sigma, tau, p.n(), k_max)) L.rec.warn(*m);
  SpdhgState st(p, sigma, tau, cfg.spdhg_dual_at_old_x, L.x);
  L.rec.start(st.x());
  while (true) {
    Vec prev = st.x();
    st.step(L.sampler.next());
    L.rec.charge(1);
    if (cfg.check_invariants && L.rec.units() % p.n() == 0 &&
        (st.recompute_w() - st.w()).norm() > 1e-8 * (1.0 + st.w().norm())) {
      L.rec.warn("spdhg image drifted at pass " + fmt(L.rec.passes()));
    }
    if (L.rec.after_iteration(st.x(), (st.x() - prev).norm())) break;
  }
  Index total = 0;
  for (const auto& y : st.y()) total += y.size();
  Vec y(total);
  Index off = 0;
  for (const auto& yi : st.y()) {
    y.segment(off, yi.size()) = yi;
    off += yi.size();
  }
  return L.rec.finish(st.x(), x0.shape(), y);
}

// ----------------------------------------------------------------- adaptive

IterateTrace run_adaptive(const PartitionedProblem& p, const StochasticConfig& cfg, const DenseVector& x0) {
  require_step(cfg);
  check_x0(p, x0);
  if (!(cfg.adaptive_eps > 0.0)) throw std::invalid_argument("adaptive epsilon must be positive");
  Loop L(p, cfg, x0);
  GradientEstimator est(p, Estimator::sgd, SagaForm::standard, L.weights.inv_p);
  const Index dim = L.x.size();
  Vec d(dim), precond(dim);
  DiagAccumulator acc(dim, cfg.adaptive_eps);
  Vec m = Vec::Zero(dim), v = Vec::Zero(dim);
  double b1t = 1.0, b2t = 1.0;
  L.rec.start(L.x);
  while (true) {
    est.next(L.sampler.next(), L.x, d);
    L.rec.charge(1);
    if (cfg.adaptive == AdaptiveVariant::diag_accum) {
      acc.add(d);
      precond = d.cwiseQuotient(acc.accumulation());
    } else {
      m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * d;
      v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * d.cwiseAbs2();
      b1t *= cfg.adam_beta1;
      b2t *= cfg.adam_beta2;
      const Vec m_hat = m / (1.0 - b1t);
      const Vec v_hat = v / (1.0 - b2t);
      precond = m_hat.cwiseQuotient((v_hat.cwiseSqrt().array() + cfg.adaptive_eps).matrix());
    }
    if (L.prox_step(cfg.step.at(L.k), precond)) break;
  }
  return L.rec.finish(L.x, x0.shape());
}

}  // namespace stochograd
