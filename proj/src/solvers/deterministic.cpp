#include "stochograd/deterministic.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace stochograd {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be positive and finite");
}

double smoothness(const Functional& h, const SolverConfig& cfg) {
  if (cfg.lipschitz > 0.0) return cfg.lipschitz;
  return h.lipschitz().value_or(0.0);
}

double norm_of(const LinearMap& A, const SolverConfig& cfg) {
  return cfg.op_norm > 0.0 ? cfg.op_norm : operator_norm(A, cfg.seed);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void check_shape(const DenseVector& x0, const LinearMap* A) {
  if (!(A->domain() == x0.shape())) {
    throw ShapeError("x0 shape " + x0.shape().str() + " differs from operator domain " + A->domain().str());
  }
}

double momentum_weight(const SolverConfig& cfg, double& t) {
  switch (cfg.momentum) {
    case Momentum::none: return 0.0;
    case Momentum::constant: return cfg.momentum_a;
    case Momentum::nag_sc: {
      require_positive(cfg.mu, "nag-sc mu");
      require_positive(cfg.L, "nag-sc L");
      const double a = std::sqrt(cfg.L), b = std::sqrt(cfg.mu);
      return (a - b) / (a + b);
    }
    case Momentum::fista: {
      const double t_next = fista_t_next(t);
      const double a = (t - 1.0) / t_next;
      t = t_next;
      return a;
    }
  }
  return 0.0;
}

// Shared FISTA/NAG loop; g == nullptr means no prox.
IterateTrace accelerated(const Functional* g, const Functional& h, const SolverConfig& cfg, const DenseVector& x0) {
  require_positive(cfg.tau, "tau");
  const double tau = cfg.tau;
  auto phi = [&](Eigen::Ref<const Vec> v) { return h.value(v) + (g ? g->value(v) : 0.0); };
  TraceRecorder rec(cfg.monitor, 1, phi);
  const double L = smoothness(h, cfg);
  if (L > 0.0 && tau > 1.0 / L * (1.0 + 1e-12)) rec.warn("accelerated step tau=" + fmt(tau) + " exceeds 1/L=" + fmt(1.0 / L));

  Vec x = x0.values(), x_prev = x, y(x.size()), grad(x.size()), z(x.size()), x_new(x.size());
  double t = 1.0;
  double phi_x = cfg.restart == Restart::function_value ? phi(x) : 0.0;
  ProxState warm;
  rec.start(x);
  while (true) {
    const double a = momentum_weight(cfg, t);
    y = x + a * (x - x_prev);
    h.gradient_into(y, grad);
    z = y - tau * grad;
    if (g) g->prox_into(tau, z, x_new, &warm);
    else x_new = z;
    rec.charge(1);

    bool restart = false;
    if (cfg.restart == Restart::function_value) {
      const double phi_new = phi(x_new);
      restart = phi_new > phi_x;
      phi_x = phi_new;
    } else if (cfg.restart == Restart::gradient) {
      restart = (y - x_new).dot(x_new - x) > 0.0;
    }
    const double change = (x_new - x).norm();
    x_prev = x;
    x = x_new;
    if (restart) {
      t = 1.0;
      x_prev = x;
    }
    if (rec.after_iteration(x, change)) break;
  }
  return rec.finish(x, x0.shape());
}

enum class PdVariant { condat_vu, pd3o };

// Shared PDHG / Condat-Vu / PD3O loop for min f(Ax) + g(x) + h(x).
IterateTrace primal_dual(const Functional& f, const LinearMap& A, const Functional& g, const Functional& h,
                         PdVariant variant, bool dual_extrapolation, const SolverConfig& cfg, const DenseVector& x0,
                         const Vec& y0, TraceRecorder& rec) {
  const double tau = cfg.tau, sigma = cfg.sigma;
  Vec x = x0.values();
  Vec y = y0.size() ? y0 : Vec::Zero(A.rows());
  if (y.size() != A.rows()) throw ShapeError("dual start has wrong size");
  Vec aty(x.size()), grad = Vec::Zero(x.size()), grad_new(x.size()), z(x.size()), x_new(x.size());
  Vec xbar(x.size()), ax(A.rows()), dual_arg(A.rows()), y_new(A.rows());
  A.adjoint_into(y, aty);
  h.gradient_into(x, grad);
  ProxState warm_g, warm_f;
  rec.start(x);
  while (true) {
    z = x - tau * (aty + grad);
    g.prox_into(tau, z, x_new, &warm_g);
    if (dual_extrapolation) {
      A.apply_into(x_new, ax);
      dual_arg = y + sigma * ax;
      f.prox_conjugate_into(sigma, dual_arg, y_new, &warm_f);
      A.adjoint_into(2.0 * y_new - y, aty);
      h.gradient_into(x_new, grad);
    } else {
      xbar = 2.0 * x_new - x;
      if (variant == PdVariant::pd3o) {
        h.gradient_into(x_new, grad_new);
        xbar += tau * (grad - grad_new);
        grad.swap(grad_new);
      } else {
        h.gradient_into(x_new, grad);
      }
      A.apply_into(xbar, ax);
      dual_arg = y + sigma * ax;
      f.prox_conjugate_into(sigma, dual_arg, y_new, &warm_f);
      A.adjoint_into(y_new, aty);
    }
    rec.charge(1);
    const double change = (x_new - x).norm();
    x.swap(x_new);
    y.swap(y_new);
    if (rec.check_finite(y) || rec.after_iteration(x, change)) break;
  }
  return rec.finish(x, x0.shape(), y);
}

std::function<double(Eigen::Ref<const Vec>)> composite_objective(const Functional& f, const LinearMap& A,
                                                                 const Functional& g, const Functional* h) {
  return [&f, &A, &g, h](Eigen::Ref<const Vec> x) {
    Vec ax(A.rows());
    A.apply_into(x, ax);
    return f.value(ax) + g.value(x) + (h ? h->value(x) : 0.0);
  };
}

}  // namespace

double fista_t_next(double t) { return (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0; }

std::optional<std::string> guard_pgd(double tau, double L) {
  if (L > 0.0 && !(tau * L < 2.0)) return "step tau=" + fmt(tau) + " violates tau < 2/L with L=" + fmt(L);
  return std::nullopt;
}

std::optional<std::string> guard_pdhg(double tau, double sigma, double norm_a) {
  const double s = sigma * tau * norm_a * norm_a;
  if (!(s < 1.0)) return "sigma*tau*||A||^2=" + fmt(s) + " violates the bound 1";
  return std::nullopt;
}

std::optional<std::string> guard_condat_vu(double tau, double sigma, double norm_a, double L) {
  const double s = tau * (sigma * norm_a * norm_a + L / 2.0);
  if (!(s < 1.0)) return "tau*(sigma*||A||^2 + L/2)=" + fmt(s) + " violates the bound 1";
  return std::nullopt;
}

std::optional<std::string> guard_pd3o(double tau, double sigma, double norm_a, double L) {
  if (auto m = guard_pdhg(tau, sigma, norm_a)) return m;
  if (!(tau * L < 2.0)) return "tau*L=" + fmt(tau * L) + " violates the bound 2";
  return std::nullopt;
}

IterateTrace run_gd(const Functional& h, const SolverConfig& cfg, const DenseVector& x0) {
  require_positive(cfg.tau, "tau");
  TraceRecorder rec(cfg.monitor, 1, [&h](Eigen::Ref<const Vec> v) { return h.value(v); });
  if (auto m = guard_pgd(cfg.tau, smoothness(h, cfg))) rec.warn(*m);
  Vec x = x0.values(), grad(x.size());
  rec.start(x);
  while (true) {
    h.gradient_into(x, grad);
    x = x - cfg.tau * grad;
    rec.charge(1);
    if (rec.after_iteration(x, cfg.tau * grad.norm())) break;
  }
  return rec.finish(x, x0.shape());
}

IterateTrace run_nag(const Functional& h, const SolverConfig& cfg, const DenseVector& x0) {
  return accelerated(nullptr, h, cfg, x0);
}

IterateTrace run_pgd(const Functional& g, const Functional& h, const SolverConfig& cfg, const DenseVector& x0) {
  require_positive(cfg.tau, "tau");
  TraceRecorder rec(cfg.monitor, 1, [&](Eigen::Ref<const Vec> v) { return h.value(v) + g.value(v); });
  if (auto m = guard_pgd(cfg.tau, smoothness(h, cfg))) rec.warn(*m);
  Vec x = x0.values(), grad(x.size()), z(x.size()), x_new(x.size());
  ProxState warm;
  rec.start(x);
  while (true) {
    h.gradient_into(x, grad);
    z = x - cfg.tau * grad;
    g.prox_into(cfg.tau, z, x_new, &warm);
    rec.charge(1);
    const double change = (x_new - x).norm();
    x.swap(x_new);
    if (rec.after_iteration(x, change)) break;
  }
  return rec.finish(x, x0.shape());
}

IterateTrace run_fista(const Functional& g, const Functional& h, const SolverConfig& cfg, const DenseVector& x0) {
  SolverConfig c = cfg;
  c.momentum = Momentum::fista;
  return accelerated(&g, h, c, x0);
}

IterateTrace run_pdhg(const Functional& f, const LinearMap& A, const Functional& g, const SolverConfig& cfg,
                      const DenseVector& x0, const Vec& y0) {
  require_positive(cfg.tau, "tau");
  require_positive(cfg.sigma, "sigma");
  check_shape(x0, &A);
  auto zero = make_zero_functional();
  TraceRecorder rec(cfg.monitor, 1, composite_objective(f, A, g, nullptr));
  if (auto m = guard_pdhg(cfg.tau, cfg.sigma, norm_of(A, cfg))) rec.warn(*m);
  return primal_dual(f, A, g, *zero, PdVariant::condat_vu, cfg.dual_extrapolation, cfg, x0, y0, rec);
}

IterateTrace run_condat_vu(const Functional& f, const LinearMap& A, const Functional& g, const Functional& h,
                           const SolverConfig& cfg, const DenseVector& x0, const Vec& y0) {
  require_positive(cfg.tau, "tau");
  require_positive(cfg.sigma, "sigma");
  check_shape(x0, &A);
  TraceRecorder rec(cfg.monitor, 1, composite_objective(f, A, g, &h));
  if (auto m = guard_condat_vu(cfg.tau, cfg.sigma, norm_of(A, cfg), smoothness(h, cfg))) rec.warn(*m);
  return primal_dual(f, A, g, h, PdVariant::condat_vu, false, cfg, x0, y0, rec);
}

IterateTrace run_pd3o(const Functional& f, const LinearMap& A, const Functional& g, const Functional& h,
                      const SolverConfig& cfg, const DenseVector& x0, const Vec& y0) {
  require_positive(cfg.tau, "tau");
  require_positive(cfg.sigma, "sigma");
  check_shape(x0, &A);
  TraceRecorder rec(cfg.monitor, 1, composite_objective(f, A, g, &h));
  if (auto m = guard_pd3o(cfg.tau, cfg.sigma, norm_of(A, cfg), smoothness(h, cfg))) rec.warn(*m);
  return primal_dual(f, A, g, h, PdVariant::pd3o, false, cfg, x0, y0, rec);
}

IterateTrace run_admm(const Functional& f, const LinearMap& A, const Functional& g, const SolverConfig& cfg,
                      const DenseVector& x0) {
  require_positive(cfg.tau, "tau");
  check_shape(x0, &A);
  const double tau = cfg.tau;
  TraceRecorder rec(cfg.monitor, 1, composite_objective(f, A, g, nullptr));
  double beta = cfg.admm_beta;
  if (!cfg.admm_alpha && !(beta > 0.0)) {
    const double na = norm_of(A, cfg);
    beta = na > 0.0 ? 0.99 / (tau * na * na) : 1.0;
  }
  if (cfg.admm_alpha) require_positive(*cfg.admm_alpha, "admm alpha");

  Vec x = x0.values(), ax(A.rows()), z(A.rows()), y = Vec::Zero(A.rows()), arg(A.rows());
  Vec back(x.size()), x_new(x.size());
  ProxState warm_f, warm_g;
  A.apply_into(x, ax);
  rec.start(x);
  while (true) {
    arg = ax + y / tau;
    f.prox_into(1.0 / tau, arg, z, &warm_f);
    if (cfg.admm_alpha) {
      const double alpha = *cfg.admm_alpha;
      A.adjoint_into(z - y / tau, back);
      g.prox_into(1.0 / (tau * alpha), back / alpha, x_new, &warm_g);
    } else {
      // Both strategies reduce to one prox-gradient step on the x-subproblem.
      A.adjoint_into(y + tau * (ax - z), back);
      g.prox_into(beta, x - beta * back, x_new, &warm_g);
    }
    A.apply_into(x_new, ax);
    y += tau * (ax - z);
    rec.charge(1);
    rec.record_residual((ax - z).norm());
    const double change = (x_new - x).norm();
    x.swap(x_new);
    if (rec.check_finite(y) || rec.after_iteration(x, change)) break;
  }
  return rec.finish(x, x0.shape(), y);
}

IterateTrace run_coordinate_descent(const Functional& h, Index block_size, Sampler& order, const SolverConfig& cfg,
                                    const DenseVector& x0) {
  require_positive(cfg.tau, "tau");
  const Index d = x0.size();
  if (block_size < 1 || block_size > d) throw std::invalid_argument("block size must lie in [1, d]");
  const Index n_blocks = (d + block_size - 1) / block_size;
  if (order.n() != n_blocks) throw std::invalid_argument("sampler must range over the " + std::to_string(n_blocks) + " blocks");
  TraceRecorder rec(cfg.monitor, d, [&h](Eigen::Ref<const Vec> v) { return h.value(v); });
  Vec x = x0.values(), grad(d);
  rec.start(x);
  while (true) {
    const Index b = order.next();
    const Index lo = b * block_size;
    const Index len = std::min(block_size, d - lo);
    h.gradient_into(x, grad);
    x.segment(lo, len) -= cfg.tau * grad.segment(lo, len);
    rec.charge(len);
    if (rec.after_iteration(x)) break;
  }
  return rec.finish(x, x0.shape());
}

}  // namespace stochograd
