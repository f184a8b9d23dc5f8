#include "stochograd/tv.hpp"

#include "stochograd/linear_map.hpp"

#include <cmath>

namespace stochograd {

namespace {

void project_box(Eigen::Ref<Vec> x, const std::optional<double>& lo, const std::optional<double>& hi) {
  if (lo) x = x.cwiseMax(*lo);
  if (hi) x = x.cwiseMin(*hi);
}

}  // namespace

void project_group_ball(Eigen::Ref<Vec> p, Index channels, double r) {
  const Index n = p.size() / channels;
  for (Index i = 0; i < n; ++i) {
    double sq = 0.0;
    for (Index c = 0; c < channels; ++c) sq += p[c * n + i] * p[c * n + i];
    if (sq > r * r) {
      const double s = r / std::sqrt(sq);
      for (Index c = 0; c < channels; ++c) p[c * n + i] *= s;
    }
  }
}

double tv_value(Eigen::Ref<const Vec> u, Index h, Index w) {
  const Index n = h * w;
  Vec g(2 * n);
  grad_2d_forward(u.data(), h, w, g.data());
  double total = 0.0;
  for (Index i = 0; i < n; ++i) total += std::hypot(g[i], g[n + i]);
  return total;
}

FgpResult tv_prox_fgp(double lambda, const DenseVector& z, double tau, const FgpOptions& opts, const Vec* warm) {
  const Shape& s = z.shape();
  if (!s.is_image() || s.channels != 1) throw ShapeError("tv prox needs a single-channel image, got " + s.str());
  if (opts.iters < 1) throw std::invalid_argument("tv prox needs iters >= 1");
  const Index h = s.rows;
  const Index w = s.cols;
  const Index n = h * w;
  const double mu = lambda * tau;
  const Vec& b = z.values();

  FgpResult res;
  res.dual = Vec::Zero(2 * n);
  if (mu <= 0.0) {
    Vec x = b;
    project_box(x, opts.lo, opts.hi);
    res.x = DenseVector(s, std::move(x));
    return res;
  }
  if (warm && warm->size() == 2 * n) res.dual = *warm;

  Vec& p = res.dual;
  Vec r = p;
  Vec p_next(2 * n);
  Vec x(n), x_prev(n), tmp(n), grad(2 * n);
  const double step = 1.0 / (8.0 * mu);
  double t = 1.0;

  auto primal_from = [&](const Vec& q, Vec& out) {
    grad_2d_adjoint(q.data(), h, w, tmp.data());
    out = b - mu * tmp;
    project_box(out, opts.lo, opts.hi);
  };

  if (opts.tol > 0.0) primal_from(p, x_prev);
  int k = 0;
  while (k < opts.iters) {
    primal_from(r, x);
    grad_2d_forward(x.data(), h, w, grad.data());
    p_next = r + step * grad;
    project_group_ball(p_next, 2, 1.0);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    r = p_next + ((t - 1.0) / t_next) * (p_next - p);
    p.swap(p_next);
    t = t_next;
    ++k;
    if (opts.tol > 0.0) {
      primal_from(p, x);
      const double change = (x - x_prev).norm();
      x_prev.swap(x);
      if (change <= opts.tol * x_prev.norm()) break;
    }
  }
  primal_from(p, x);
  res.x = DenseVector(s, std::move(x));
  res.iterations = k;
  return res;
}

}  // namespace stochograd
