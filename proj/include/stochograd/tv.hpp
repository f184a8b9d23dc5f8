#pragma once

#include "stochograd/vector.hpp"

#include <optional>

namespace stochograd {

struct FgpOptions {
  int iters = 100;
  /// Stop early once ||x_k - x_{k-1}|| <= tol * ||x_k||; 0 disables.
  double tol = 0.0;
  std::optional<double> lo;
  std::optional<double> hi;
};

struct FgpResult {
  DenseVector x;
  /// Dual field (2 channels, one unit-ball constraint per pixel); feed back as warm start.
  Vec dual;
  int iterations = 0;
};

/// Isotropic TV of an h x w image.
double tv_value(Eigen::Ref<const Vec> u, Index h, Index w);

/// Approximate prox of tau * lambda * TV (optionally restricted to a box) by
/// fast gradient projection on the dual.
FgpResult tv_prox_fgp(double lambda, const DenseVector& z, double tau, const FgpOptions& opts = {},
                      const Vec* warm = nullptr);

/// Project each pixel of a channel-major field onto the ball of radius r.
void project_group_ball(Eigen::Ref<Vec> p, Index channels, double r);

}  // namespace stochograd
