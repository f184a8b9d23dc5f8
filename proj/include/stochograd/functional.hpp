#pragma once

#include "stochograd/linear_map.hpp"
#include "stochograd/vector.hpp"

#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stochograd {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Raised when a functional is asked for a gradient or prox it does not provide.
class CapabilityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Caller-owned warm-start data for iterative proxes (the TV dual field).
struct ProxState {
  Vec dual;
};

/// Proper convex lower semicontinuous functional with values in R U {+inf}.
class Functional {
 public:
  virtual ~Functional() = default;

  virtual std::string name() const = 0;
  virtual bool is_smooth() const { return false; }
  virtual bool is_prox_friendly() const { return false; }
  /// Lipschitz constant of the gradient, when known.
  virtual std::optional<double> lipschitz() const { return std::nullopt; }

  virtual double value(Eigen::Ref<const Vec> x) const = 0;
  virtual void gradient_into(Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const;
  virtual void prox_into(double tau, Eigen::Ref<const Vec> z, Eigen::Ref<Vec> out, ProxState* warm = nullptr) const;
  /// prox of sigma F*; the default goes through the Moreau identity.
  virtual void prox_conjugate_into(double sigma, Eigen::Ref<const Vec> z, Eigen::Ref<Vec> out,
                                   ProxState* warm = nullptr) const;

  double eval(const DenseVector& x) const { return value(x.values()); }
  DenseVector gradient(const DenseVector& x) const;
  DenseVector prox(double tau, const DenseVector& z, ProxState* warm = nullptr) const;
  DenseVector prox_conjugate(double sigma, const DenseVector& z, ProxState* warm = nullptr) const;
};

using FunctionalPtr = std::shared_ptr<const Functional>;

/// weight/2 * ||K x - v||^2; K = nullptr means the identity.
FunctionalPtr make_least_squares(Vec v, LinearMapPtr K = nullptr, double weight = 1.0,
                                 std::optional<double> lipschitz = std::nullopt);
/// lambda * ||x||_1
FunctionalPtr make_l1(double lambda);
/// lambda * sum_p ||(x_{c,p})_c||_2 for a channel-major field with `channels` channels.
FunctionalPtr make_group_l1(double lambda, Index channels);
/// Indicator of [lo, hi]^d.
FunctionalPtr make_box(double lo, double hi);
/// sum_i KL(v_i | x_i + r_i); r empty means no background.
FunctionalPtr make_kl(Vec v, Vec r = Vec());
/// lambda * sum_p h_gamma(||(grad u)_p||) on an h x w image.
FunctionalPtr make_huber_tv(double lambda, double gamma, Index h, Index w);
struct TvOptions {
  int iters = 100;
  double tol = 0.0;
  std::optional<double> lo;
  std::optional<double> hi;
};
/// lambda * isotropic TV plus an optional box constraint; prox by FGP.
FunctionalPtr make_tv(double lambda, Index h, Index w, TvOptions opts = {});
FunctionalPtr make_zero_functional();
/// F(x) = sum_j F_j(x_j) over consecutive blocks of the given sizes.
FunctionalPtr make_separable_sum(std::vector<FunctionalPtr> parts, std::vector<Index> sizes);
/// F(A x) with A A* = alpha I, checked at construction.
FunctionalPtr make_affine_composed(FunctionalPtr inner, LinearMapPtr A, double alpha);

/// Huber function and its derivative.
double huber(double t, double gamma);
double huber_derivative(double t, double gamma);

/// KL(v | vp) per the three-case table.
double kl_entry(double v, double vp);

/// Positive root u of u^2 + (tau - z - r) u - tau v = 0, floored at 1e-12; the KL prox is u - r.
double kl_prox_entry(double tau, double z, double v, double r);

}  // namespace stochograd
