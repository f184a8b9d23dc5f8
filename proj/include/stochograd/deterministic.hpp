#pragma once

#include "stochograd/functional.hpp"
#include "stochograd/linear_map.hpp"
#include "stochograd/sampling.hpp"
#include "stochograd/trace.hpp"

#include <optional>

namespace stochograd {

enum class Momentum { none, fista, constant, nag_sc };
enum class Restart { off, function_value, gradient };

struct SolverConfig {
  double tau = 0.0;
  double sigma = 0.0;
  Momentum momentum = Momentum::fista;
  /// Momentum weight for Momentum::constant.
  double momentum_a = 0.0;
  /// Strong convexity and smoothness constants for Momentum::nag_sc.
  double mu = 0.0;
  double L = 0.0;
  Restart restart = Restart::off;
  /// PDHG variant that extrapolates the dual instead of the primal.
  bool dual_extrapolation = false;
  /// ADMM: step of the proximal x-update; 0 selects 0.99 / (tau ||A||^2).
  double admm_beta = 0.0;
  /// ADMM: linearise the x-subproblem instead of adding a proximal term.
  bool admm_linearised = false;
  /// ADMM: when A*A = alpha I the x-update is solved exactly.
  std::optional<double> admm_alpha;
  /// Smoothness constant of h used by the step-size guards; 0 reads it from h.
  double lipschitz = 0.0;
  /// ||A|| used by the step-size guards; 0 estimates it.
  double op_norm = 0.0;
  std::uint64_t seed = 0;
  Monitor monitor;
};

IterateTrace run_gd(const Functional& h, const SolverConfig& cfg, const DenseVector& x0);
IterateTrace run_nag(const Functional& h, const SolverConfig& cfg, const DenseVector& x0);
IterateTrace run_pgd(const Functional& g, const Functional& h, const SolverConfig& cfg, const DenseVector& x0);
IterateTrace run_fista(const Functional& g, const Functional& h, const SolverConfig& cfg, const DenseVector& x0);

/// min_x f(Ax) + g(x). y0 empty means zero.
IterateTrace run_pdhg(const Functional& f, const LinearMap& A, const Functional& g, const SolverConfig& cfg,
                      const DenseVector& x0, const Vec& y0 = Vec());
IterateTrace run_admm(const Functional& f, const LinearMap& A, const Functional& g, const SolverConfig& cfg,
                      const DenseVector& x0);
/// min_x f(Ax) + g(x) + h(x).
IterateTrace run_condat_vu(const Functional& f, const LinearMap& A, const Functional& g, const Functional& h,
                           const SolverConfig& cfg, const DenseVector& x0, const Vec& y0 = Vec());
IterateTrace run_pd3o(const Functional& f, const LinearMap& A, const Functional& g, const Functional& h,
                      const SolverConfig& cfg, const DenseVector& x0, const Vec& y0 = Vec());

/// Block coordinate gradient steps on blocks of `block_size` consecutive
/// coordinates, visited in the order produced by `order` (over block indices).
IterateTrace run_coordinate_descent(const Functional& h, Index block_size, Sampler& order, const SolverConfig& cfg,
                                    const DenseVector& x0);

/// Next term of the FISTA t-sequence.
double fista_t_next(double t);

/// Step-size guard messages; empty when the sufficient condition holds.
std::optional<std::string> guard_pgd(double tau, double L);
std::optional<std::string> guard_pdhg(double tau, double sigma, double norm_a);
std::optional<std::string> guard_condat_vu(double tau, double sigma, double norm_a, double L);
std::optional<std::string> guard_pd3o(double tau, double sigma, double norm_a, double L);

}  // namespace stochograd
