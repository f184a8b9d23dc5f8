#pragma once

#include "stochograd/functional.hpp"
#include "stochograd/linear_map.hpp"
#include "stochograd/sampling.hpp"

#include <vector>

namespace stochograd {

/// One summand h_i(x) = outer(A_i x) of the smooth part.
struct SmoothBlock {
  LinearMapPtr op;
  FunctionalPtr outer;
};

struct SmoothnessInfo {
  double L = 0.0;
  std::vector<double> L_i;
  double L_max = 0.0;
  /// Stochastic acceleration factor L / L_max.
  double upsilon = 0.0;
};

/// Phi(x) = sum_i outer_i(A_i x) + g(x).
///
/// The same blocks double as the dual blocks (f_i, A_i) of the saddle-point
/// form used by stochastic primal-dual methods.
class PartitionedProblem {
 public:
  PartitionedProblem(Shape domain, FunctionalPtr g, std::vector<SmoothBlock> blocks);

  Index n() const { return static_cast<Index>(blocks_.size()); }
  const Shape& domain() const { return domain_; }
  Index dim() const { return domain_.size(); }
  const FunctionalPtr& g() const { return g_; }
  const SmoothBlock& block(Index i) const { return blocks_[static_cast<std::size_t>(i)]; }
  const std::vector<SmoothBlock>& blocks() const { return blocks_; }

  double block_value(Index i, Eigen::Ref<const Vec> x) const;
  double smooth_value(Eigen::Ref<const Vec> x) const;
  double objective(Eigen::Ref<const Vec> x) const;

  /// out = grad h_i(x).
  void block_gradient(Index i, Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const;
  /// out += alpha * grad h_i(x).
  void block_gradient_add(Index i, double alpha, Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const;
  /// slot = grad outer_i(A_i x), the codomain-side factor of grad h_i.
  Vec block_dual_gradient(Index i, Eigen::Ref<const Vec> x) const;
  /// out = sum_i grad h_i(x).
  void full_gradient(Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const;

  /// h = sum_i h_i as a smooth functional; Lipschitz constant from `info` when given.
  FunctionalPtr smooth_sum(std::optional<double> lipschitz = std::nullopt) const;

  /// Single-block problem with the same g and smooth part.
  PartitionedProblem merged() const;

 private:
  Shape domain_;
  FunctionalPtr g_;
  std::vector<SmoothBlock> blocks_;
};

/// Stacked operator [A_1; ...; A_n] with a flat codomain.
LinearMapPtr make_stacked(const std::vector<LinearMapPtr>& parts);

/// L_i = L(outer_i) ||A_i||^2; L from `full` (the unpartitioned operator, with
/// the outer constant of block 0) when given, else from the stacked blocks.
SmoothnessInfo smoothness_info(const PartitionedProblem& problem, const LinearMap* full = nullptr,
                               std::uint64_t seed = 0);

/// Least-squares blocks 0.5 * w * ||K_i x - v_i||^2 over a row partition of K.
PartitionedProblem make_least_squares_problem(const LinearMapPtr& K, const Vec& v, const Partition& rows,
                                              FunctionalPtr g, double weight = 1.0);

}  // namespace stochograd
