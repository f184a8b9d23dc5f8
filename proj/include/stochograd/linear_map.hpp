#pragma once

#include "stochograd/vector.hpp"

#include <Eigen/SparseCore>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace stochograd {

class LinearMap;
using LinearMapPtr = std::shared_ptr<const LinearMap>;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, std::int64_t>;

/// Bounded linear operator between two shaped spaces.
///
/// Instances are immutable once built, so apply/adjoint may be called from
/// several threads at once.
class LinearMap {
 public:
  LinearMap(Shape domain, Shape codomain) : domain_(domain), codomain_(codomain) {}
  virtual ~LinearMap() = default;

  const Shape& domain() const { return domain_; }
  const Shape& codomain() const { return codomain_; }
  Index rows() const { return codomain_.size(); }
  Index cols() const { return domain_.size(); }

  /// out = A x. `out` must already have codomain size.
  virtual void apply_into(Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const = 0;
  /// out = A* y. `out` must already have domain size.
  virtual void adjoint_into(Eigen::Ref<const Vec> y, Eigen::Ref<Vec> out) const = 0;
  /// out += alpha A* y. Sparse operators override this to touch only their support.
  virtual void adjoint_add(double alpha, Eigen::Ref<const Vec> y, Eigen::Ref<Vec> out) const;

  DenseVector apply(const DenseVector& x) const;
  DenseVector adjoint(const DenseVector& y) const;

  virtual std::string name() const = 0;

  /// Operator norm when a closed form is known.
  virtual std::optional<double> exact_norm() const { return std::nullopt; }

  /// Row-sparse representation, if the operator keeps one.
  virtual const SparseRowMatrix* sparse() const { return nullptr; }

  /// Dense matrix of the operator; only for small operators (both sizes <= 4096).
  Mat materialize() const;

 private:
  Shape domain_;
  Shape codomain_;
};

LinearMapPtr make_identity(const Shape& shape);
LinearMapPtr make_zero(const Shape& domain, const Shape& codomain);
LinearMapPtr make_dense(Mat matrix);
LinearMapPtr make_dense(Mat matrix, const Shape& domain, const Shape& codomain);
LinearMapPtr make_sparse(SparseRowMatrix matrix, const Shape& domain, const Shape& codomain,
                         std::string name = "sparse");

/// 1-D periodic convolution with the uniform kernel of odd width kappa (entries 1/kappa).
LinearMapPtr make_circulant_blur(Index d, Index kappa);

/// Forward differences with replicate boundary. Codomain is image(h, w, 2):
/// channel 0 holds horizontal differences, channel 1 vertical ones.
LinearMapPtr make_grad_2d(Index h, Index w);

/// Parallel-beam X-ray transform with exact pixel intersection lengths.
/// Angles are a*pi/n_angles; detector bins have unit spacing and are centred
/// on the rotation axis. n_det <= 0 selects ceil(sqrt(2) * max(h, w)).
LinearMapPtr make_parallel_radon(Index h, Index w, Index n_angles, Index n_det = 0);

/// Rows `rows` of `parent` (in the given order). Codomain is flat.
LinearMapPtr make_row_subset(const LinearMapPtr& parent, const std::vector<Index>& rows);

LinearMapPtr make_scaled(double alpha, const LinearMapPtr& inner);

struct BlockCell {
  enum class Kind { op, zero, identity, neg_identity };
  Kind kind = Kind::zero;
  LinearMapPtr op;

  static BlockCell of(LinearMapPtr op) { return {Kind::op, std::move(op)}; }
  static BlockCell zero() { return {Kind::zero, nullptr}; }
  static BlockCell identity() { return {Kind::identity, nullptr}; }
  static BlockCell neg_identity() { return {Kind::neg_identity, nullptr}; }
};

/// Block operator. Row/column shapes are inferred from the non-zero cells;
/// every block row and column needs at least one such cell.
LinearMapPtr make_block_operator(const std::vector<std::vector<BlockCell>>& grid);

/// Columns (u, w) with w a 2-channel field; rows [[grad, -I], [0, blockdiag(grad, grad)]].
LinearMapPtr make_tgv_operator(Index h, Index w);

/// Power-method estimate of the largest singular value.
double estimate_norm(const LinearMap& op, double tol = 1e-10, int max_iter = 2000,
                     std::uint64_t seed = 0);

/// Closed-form norm when available, power method otherwise.
double operator_norm(const LinearMap& op, std::uint64_t seed = 0);

/// Gradient kernels on a row-major h x w image; out holds 2*h*w values.
void grad_2d_forward(const double* u, Index h, Index w, double* out);
void grad_2d_adjoint(const double* p, Index h, Index w, double* out);

}  // namespace stochograd
