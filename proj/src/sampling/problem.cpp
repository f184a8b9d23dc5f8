#include "stochograd/problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stochograd {

namespace {

class StackedMap final : public LinearMap {
 public:
  StackedMap(std::vector<LinearMapPtr> parts, Index rows)
      : LinearMap(parts.front()->domain(), Shape::flat(rows)), parts_(std::move(parts)) {}

  void apply_into(Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const override {
    Index offset = 0;
    for (const auto& p : parts_) {
      p->apply_into(x, out.segment(offset, p->rows()));
      offset += p->rows();
    }
  }
  void adjoint_into(Eigen::Ref<const Vec> y, Eigen::Ref<Vec> out) const override {
    out.setZero();
    adjoint_add(1.0, y, out);
  }
  void adjoint_add(double alpha, Eigen::Ref<const Vec> y, Eigen::Ref<Vec> out) const override {
    Index offset = 0;
    for (const auto& p : parts_) {
      p->adjoint_add(alpha, y.segment(offset, p->rows()), out);
      offset += p->rows();
    }
  }
  std::string name() const override { return "stacked"; }

 private:
  std::vector<LinearMapPtr> parts_;
};

class SmoothSum final : public Functional {
 public:
  SmoothSum(PartitionedProblem problem, std::optional<double> lip) : problem_(std::move(problem)), lip_(lip) {}
  std::string name() const override { return "smooth-sum"; }
  bool is_smooth() const override { return true; }
  std::optional<double> lipschitz() const override { return lip_; }
  double value(Eigen::Ref<const Vec> x) const override { return problem_.smooth_value(x); }
  void gradient_into(Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const override {
    problem_.full_gradient(x, out);
  }

 private:
  PartitionedProblem problem_;
  std::optional<double> lip_;
};

double outer_lipschitz(const SmoothBlock& b) {
  auto l = b.outer->lipschitz();
  if (!l) throw CapabilityError("smooth block '" + b.outer->name() + "' has no Lipschitz constant");
  return *l;
}

}  // namespace

PartitionedProblem::PartitionedProblem(Shape domain, FunctionalPtr g, std::vector<SmoothBlock> blocks)
    : domain_(domain), g_(g ? std::move(g) : make_zero_functional()), blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw std::invalid_argument("partitioned problem needs at least one block");
  for (const auto& b : blocks_) {
    if (!b.op || !b.outer) throw std::invalid_argument("smooth block needs an operator and an outer functional");
    if (!(b.op->domain() == domain_)) {
      throw ShapeError("block domain " + b.op->domain().str() + " differs from " + domain_.str());
    }
    if (!b.outer->is_smooth()) throw CapabilityError("outer functional '" + b.outer->name() + "' is not smooth");
  }
}

double PartitionedProblem::block_value(Index i, Eigen::Ref<const Vec> x) const {
  const auto& b = block(i);
  Vec ax(b.op->rows());
  b.op->apply_into(x, ax);
  return b.outer->value(ax);
}

double PartitionedProblem::smooth_value(Eigen::Ref<const Vec> x) const {
  double total = 0.0;
  for (Index i = 0; i < n(); ++i) total += block_value(i, x);
  return total;
}

double PartitionedProblem::objective(Eigen::Ref<const Vec> x) const { return smooth_value(x) + g_->value(x); }

Vec PartitionedProblem::block_dual_gradient(Index i, Eigen::Ref<const Vec> x) const {
  const auto& b = block(i);
  Vec ax(b.op->rows());
  b.op->apply_into(x, ax);
  Vec slot(ax.size());
  b.outer->gradient_into(ax, slot);
  return slot;
}

void PartitionedProblem::block_gradient(Index i, Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const {
  out.setZero();
  block_gradient_add(i, 1.0, x, out);
}

void PartitionedProblem::block_gradient_add(Index i, double alpha, Eigen::Ref<const Vec> x,
                                            Eigen::Ref<Vec> out) const {
  block(i).op->adjoint_add(alpha, block_dual_gradient(i, x), out);
}

void PartitionedProblem::full_gradient(Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const {
  out.setZero();
  for (Index i = 0; i < n(); ++i) block_gradient_add(i, 1.0, x, out);
}

FunctionalPtr PartitionedProblem::smooth_sum(std::optional<double> lipschitz) const {
  return std::make_shared<SmoothSum>(*this, lipschitz);
}

PartitionedProblem PartitionedProblem::merged() const {
  if (n() == 1) return *this;
  std::vector<LinearMapPtr> ops;
  std::vector<FunctionalPtr> outers;
  std::vector<Index> sizes;
  for (const auto& b : blocks_) {
    ops.push_back(b.op);
    outers.push_back(b.outer);
    sizes.push_back(b.op->rows());
  }
  auto stacked = make_stacked(ops);
  return PartitionedProblem(domain_, g_, {{stacked, make_separable_sum(outers, sizes)}});
}

LinearMapPtr make_stacked(const std::vector<LinearMapPtr>& parts) {
  if (parts.empty()) throw std::invalid_argument("stacked operator needs at least one part");
  Index rows = 0;
  for (const auto& p : parts) {
    if (!(p->domain() == parts.front()->domain())) throw ShapeError("stacked parts need a common domain");
    rows += p->rows();
  }
  return std::make_shared<StackedMap>(parts, rows);
}

SmoothnessInfo smoothness_info(const PartitionedProblem& problem, const LinearMap* full, std::uint64_t seed) {
  SmoothnessInfo info;
  for (Index i = 0; i < problem.n(); ++i) {
    const auto& b = problem.block(i);
    const double nrm = operator_norm(*b.op, seed);
    info.L_i.push_back(outer_lipschitz(b) * nrm * nrm);
  }
  info.L_max = *std::max_element(info.L_i.begin(), info.L_i.end());
  if (full) {
    const double nrm = operator_norm(*full, seed);
    info.L = outer_lipschitz(problem.block(0)) * nrm * nrm;
  } else if (problem.n() == 1) {
    info.L = info.L_i.front();
  } else {
    // Scale each block by sqrt(L_outer) so ||B||^2 bounds the Hessian of sum_i h_i.
    std::vector<LinearMapPtr> parts;
    for (const auto& b : problem.blocks()) parts.push_back(make_scaled(std::sqrt(outer_lipschitz(b)), b.op));
    const double nrm = estimate_norm(*make_stacked(parts), 1e-10, 5000, seed);
    info.L = nrm * nrm;
  }
  info.upsilon = info.L_max > 0.0 ? info.L / info.L_max : 0.0;
  return info;
}

PartitionedProblem make_least_squares_problem(const LinearMapPtr& K, const Vec& v, const Partition& rows,
                                              FunctionalPtr g, double weight) {
  if (v.size() != K->rows()) throw ShapeError("least-squares data size differs from operator rows");
  if (rows.n_items != K->rows()) throw std::invalid_argument("row partition does not match operator rows");
  std::vector<SmoothBlock> blocks;
  for (const auto& subset : rows.subsets) {
    Vec vi(static_cast<Index>(subset.size()));
    for (std::size_t j = 0; j < subset.size(); ++j) vi[static_cast<Index>(j)] = v[subset[j]];
    blocks.push_back({make_row_subset(K, subset), make_least_squares(std::move(vi), nullptr, weight)});
  }
  return PartitionedProblem(K->domain(), std::move(g), std::move(blocks));
}

}  // namespace stochograd
