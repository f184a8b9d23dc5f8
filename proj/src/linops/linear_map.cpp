#include "stochograd/linear_map.hpp"

#include "stochograd/random.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>

namespace stochograd {

void LinearMap::adjoint_add(double alpha, Eigen::Ref<const Vec> y, Eigen::Ref<Vec> out) const {
  Vec tmp(cols());
  adjoint_into(y, tmp);
  out.noalias() += alpha * tmp;
}

DenseVector LinearMap::apply(const DenseVector& x) const {
  require_same_shape(domain_, x.shape(), (name() + " apply").c_str());
  DenseVector out(codomain_);
  apply_into(x.values(), out.values());
  return out;
}

DenseVector LinearMap::adjoint(const DenseVector& y) const {
  require_same_shape(codomain_, y.shape(), (name() + " adjoint").c_str());
  DenseVector out(domain_);
  adjoint_into(y.values(), out.values());
  return out;
}

Mat LinearMap::materialize() const {
  if (rows() > 4096 || cols() > 4096) throw ShapeError("materialize is limited to sizes <= 4096");
  Mat m(rows(), cols());
  Vec e = Vec::Zero(cols());
  Vec col(rows());
  for (Index j = 0; j < cols(); ++j) {
    e[j] = 1.0;
    apply_into(e, col);
    m.col(j) = col;
    e[j] = 0.0;
  }
  return m;
}

namespace {

class IdentityMap final : public LinearMap {
 public:
  explicit IdentityMap(const Shape& s) : LinearMap(s, s) {}
  void apply_into(Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const override { out = x; }
  void adjoint_into(Eigen::Ref<const Vec> y, Eigen::Ref<Vec> out) const override { out = y; }
  std::string name() const override { return "identity"; }
  std::optional<double> exact_norm() const override { return 1.0; }
};

class ZeroMap final : public LinearMap {
 public:
  ZeroMap(const Shape& d, const Shape& c) : LinearMap(d, c) {}
  void apply_into(Eigen::Ref<const Vec>, Eigen::Ref<Vec> out) const override { out.setZero(); }
  void adjoint_into(Eigen::Ref<const Vec>, Eigen::Ref<Vec> out) const override { out.setZero(); }
  void adjoint_add(double, Eigen::Ref<const Vec>, Eigen::Ref<Vec>) const override {}
  std::string name() const override { return "zero"; }
  std::optional<double> exact_norm() const override { return 0.0; }
};

class DenseMap final : public LinearMap {
 public:
  DenseMap(Mat m, const Shape& d, const Shape& c) : LinearMap(d, c), m_(std::move(m)) {
    if (m_.rows() != c.size() || m_.cols() != d.size()) throw ShapeError("dense matrix does not match shapes");
  }
  void apply_into(Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const override { out.noalias() = m_ * x; }
  void adjoint_into(Eigen::Ref<const Vec> y, Eigen::Ref<Vec> out) const override {
    out.noalias() = m_.transpose() * y;
  }
  std::string name() const override { return "dense-matrix"; }

 private:
  Mat m_;
};

class SparseMap final : public LinearMap {
 public:
  SparseMap(SparseRowMatrix m, const Shape& d, const Shape& c, std::string name)
      : LinearMap(d, c), m_(std::move(m)), name_(std::move(name)) {
    if (m_.rows() != c.size() || m_.cols() != d.size()) throw ShapeError("sparse matrix does not match shapes");
    m_.makeCompressed();
    norm_ = disjoint_row_norm();
  }

  void apply_into(Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const override { out.noalias() = m_ * x; }

  void adjoint_into(Eigen::Ref<const Vec> y, Eigen::Ref<Vec> out) const override {
    out.setZero();
    adjoint_add(1.0, y, out);
  }

  void adjoint_add(double alpha, Eigen::Ref<const Vec> y, Eigen::Ref<Vec> out) const override {
    for (Index r = 0; r < m_.outerSize(); ++r) {
      const double yr = alpha * y[r];
      if (yr == 0.0) continue;
      for (SparseRowMatrix::InnerIterator it(m_, r); it; ++it) out[it.col()] += yr * it.value();
    }
  }

  std::string name() const override { return name_; }
  std::optional<double> exact_norm() const override { return norm_; }
  const SparseRowMatrix* sparse() const override { return &m_; }

 private:
  // With pairwise disjoint row supports A A* is diagonal, so the norm is the largest row norm.
  std::optional<double> disjoint_row_norm() const {
    std::vector<char> used(static_cast<std::size_t>(m_.cols()), 0);
    double best = 0.0;
    for (Index r = 0; r < m_.outerSize(); ++r) {
      double sq = 0.0;
      for (SparseRowMatrix::InnerIterator it(m_, r); it; ++it) {
        if (it.value() == 0.0) continue;
        auto& flag = used[static_cast<std::size_t>(it.col())];
        if (flag) return std::nullopt;
        flag = 1;
        sq += it.value() * it.value();
      }
      best = std::max(best, sq);
    }
    return std::sqrt(best);
  }

  SparseRowMatrix m_;
  std::string name_;
  std::optional<double> norm_;
};

class CirculantBlur final : public LinearMap {
 public:
  CirculantBlur(Index d, Index kappa) : LinearMap(Shape::flat(d), Shape::flat(d)), d_(d), kappa_(kappa) {
    std::vector<Eigen::Triplet<double, std::int64_t>> trips;
    trips.reserve(static_cast<std::size_t>(d * kappa));
    const Index r = (kappa - 1) / 2;
    for (Index i = 0; i < d; ++i) {
      for (Index j = -r; j <= r; ++j) trips.emplace_back(i, ((i + j) % d + d) % d, 1.0 / static_cast<double>(kappa));
    }
    sparse_.resize(d, d);
    sparse_.setFromTriplets(trips.begin(), trips.end());
    sparse_.makeCompressed();
  }

  // The kernel is symmetric, so the adjoint is the same running-sum convolution.
  void apply_into(Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const override { convolve(x, out); }
  void adjoint_into(Eigen::Ref<const Vec> y, Eigen::Ref<Vec> out) const override { convolve(y, out); }

  std::string name() const override { return "circulant-blur"; }
  std::optional<double> exact_norm() const override { return 1.0; }
  const SparseRowMatrix* sparse() const override { return &sparse_; }

 private:
  void convolve(const Eigen::Ref<const Vec>& x, Eigen::Ref<Vec> out) const {
    const Index r = (kappa_ - 1) / 2;
    auto at = [&](Index i) { return x[((i % d_) + d_) % d_]; };
    double window = 0.0;
    for (Index j = -r; j <= r; ++j) window += at(j);
    const double scale = 1.0 / static_cast<double>(kappa_);
    for (Index i = 0; i < d_; ++i) {
      out[i] = window * scale;
      window += at(i + r + 1) - at(i - r);
    }
  }

  Index d_;
  Index kappa_;
  SparseRowMatrix sparse_;
};

class Grad2d final : public LinearMap {
 public:
  Grad2d(Index h, Index w) : LinearMap(Shape::image(h, w), Shape::image(h, w, 2)), h_(h), w_(w) {}
  void apply_into(Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const override {
    grad_2d_forward(x.data(), h_, w_, out.data());
  }
  void adjoint_into(Eigen::Ref<const Vec> y, Eigen::Ref<Vec> out) const override {
    grad_2d_adjoint(y.data(), h_, w_, out.data());
  }
  std::string name() const override { return "grad-2d"; }

 private:
  Index h_;
  Index w_;
};

class RowSubsetMap final : public LinearMap {
 public:
  RowSubsetMap(LinearMapPtr parent, std::vector<Index> rows)
      : LinearMap(parent->domain(), Shape::flat(static_cast<Index>(rows.size()))),
        parent_(std::move(parent)),
        rows_(std::move(rows)) {}

  void apply_into(Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const override {
    Vec full(parent_->rows());
    parent_->apply_into(x, full);
    for (std::size_t k = 0; k < rows_.size(); ++k) out[static_cast<Index>(k)] = full[rows_[k]];
  }

  void adjoint_into(Eigen::Ref<const Vec> y, Eigen::Ref<Vec> out) const override {
    Vec full = Vec::Zero(parent_->rows());
    for (std::size_t k = 0; k < rows_.size(); ++k) full[rows_[k]] += y[static_cast<Index>(k)];
    parent_->adjoint_into(full, out);
  }

  std::string name() const override { return "row-subset(" + parent_->name() + ")"; }

 private:
  LinearMapPtr parent_;
  std::vector<Index> rows_;
};

class ScaledMap final : public LinearMap {
 public:
  ScaledMap(double alpha, LinearMapPtr inner)
      : LinearMap(inner->domain(), inner->codomain()), alpha_(alpha), inner_(std::move(inner)) {}
  void apply_into(Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const override {
    inner_->apply_into(x, out);
    out *= alpha_;
  }
  void adjoint_into(Eigen::Ref<const Vec> y, Eigen::Ref<Vec> out) const override {
    inner_->adjoint_into(y, out);
    out *= alpha_;
  }
  void adjoint_add(double a, Eigen::Ref<const Vec> y, Eigen::Ref<Vec> out) const override {
    inner_->adjoint_add(a * alpha_, y, out);
  }
  std::string name() const override { return "scaled(" + inner_->name() + ")"; }
  std::optional<double> exact_norm() const override {
    if (auto n = inner_->exact_norm()) return std::abs(alpha_) * *n;
    return std::nullopt;
  }

 private:
  double alpha_;
  LinearMapPtr inner_;
};

// Images of equal size stack along channels, anything else flattens.
Shape stacked_shape(const std::vector<Shape>& parts) {
  if (parts.size() == 1) return parts.front();
  const Shape& first = parts.front();
  bool images = true;
  Index channels = 0;
  for (const auto& s : parts) {
    images = images && s.is_image() && s.rows == first.rows && s.cols == first.cols;
    channels += s.channels;
  }
  if (images) return Shape::image(first.rows, first.cols, channels);
  Index total = 0;
  for (const auto& s : parts) total += s.size();
  return Shape::flat(total);
}

class BlockMap final : public LinearMap {
 public:
  BlockMap(std::vector<std::vector<BlockCell>> grid, std::vector<Shape> row_shapes, std::vector<Shape> col_shapes)
      : LinearMap(stacked_shape(col_shapes), stacked_shape(row_shapes)),
        grid_(std::move(grid)),
        row_shapes_(std::move(row_shapes)),
        col_shapes_(std::move(col_shapes)) {
    Index off = 0;
    for (const auto& s : row_shapes_) {
      row_off_.push_back(off);
      off += s.size();
    }
    off = 0;
    for (const auto& s : col_shapes_) {
      col_off_.push_back(off);
      off += s.size();
    }
  }

  void apply_into(Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const override {
    out.setZero();
    for (std::size_t r = 0; r < grid_.size(); ++r) {
      auto dst = out.segment(row_off_[r], row_shapes_[r].size());
      for (std::size_t c = 0; c < grid_[r].size(); ++c) {
        const auto src = x.segment(col_off_[c], col_shapes_[c].size());
        const auto& cell = grid_[r][c];
        switch (cell.kind) {
          case BlockCell::Kind::op: {
            Vec tmp(dst.size());
            cell.op->apply_into(src, tmp);
            dst += tmp;
            break;
          }
          case BlockCell::Kind::identity: dst += src; break;
          case BlockCell::Kind::neg_identity: dst -= src; break;
          case BlockCell::Kind::zero: break;
        }
      }
    }
  }

  void adjoint_into(Eigen::Ref<const Vec> y, Eigen::Ref<Vec> out) const override {
    out.setZero();
    for (std::size_t r = 0; r < grid_.size(); ++r) {
      const auto src = y.segment(row_off_[r], row_shapes_[r].size());
      for (std::size_t c = 0; c < grid_[r].size(); ++c) {
        auto dst = out.segment(col_off_[c], col_shapes_[c].size());
        const auto& cell = grid_[r][c];
        switch (cell.kind) {
          case BlockCell::Kind::op: cell.op->adjoint_add(1.0, src, dst); break;
          case BlockCell::Kind::identity: dst += src; break;
          case BlockCell::Kind::neg_identity: dst -= src; break;
          case BlockCell::Kind::zero: break;
        }
      }
    }
  }

  std::string name() const override { return "block"; }

 private:
  std::vector<std::vector<BlockCell>> grid_;
  std::vector<Shape> row_shapes_;
  std::vector<Shape> col_shapes_;
  std::vector<Index> row_off_;
  std::vector<Index> col_off_;
};

}  // namespace

LinearMapPtr make_identity(const Shape& shape) { return std::make_shared<IdentityMap>(shape); }

LinearMapPtr make_zero(const Shape& domain, const Shape& codomain) {
  return std::make_shared<ZeroMap>(domain, codomain);
}

LinearMapPtr make_dense(Mat matrix) {
  const Shape d = Shape::flat(matrix.cols());
  const Shape c = Shape::flat(matrix.rows());
  return std::make_shared<DenseMap>(std::move(matrix), d, c);
}

LinearMapPtr make_dense(Mat matrix, const Shape& domain, const Shape& codomain) {
  return std::make_shared<DenseMap>(std::move(matrix), domain, codomain);
}

LinearMapPtr make_sparse(SparseRowMatrix matrix, const Shape& domain, const Shape& codomain, std::string name) {
  return std::make_shared<SparseMap>(std::move(matrix), domain, codomain, std::move(name));
}

LinearMapPtr make_circulant_blur(Index d, Index kappa) {
  if (d < 1) throw ShapeError("blur needs d >= 1");
  if (kappa < 1 || kappa > d || kappa % 2 == 0) {
    throw std::invalid_argument("blur kernel width must be odd and in [1, d], got " + std::to_string(kappa));
  }
  return std::make_shared<CirculantBlur>(d, kappa);
}

LinearMapPtr make_grad_2d(Index h, Index w) {
  if (h < 2 || w < 2) throw ShapeError("grad-2d needs h, w >= 2");
  return std::make_shared<Grad2d>(h, w);
}

LinearMapPtr make_parallel_radon(Index h, Index w, Index n_angles, Index n_det) {
  if (h < 1 || w < 1 || n_angles < 1) throw ShapeError("radon needs positive sizes");
  if (n_det <= 0) n_det = static_cast<Index>(std::ceil(std::numbers::sqrt2 * static_cast<double>(std::max(h, w))));

  const double half_w = 0.5 * static_cast<double>(w);
  const double half_h = 0.5 * static_cast<double>(h);
  std::vector<Eigen::Triplet<double, std::int64_t>> trips;
  std::vector<double> ts;
  std::vector<std::pair<Index, double>> row;

  for (Index a = 0; a < n_angles; ++a) {
    const double theta = std::numbers::pi * static_cast<double>(a) / static_cast<double>(n_angles);
    double c = std::cos(theta);
    double s = std::sin(theta);
    // Ray direction (-sin, cos); tiny components are snapped to zero so
    // axis-aligned rays do not pick up spurious crossings.
    double dx = -s;
    double dy = c;
    if (std::abs(dx) < 1e-12) dx = 0.0;
    if (std::abs(dy) < 1e-12) dy = 0.0;
    if (std::abs(c) < 1e-12) c = 0.0;
    if (std::abs(s) < 1e-12) s = 0.0;

    for (Index b = 0; b < n_det; ++b) {
      const double off = static_cast<double>(b) - 0.5 * static_cast<double>(n_det - 1);
      const double px = off * c;
      const double py = off * s;

      double t_lo = -std::numeric_limits<double>::infinity();
      double t_hi = std::numeric_limits<double>::infinity();
      auto clip = [&](double p, double d, double lo, double hi) {
        if (d == 0.0) {
          if (p < lo || p > hi) t_lo = std::numeric_limits<double>::infinity();
          return;
        }
        double t0 = (lo - p) / d;
        double t1 = (hi - p) / d;
        if (t0 > t1) std::swap(t0, t1);
        t_lo = std::max(t_lo, t0);
        t_hi = std::min(t_hi, t1);
      };
      clip(px, dx, -half_w, half_w);
      clip(py, dy, -half_h, half_h);
      if (!(t_lo < t_hi)) continue;

      ts.clear();
      ts.push_back(t_lo);
      ts.push_back(t_hi);
      if (dx != 0.0) {
        for (Index k = 0; k <= w; ++k) {
          const double t = (static_cast<double>(k) - half_w - px) / dx;
          if (t > t_lo && t < t_hi) ts.push_back(t);
        }
      }
      if (dy != 0.0) {
        for (Index k = 0; k <= h; ++k) {
          const double t = (static_cast<double>(k) - half_h - py) / dy;
          if (t > t_lo && t < t_hi) ts.push_back(t);
        }
      }
      std::sort(ts.begin(), ts.end());

      row.clear();
      for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
        const double len = ts[k + 1] - ts[k];
        if (len <= 1e-14) continue;
        const double tm = 0.5 * (ts[k] + ts[k + 1]);
        const double x = px + tm * dx;
        const double y = py + tm * dy;
        const auto j = static_cast<Index>(std::floor(x + half_w));
        const auto i = static_cast<Index>(std::floor(half_h - y));
        if (i < 0 || i >= h || j < 0 || j >= w) continue;
        row.emplace_back(i * w + j, len);
      }
      std::sort(row.begin(), row.end());
      const Index r = a * n_det + b;
      for (std::size_t k = 0; k < row.size();) {
        Index col = row[k].first;
        double sum = 0.0;
        while (k < row.size() && row[k].first == col) sum += row[k++].second;
        trips.emplace_back(r, col, sum);
      }
    }
  }

  SparseRowMatrix m(n_angles * n_det, h * w);
  m.setFromTriplets(trips.begin(), trips.end());
  return std::make_shared<SparseMap>(std::move(m), Shape::image(h, w), Shape::image(n_angles, n_det),
                                     "parallel-radon");
}

LinearMapPtr make_row_subset(const LinearMapPtr& parent, const std::vector<Index>& rows) {
  for (Index r : rows) {
    if (r < 0 || r >= parent->rows()) throw ShapeError("row index out of range in row subset");
  }
  if (const auto* sp = parent->sparse()) {
    std::vector<Eigen::Triplet<double, std::int64_t>> trips;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      for (SparseRowMatrix::InnerIterator it(*sp, rows[k]); it; ++it) {
        trips.emplace_back(static_cast<Index>(k), it.col(), it.value());
      }
    }
    SparseRowMatrix m(static_cast<Index>(rows.size()), parent->cols());
    m.setFromTriplets(trips.begin(), trips.end());
    return std::make_shared<SparseMap>(std::move(m), parent->domain(), Shape::flat(static_cast<Index>(rows.size())),
                                       "row-subset(" + parent->name() + ")");
  }
  return std::make_shared<RowSubsetMap>(parent, rows);
}

LinearMapPtr make_scaled(double alpha, const LinearMapPtr& inner) { return std::make_shared<ScaledMap>(alpha, inner); }

LinearMapPtr make_block_operator(const std::vector<std::vector<BlockCell>>& grid) {
  if (grid.empty() || grid.front().empty()) throw ShapeError("block operator needs a non-empty grid");
  const std::size_t nr = grid.size();
  const std::size_t nc = grid.front().size();
  for (const auto& row : grid) {
    if (row.size() != nc) throw ShapeError("block operator rows have different lengths");
  }

  std::vector<std::optional<Shape>> rs(nr), cs(nc);
  auto assign = [](std::optional<Shape>& slot, const Shape& s, const char* what) {
    if (slot && !(*slot == s)) throw ShapeError(std::string("inconsistent block ") + what + " shapes");
    bool changed = !slot;
    slot = s;
    return changed;
  };
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t c = 0; c < nc; ++c) {
      const auto& cell = grid[r][c];
      if (cell.kind == BlockCell::Kind::op) {
        if (!cell.op) throw ShapeError("block op cell without operator");
        assign(rs[r], cell.op->codomain(), "row");
        assign(cs[c], cell.op->domain(), "column");
      }
    }
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t r = 0; r < nr; ++r) {
      for (std::size_t c = 0; c < nc; ++c) {
        const auto k = grid[r][c].kind;
        if (k != BlockCell::Kind::identity && k != BlockCell::Kind::neg_identity) continue;
        if (cs[c]) changed |= assign(rs[r], *cs[c], "row");
        if (rs[r]) changed |= assign(cs[c], *rs[r], "column");
      }
    }
  }

  std::vector<Shape> row_shapes, col_shapes;
  for (auto& s : rs) {
    if (!s) throw ShapeError("block row shape cannot be inferred");
    row_shapes.push_back(*s);
  }
  for (auto& s : cs) {
    if (!s) throw ShapeError("block column shape cannot be inferred");
    col_shapes.push_back(*s);
  }
  return std::make_shared<BlockMap>(grid, std::move(row_shapes), std::move(col_shapes));
}

LinearMapPtr make_tgv_operator(Index h, Index w) {
  auto grad = make_grad_2d(h, w);
  auto grad_field = make_block_operator({{BlockCell::of(grad), BlockCell::zero()},
                                         {BlockCell::zero(), BlockCell::of(grad)}});
  return make_block_operator({{BlockCell::of(grad), BlockCell::neg_identity()},
                              {BlockCell::zero(), BlockCell::of(grad_field)}});
}

double estimate_norm(const LinearMap& op, double tol, int max_iter, std::uint64_t seed) {
  if (!(tol > 0.0) || max_iter < 1) throw std::invalid_argument("estimate_norm needs tol > 0 and max_iter >= 1");
  Pcg64 rng(seed, streams::power_method);
  Vec x(op.cols());
  for (Index i = 0; i < x.size(); ++i) x[i] = 2.0 * rng.uniform() - 1.0;
  Vec ax(op.rows());
  double rho_prev = 0.0;
  double rho = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const double nx = x.norm();
    if (nx == 0.0) return 0.0;
    x /= nx;
    op.apply_into(x, ax);
    rho = ax.squaredNorm();
    if (rho == 0.0) return 0.0;
    if (it > 0 && std::abs(rho - rho_prev) <= tol * rho) break;
    rho_prev = rho;
    op.adjoint_into(ax, x);
  }
  return std::sqrt(rho);
}

double operator_norm(const LinearMap& op, std::uint64_t seed) {
  if (auto n = op.exact_norm()) return *n;
  return estimate_norm(op, 1e-10, 5000, seed);
}

void grad_2d_forward(const double* u, Index h, Index w, double* out) {
  const Index n = h * w;
  double* dx = out;
  double* dy = out + n;
  for (Index i = 0; i < h; ++i) {
    const double* row = u + i * w;
    for (Index j = 0; j + 1 < w; ++j) dx[i * w + j] = row[j + 1] - row[j];
    dx[i * w + w - 1] = 0.0;
  }
  for (Index i = 0; i + 1 < h; ++i) {
    for (Index j = 0; j < w; ++j) dy[i * w + j] = u[(i + 1) * w + j] - u[i * w + j];
  }
  for (Index j = 0; j < w; ++j) dy[(h - 1) * w + j] = 0.0;
}

void grad_2d_adjoint(const double* p, Index h, Index w, double* out) {
  const Index n = h * w;
  const double* px = p;
  const double* py = p + n;
  for (Index i = 0; i < h; ++i) {
    for (Index j = 0; j < w; ++j) {
      double v = 0.0;
      if (j + 1 < w) v -= px[i * w + j];
      if (j > 0) v += px[i * w + j - 1];
      if (i + 1 < h) v -= py[i * w + j];
      if (i > 0) v += py[(i - 1) * w + j];
      out[i * w + j] = v;
    }
  }
}

}  // namespace stochograd
