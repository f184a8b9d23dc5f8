#include "stochograd/functional.hpp"

#include "stochograd/random.hpp"
#include "stochograd/tv.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace stochograd {

void Functional::gradient_into(Eigen::Ref<const Vec>, Eigen::Ref<Vec>) const {
  throw CapabilityError(name() + " is not smooth");
}

void Functional::prox_into(double, Eigen::Ref<const Vec>, Eigen::Ref<Vec>, ProxState*) const {
  throw CapabilityError(name() + " is not prox-friendly");
}

void Functional::prox_conjugate_into(double sigma, Eigen::Ref<const Vec> z, Eigen::Ref<Vec> out,
                                     ProxState* warm) const {
  if (!(sigma > 0.0)) throw std::invalid_argument("conjugate prox needs sigma > 0");
  Vec p(z.size());
  prox_into(1.0 / sigma, z / sigma, p, warm);
  out = z - sigma * p;
}

DenseVector Functional::gradient(const DenseVector& x) const {
  DenseVector g(x.shape());
  gradient_into(x.values(), g.values());
  return g;
}

DenseVector Functional::prox(double tau, const DenseVector& z, ProxState* warm) const {
  if (!(tau > 0.0)) throw std::invalid_argument("prox needs tau > 0");
  DenseVector p(z.shape());
  prox_into(tau, z.values(), p.values(), warm);
  return p;
}

DenseVector Functional::prox_conjugate(double sigma, const DenseVector& z, ProxState* warm) const {
  DenseVector p(z.shape());
  prox_conjugate_into(sigma, z.values(), p.values(), warm);
  return p;
}

double huber(double t, double gamma) {
  const double a = std::abs(t);
  return a > gamma ? a : t * t / (2.0 * gamma) + gamma / 2.0;
}

double huber_derivative(double t, double gamma) {
  return std::abs(t) > gamma ? (t > 0 ? 1.0 : -1.0) : t / gamma;
}

double kl_entry(double v, double vp) {
  if (vp > 0.0 && v > 0.0) return vp - v + v * std::log(v / vp);
  if (vp > 0.0 && v == 0.0) return vp;
  return kInfinity;
}

double kl_prox_entry(double tau, double z, double v, double r) {
  const double b = z + r - tau;
  const double u = 0.5 * (b + std::sqrt(b * b + 4.0 * tau * v));
  return std::max(u, 1e-12) - r;
}

namespace {

void check_size(Index expected, Index actual, const std::string& who) {
  if (expected != actual) {
    throw ShapeError(who + ": expected size " + std::to_string(expected) + ", got " + std::to_string(actual));
  }
}

class LeastSquares final : public Functional {
 public:
  LeastSquares(Vec v, LinearMapPtr K, double weight, std::optional<double> lip)
      : v_(std::move(v)), K_(std::move(K)), weight_(weight) {
    if (K_) check_size(K_->rows(), v_.size(), "least-squares data");
    lip_ = lip ? *lip : weight_ * (K_ ? std::pow(operator_norm(*K_), 2) : 1.0);
  }

  std::string name() const override { return "least-squares"; }
  bool is_smooth() const override { return true; }
  bool is_prox_friendly() const override { return !K_; }
  std::optional<double> lipschitz() const override { return lip_; }

  double value(Eigen::Ref<const Vec> x) const override {
    if (!K_) return 0.5 * weight_ * (x - v_).squaredNorm();
    Vec r(K_->rows());
    K_->apply_into(x, r);
    return 0.5 * weight_ * (r - v_).squaredNorm();
  }

  void gradient_into(Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const override {
    if (!K_) {
      out = weight_ * (x - v_);
      return;
    }
    Vec r(K_->rows());
    K_->apply_into(x, r);
    r -= v_;
    r *= weight_;
    K_->adjoint_into(r, out);
  }

  void prox_into(double tau, Eigen::Ref<const Vec> z, Eigen::Ref<Vec> out, ProxState*) const override {
    if (K_) throw CapabilityError("least-squares with an operator has no closed-form prox");
    out = (z + tau * weight_ * v_) / (1.0 + tau * weight_);
  }

  void prox_conjugate_into(double sigma, Eigen::Ref<const Vec> z, Eigen::Ref<Vec> out, ProxState*) const override {
    if (K_) throw CapabilityError("least-squares with an operator has no closed-form prox");
    out = (z - sigma * v_) / (1.0 + sigma / weight_);
  }

 private:
  Vec v_;
  LinearMapPtr K_;
  double weight_;
  double lip_;
};

class L1 final : public Functional {
 public:
  explicit L1(double lambda) : lambda_(lambda) {
    if (lambda < 0.0) throw std::invalid_argument("l1 weight must be >= 0");
  }
  std::string name() const override { return "l1"; }
  bool is_prox_friendly() const override { return true; }
  double value(Eigen::Ref<const Vec> x) const override { return lambda_ * x.lpNorm<1>(); }
  void prox_into(double tau, Eigen::Ref<const Vec> z, Eigen::Ref<Vec> out, ProxState*) const override {
    const double t = tau * lambda_;
    out = z.unaryExpr([t](double a) { return a > t ? a - t : (a < -t ? a + t : 0.0); });
  }
  void prox_conjugate_into(double, Eigen::Ref<const Vec> z, Eigen::Ref<Vec> out, ProxState*) const override {
    out = z.cwiseMax(-lambda_).cwiseMin(lambda_);
  }

 private:
  double lambda_;
};

class GroupL1 final : public Functional {
 public:
  GroupL1(double lambda, Index channels) : lambda_(lambda), channels_(channels) {
    if (channels < 1) throw std::invalid_argument("group l1 needs channels >= 1");
  }
  std::string name() const override { return "group-l1"; }
  bool is_prox_friendly() const override { return true; }
  double value(Eigen::Ref<const Vec> x) const override {
    const Index n = pixels(x.size());
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      double sq = 0.0;
      for (Index c = 0; c < channels_; ++c) sq += x[c * n + i] * x[c * n + i];
      total += std::sqrt(sq);
    }
    return lambda_ * total;
  }
  void prox_into(double tau, Eigen::Ref<const Vec> z, Eigen::Ref<Vec> out, ProxState*) const override {
    const Index n = pixels(z.size());
    const double t = tau * lambda_;
    for (Index i = 0; i < n; ++i) {
      double sq = 0.0;
      for (Index c = 0; c < channels_; ++c) sq += z[c * n + i] * z[c * n + i];
      const double nrm = std::sqrt(sq);
      const double s = nrm > t ? 1.0 - t / nrm : 0.0;
      for (Index c = 0; c < channels_; ++c) out[c * n + i] = s * z[c * n + i];
    }
  }
  void prox_conjugate_into(double, Eigen::Ref<const Vec> z, Eigen::Ref<Vec> out, ProxState*) const override {
    pixels(z.size());
    out = z;
    project_group_ball(out, channels_, lambda_);
  }

 private:
  Index pixels(Index size) const {
    if (size % channels_ != 0) throw ShapeError("group l1 size is not a multiple of the channel count");
    return size / channels_;
  }
  double lambda_;
  Index channels_;
};

class Box final : public Functional {
 public:
  Box(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!(lo <= hi)) throw std::invalid_argument("box needs lo <= hi");
  }
  std::string name() const override { return "box"; }
  bool is_prox_friendly() const override { return true; }
  double value(Eigen::Ref<const Vec> x) const override {
    for (Index i = 0; i < x.size(); ++i) {
      if (!(x[i] >= lo_ && x[i] <= hi_)) return kInfinity;
    }
    return 0.0;
  }
  void prox_into(double, Eigen::Ref<const Vec> z, Eigen::Ref<Vec> out, ProxState*) const override {
    out = z.cwiseMax(lo_).cwiseMin(hi_);
  }

 private:
  double lo_;
  double hi_;
};

class KullbackLeibler final : public Functional {
 public:
  KullbackLeibler(Vec v, Vec r) : v_(std::move(v)), r_(r.size() ? std::move(r) : Vec::Zero(v_.size())) {
    check_size(v_.size(), r_.size(), "kl background");
    if ((v_.array() < 0.0).any() || (r_.array() < 0.0).any()) throw std::invalid_argument("kl needs v, r >= 0");
  }
  std::string name() const override { return "kl"; }
  bool is_smooth() const override { return true; }
  bool is_prox_friendly() const override { return true; }
  double value(Eigen::Ref<const Vec> x) const override {
    check_size(v_.size(), x.size(), "kl");
    double total = 0.0;
    for (Index i = 0; i < x.size(); ++i) total += kl_entry(v_[i], x[i] + r_[i]);
    return total;
  }
  void gradient_into(Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const override {
    for (Index i = 0; i < x.size(); ++i) out[i] = 1.0 - v_[i] / (x[i] + r_[i]);
  }
  void prox_into(double tau, Eigen::Ref<const Vec> z, Eigen::Ref<Vec> out, ProxState*) const override {
    check_size(v_.size(), z.size(), "kl prox");
    for (Index i = 0; i < z.size(); ++i) out[i] = kl_prox_entry(tau, z[i], v_[i], r_[i]);
  }

 private:
  Vec v_;
  Vec r_;
};

class HuberTv final : public Functional {
 public:
  HuberTv(double lambda, double gamma, Index h, Index w) : lambda_(lambda), gamma_(gamma), h_(h), w_(w) {
    if (!(gamma > 0.0)) throw std::invalid_argument("huber needs gamma > 0");
  }
  std::string name() const override { return "huber-tv"; }
  bool is_smooth() const override { return true; }
  std::optional<double> lipschitz() const override { return lambda_ * 8.0 / gamma_; }
  double value(Eigen::Ref<const Vec> x) const override {
    check_size(h_ * w_, x.size(), "huber-tv");
    const Index n = h_ * w_;
    Vec g(2 * n);
    grad_2d_forward(x.data(), h_, w_, g.data());
    double total = 0.0;
    for (Index i = 0; i < n; ++i) total += huber(std::hypot(g[i], g[n + i]), gamma_);
    return lambda_ * total;
  }
  void gradient_into(Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const override {
    const Index n = h_ * w_;
    Vec g(2 * n);
    grad_2d_forward(x.data(), h_, w_, g.data());
    for (Index i = 0; i < n; ++i) {
      const double s = lambda_ / std::max(gamma_, std::hypot(g[i], g[n + i]));
      g[i] *= s;
      g[n + i] *= s;
    }
    grad_2d_adjoint(g.data(), h_, w_, out.data());
  }

 private:
  double lambda_;
  double gamma_;
  Index h_;
  Index w_;
};

class TotalVariation final : public Functional {
 public:
  TotalVariation(double lambda, Index h, Index w, TvOptions opts) : lambda_(lambda), h_(h), w_(w), opts_(opts) {
    if (lambda < 0.0) throw std::invalid_argument("tv weight must be >= 0");
  }
  std::string name() const override { return "tv"; }
  bool is_prox_friendly() const override { return true; }
  double value(Eigen::Ref<const Vec> x) const override {
    check_size(h_ * w_, x.size(), "tv");
    if (opts_.lo && (x.array() < *opts_.lo).any()) return kInfinity;
    if (opts_.hi && (x.array() > *opts_.hi).any()) return kInfinity;
    return lambda_ * tv_value(x, h_, w_);
  }
  void prox_into(double tau, Eigen::Ref<const Vec> z, Eigen::Ref<Vec> out, ProxState* warm) const override {
    FgpOptions fo;
    fo.iters = opts_.iters;
    fo.tol = opts_.tol;
    fo.lo = opts_.lo;
    fo.hi = opts_.hi;
    const DenseVector zi(Shape::image(h_, w_), Vec(z));
    FgpResult r = tv_prox_fgp(lambda_, zi, tau, fo, warm ? &warm->dual : nullptr);
    out = r.x.values();
    if (warm) warm->dual = std::move(r.dual);
  }

 private:
  double lambda_;
  Index h_;
  Index w_;
  TvOptions opts_;
};

class ZeroFunctional final : public Functional {
 public:
  std::string name() const override { return "zero"; }
  bool is_smooth() const override { return true; }
  bool is_prox_friendly() const override { return true; }
  std::optional<double> lipschitz() const override { return 0.0; }
  double value(Eigen::Ref<const Vec>) const override { return 0.0; }
  void gradient_into(Eigen::Ref<const Vec>, Eigen::Ref<Vec> out) const override { out.setZero(); }
  void prox_into(double, Eigen::Ref<const Vec> z, Eigen::Ref<Vec> out, ProxState*) const override { out = z; }
  void prox_conjugate_into(double, Eigen::Ref<const Vec>, Eigen::Ref<Vec> out, ProxState*) const override {
    out.setZero();
  }
};

class SeparableSum final : public Functional {
 public:
  SeparableSum(std::vector<FunctionalPtr> parts, std::vector<Index> sizes)
      : parts_(std::move(parts)), sizes_(std::move(sizes)) {
    if (parts_.empty() || parts_.size() != sizes_.size()) throw std::invalid_argument("separable sum needs one size per part");
    Index off = 0;
    for (Index s : sizes_) {
      offsets_.push_back(off);
      off += s;
    }
    total_ = off;
  }
  std::string name() const override { return "separable-sum"; }
  bool is_smooth() const override {
    return std::all_of(parts_.begin(), parts_.end(), [](const auto& p) { return p->is_smooth(); });
  }
  bool is_prox_friendly() const override {
    return std::all_of(parts_.begin(), parts_.end(), [](const auto& p) { return p->is_prox_friendly(); });
  }
  std::optional<double> lipschitz() const override {
    double best = 0.0;
    for (const auto& p : parts_) {
      auto l = p->lipschitz();
      if (!l) return std::nullopt;
      best = std::max(best, *l);
    }
    return best;
  }
  double value(Eigen::Ref<const Vec> x) const override {
    check_size(total_, x.size(), "separable-sum");
    double total = 0.0;
    for (std::size_t j = 0; j < parts_.size(); ++j) total += parts_[j]->value(x.segment(offsets_[j], sizes_[j]));
    return total;
  }
  void gradient_into(Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const override {
    for (std::size_t j = 0; j < parts_.size(); ++j) {
      parts_[j]->gradient_into(x.segment(offsets_[j], sizes_[j]), out.segment(offsets_[j], sizes_[j]));
    }
  }
  void prox_into(double tau, Eigen::Ref<const Vec> z, Eigen::Ref<Vec> out, ProxState*) const override {
    check_size(total_, z.size(), "separable-sum prox");
    for (std::size_t j = 0; j < parts_.size(); ++j) {
      parts_[j]->prox_into(tau, z.segment(offsets_[j], sizes_[j]), out.segment(offsets_[j], sizes_[j]));
    }
  }
  void prox_conjugate_into(double sigma, Eigen::Ref<const Vec> z, Eigen::Ref<Vec> out, ProxState*) const override {
    check_size(total_, z.size(), "separable-sum conjugate prox");
    for (std::size_t j = 0; j < parts_.size(); ++j) {
      parts_[j]->prox_conjugate_into(sigma, z.segment(offsets_[j], sizes_[j]), out.segment(offsets_[j], sizes_[j]));
    }
  }

 private:
  std::vector<FunctionalPtr> parts_;
  std::vector<Index> sizes_;
  std::vector<Index> offsets_;
  Index total_ = 0;
};

class AffineComposed final : public Functional {
 public:
  AffineComposed(FunctionalPtr inner, LinearMapPtr A, double alpha)
      : inner_(std::move(inner)), A_(std::move(A)), alpha_(alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("affine composition needs alpha > 0");
    Pcg64 rng(0x5eed, streams::test);
    std::normal_distribution<double> nd;
    Vec y(A_->rows()), aty(A_->cols()), aaty(A_->rows());
    for (int k = 0; k < 5; ++k) {
      for (Index i = 0; i < y.size(); ++i) y[i] = nd(rng);
      A_->adjoint_into(y, aty);
      A_->apply_into(aty, aaty);
      if ((aaty - alpha_ * y).norm() > 1e-8 * (1.0 + alpha_ * y.norm())) {
        throw std::invalid_argument("operator does not satisfy A A* = alpha I");
      }
    }
  }
  std::string name() const override { return "affine-composed(" + inner_->name() + ")"; }
  bool is_smooth() const override { return inner_->is_smooth(); }
  bool is_prox_friendly() const override { return inner_->is_prox_friendly(); }
  std::optional<double> lipschitz() const override {
    if (auto l = inner_->lipschitz()) return *l * alpha_;
    return std::nullopt;
  }
  double value(Eigen::Ref<const Vec> x) const override {
    Vec ax(A_->rows());
    A_->apply_into(x, ax);
    return inner_->value(ax);
  }
  void gradient_into(Eigen::Ref<const Vec> x, Eigen::Ref<Vec> out) const override {
    Vec ax(A_->rows()), g(A_->rows());
    A_->apply_into(x, ax);
    inner_->gradient_into(ax, g);
    A_->adjoint_into(g, out);
  }
  void prox_into(double tau, Eigen::Ref<const Vec> z, Eigen::Ref<Vec> out, ProxState* warm) const override {
    Vec az(A_->rows()), p(A_->rows()), back(A_->cols());
    A_->apply_into(z, az);
    inner_->prox_into(alpha_ * tau, az, p, warm);
    p -= az;
    A_->adjoint_into(p, back);
    out = z + back / alpha_;
  }

 private:
  FunctionalPtr inner_;
  LinearMapPtr A_;
  double alpha_;
};

}  // namespace

FunctionalPtr make_least_squares(Vec v, LinearMapPtr K, double weight, std::optional<double> lipschitz) {
  return std::make_shared<LeastSquares>(std::move(v), std::move(K), weight, lipschitz);
}
FunctionalPtr make_l1(double lambda) { return std::make_shared<L1>(lambda); }
FunctionalPtr make_group_l1(double lambda, Index channels) { return std::make_shared<GroupL1>(lambda, channels); }
FunctionalPtr make_box(double lo, double hi) { return std::make_shared<Box>(lo, hi); }
FunctionalPtr make_kl(Vec v, Vec r) { return std::make_shared<KullbackLeibler>(std::move(v), std::move(r)); }
FunctionalPtr make_huber_tv(double lambda, double gamma, Index h, Index w) {
  return std::make_shared<HuberTv>(lambda, gamma, h, w);
}
FunctionalPtr make_tv(double lambda, Index h, Index w, TvOptions opts) {
  return std::make_shared<TotalVariation>(lambda, h, w, opts);
}
FunctionalPtr make_zero_functional() { return std::make_shared<ZeroFunctional>(); }
FunctionalPtr make_separable_sum(std::vector<FunctionalPtr> parts, std::vector<Index> sizes) {
  return std::make_shared<SeparableSum>(std::move(parts), std::move(sizes));
}
FunctionalPtr make_affine_composed(FunctionalPtr inner, LinearMapPtr A, double alpha) {
  return std::make_shared<AffineComposed>(std::move(inner), std::move(A), alpha);
}

}  // namespace stochograd
