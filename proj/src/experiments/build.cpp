#include "stochograd/deterministic.hpp"
#include "stochograd/experiments/data.hpp"
#include "stochograd/experiments/runner.hpp"

#include <cmath>
#include <random>

namespace stochograd {

namespace {

Partition row_partition(const std::string& kind, Index n_items, Index n_subsets) {
  if (n_subsets > n_items) throw ConfigError("more subsets than rows", {"n_subsets"});
  if (kind == "staggered") return partition_staggered(n_items, n_subsets);
  Partition p;
  p.n_items = n_items;
  p.subsets.resize(static_cast<std::size_t>(n_subsets));
  for (Index j = 0; j < n_subsets; ++j) {
    const Index lo = j * n_items / n_subsets, hi = (j + 1) * n_items / n_subsets;
    for (Index r = lo; r < hi; ++r) p.subsets[static_cast<std::size_t>(j)].push_back(r);
  }
  return p;
}

DenseVector noisy(const ExperimentConfig& cfg, const DenseVector& clean) {
  if (cfg.noise == "gaussian") return add_gaussian_noise(clean, cfg.noise_sigma, cfg.seed);
  if (cfg.noise == "beer-lambert") return beer_lambert_noise(clean, cfg.I0, cfg.seed);
  return clean;
}

LinearMapPtr tridiagonal(Index d) {
  std::vector<Eigen::Triplet<double, std::int64_t>> t;
  for (Index i = 0; i < d; ++i) {
    t.emplace_back(i, i, 2.0);
    if (i + 1 < d) {
      t.emplace_back(i, i + 1, -1.0);
      t.emplace_back(i + 1, i, -1.0);
    }
  }
  SparseRowMatrix m(d, d);
  m.setFromTriplets(t.begin(), t.end());
  return make_sparse(std::move(m), Shape::flat(d), Shape::flat(d), "tridiagonal");
}

/// Regularisation weights matched to the three Beer-Lambert intensity levels.
double beer_lambert_weight(double I0) {
  if (I0 < 150.0) return 0.124;
  if (I0 < 2000.0) return 0.045;
  return 0.01;
}

void finish_finite_sum(BuiltProblem& bp, const ExperimentConfig& cfg, const LinearMapPtr& K, const Partition& rows,
                       const FunctionalPtr& g) {
  bp.problem.emplace(make_least_squares_problem(K, bp.data.values(), rows, g));
  bp.info = smoothness_info(*bp.problem, K.get(), cfg.seed);
  bp.K = K;
  bp.f = make_least_squares(bp.data.values());
  bp.A = K;
  bp.g = g;
  bp.h = make_zero_functional();
  bp.h3 = make_least_squares(bp.data.values(), K, 1.0, bp.info->L);
  if (!bp.g_reference) bp.g_reference = g;
  bp.x0 = DenseVector(bp.problem->domain());
}

}  // namespace

double BuiltProblem::objective(Eigen::Ref<const Vec> x) const {
  if (problem) return problem->objective(x);
  Vec ax(A->rows());
  A->apply_into(x, ax);
  return f->value(ax) + g->value(x) + h->value(x);
}

BuiltProblem build_problem(const ExperimentConfig& cfg) {
  validate(cfg);
  BuiltProblem bp;
  bp.experiment = cfg.experiment;

  if (cfg.experiment == "spikes-deblur") {
    if (cfg.noise == "beer-lambert") throw ConfigError("spikes-deblur takes gaussian noise only", {"noise"});
    auto K = make_circulant_blur(cfg.d, cfg.kappa);
    bp.truth = gen_sparse_spikes(cfg.d, cfg.n_spikes, cfg.seed);
    bp.data = noisy(cfg, K->apply(bp.truth));
    bp.reg = cfg.reg >= 0.0 ? cfg.reg : 0.5 * K->adjoint(bp.data).values().cwiseAbs().maxCoeff();
    auto g = make_l1(bp.reg);
    finish_finite_sum(bp, cfg, K, row_partition(cfg.partition, cfg.d, cfg.n_subsets), g);
    bp.f3 = make_zero_functional();
    bp.A3 = make_zero(bp.x0.shape(), Shape::flat(1));
    bp.g3 = g;
    return bp;
  }

  if (cfg.experiment == "tridiag-ls") {
    auto K = tridiagonal(cfg.d);
    Pcg64 rng(cfg.seed, streams::noise);
    std::normal_distribution<double> nd(0.0, 1.0);
    bp.data = DenseVector(Shape::flat(cfg.d));
    for (Index i = 0; i < cfg.d; ++i) bp.data[i] = nd(rng);
    bp.truth = DenseVector(Shape::flat(cfg.d));
    auto g = make_zero_functional();
    finish_finite_sum(bp, cfg, K, row_partition(cfg.partition, cfg.d, cfg.n_subsets), g);
    bp.f3 = make_zero_functional();
    bp.A3 = make_zero(bp.x0.shape(), Shape::flat(1));
    bp.g3 = g;
    return bp;
  }

  const Index s = cfg.size;
  bp.truth = gen_shepp_logan(s);

  if (cfg.experiment == "ct-shepp-logan") {
    auto R = make_parallel_radon(s, s, cfg.angles);
    double scale = cfg.attenuation;
    if (scale == 0.0) scale = cfg.noise == "beer-lambert" ? 4.0 / static_cast<double>(s) : 1.0;
    LinearMapPtr K = scale == 1.0 ? R : make_scaled(scale, R);
    bp.data = noisy(cfg, K->apply(bp.truth));
    if (cfg.reg >= 0.0)
      bp.reg = cfg.reg;
    else
      bp.reg = cfg.noise == "beer-lambert" ? beer_lambert_weight(cfg.I0) : 2.0;
    TvOptions tv{cfg.tv_iters, 0.0, 0.0, std::nullopt};
    auto g = make_tv(bp.reg, s, s, tv);
    bp.g_reference = make_tv(bp.reg, s, s, TvOptions{2000, 1e-12, 0.0, std::nullopt});
    if (cfg.n_subsets > cfg.angles) throw ConfigError("more subsets than angles", {"n_subsets"});
    const Partition angles = row_partition(cfg.partition, cfg.angles, cfg.n_subsets);
    finish_finite_sum(bp, cfg, K, expand_groups(angles, R->rows() / cfg.angles), g);
    bp.f3 = make_group_l1(bp.reg, 2);
    bp.A3 = make_grad_2d(s, s);
    bp.g3 = make_box(0.0, kInfinity);
    return bp;
  }

  if (cfg.noise == "beer-lambert") throw ConfigError("denoising takes gaussian noise only", {"noise"});
  bp.data = noisy(cfg, bp.truth);
  bp.reg = cfg.reg >= 0.0 ? cfg.reg : 0.1;
  if (cfg.experiment == "denoise-tv") {
    bp.f = make_group_l1(bp.reg, 2);
    bp.A = make_grad_2d(s, s);
    bp.g = make_least_squares(bp.data.values());
    bp.x0 = DenseVector(Shape::image(s, s));
  } else {
    const double alpha0 = cfg.reg2 >= 0.0 ? cfg.reg2 : 2.0 * bp.reg;
    bp.f = make_separable_sum({make_group_l1(bp.reg, 2), make_group_l1(alpha0, 4)}, {2 * s * s, 4 * s * s});
    bp.A = make_tgv_operator(s, s);
    bp.g = make_separable_sum({make_least_squares(bp.data.values()), make_zero_functional()}, {s * s, 2 * s * s});
    bp.x0 = DenseVector(Shape::image(s, s, 3));
  }
  bp.h = make_zero_functional();
  bp.g_reference = bp.g;
  bp.f3 = bp.f;
  bp.A3 = bp.A;
  bp.g3 = bp.g;
  bp.h3 = bp.h;
  return bp;
}

Reference compute_reference(const BuiltProblem& bp, double budget_passes, double tol) {
  SolverConfig c;
  c.monitor.max_passes = budget_passes;
  c.monitor.tol = tol;
  c.monitor.log_every = std::max<Index>(1, static_cast<Index>(budget_passes));
  IterateTrace tr;
  if (bp.problem) {
    c.tau = 1.0 / bp.info->L;
    c.momentum = Momentum::fista;
    c.restart = Restart::function_value;
    tr = run_fista(*bp.g_reference, *bp.h3, c, bp.x0);
  } else {
    const double na = operator_norm(*bp.A);
    c.tau = c.sigma = 0.99 / na;
    c.op_norm = na;
    tr = run_pdhg(*bp.f, *bp.A, *bp.g_reference, c, bp.x0);
  }
  Reference ref;
  ref.x = tr.x;
  ref.phi = bp.objective(tr.x.values());
  ref.passes = tr.final_passes;
  ref.stop_reason = tr.stop_reason;
  return ref;
}

}  // namespace stochograd
