#include "stochograd/deterministic.hpp"
#include "stochograd/experiments/runner.hpp"
#include "stochograd/stochastic.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <thread>

namespace stochograd {

namespace {

bool is_stochastic(const std::string& a) {
  for (const char* s : {"sgd", "sag", "saga", "svrg", "loopless-svrg", "acc-saga", "acc-svrg", "spdhg", "diag-accum",
                        "adam"})
    if (a == s) return true;
  return false;
}

const PartitionedProblem& need_problem(const BuiltProblem& bp, const std::string& algorithm) {
  if (!bp.problem) throw ConfigError(algorithm + " needs a finite-sum experiment", {"algorithm"});
  return *bp.problem;
}

Momentum parse_momentum(const std::string& s) {
  if (s == "none") return Momentum::none;
  if (s == "constant") return Momentum::constant;
  if (s == "nag-sc") return Momentum::nag_sc;
  return Momentum::fista;
}

Restart parse_restart(const std::string& s) {
  if (s == "function-value") return Restart::function_value;
  if (s == "gradient") return Restart::gradient;
  return Restart::off;
}

SamplerKind sampler_of(const std::string& s) {
  if (auto k = parse_sampler_kind(s)) return *k;
  throw ConfigError("unknown sampler " + s, {"sampler"});
}

Monitor make_monitor(const ExperimentConfig& cfg, const BuiltProblem& bp, const std::optional<Reference>& ref) {
  Monitor m;
  m.max_passes = cfg.budget_passes;
  m.tol = cfg.tol;
  m.log_every = cfg.log_every;
  m.target_rel_dist = cfg.target_rel_dist;
  if (ref) {
    m.x_ref = ref->x.values();
    m.phi_ref = ref->phi;
  }
  m.objective = [&bp](Eigen::Ref<const Vec> x) { return bp.objective(x); };
  return m;
}

/// Per-coordinate blocks of roughly d / n_subsets coordinates.
Index cd_block_size(const ExperimentConfig& cfg, Index d) { return std::max<Index>(1, d / cfg.n_subsets); }

IterateTrace run_deterministic(const ExperimentConfig& cfg, const BuiltProblem& bp, Monitor monitor) {
  const std::string& a = cfg.algorithm;
  SolverConfig c;
  c.monitor = std::move(monitor);
  c.momentum = parse_momentum(cfg.momentum);
  c.restart = parse_restart(cfg.restart);
  c.seed = cfg.seed;
  c.tau = cfg.tau;
  c.sigma = cfg.sigma;

  if (a == "gd" || a == "nag" || a == "pgd" || a == "fista" || a == "cd") {
    const auto& p = need_problem(bp, a);
    const double L = bp.info->L;
    if (c.tau == 0.0) c.tau = 1.0 / L;
    c.L = L;
    c.lipschitz = L;
    const FunctionalPtr& h = bp.h3;
    const bool plain = a == "gd" || a == "nag" || a == "cd";
    if (plain && cfg.experiment != "tridiag-ls")
      throw ConfigError(a + " handles unregularised problems only (tridiag-ls)", {"algorithm"});
    if (a == "gd") return run_gd(*h, c, bp.x0);
    if (a == "nag") return run_nag(*h, c, bp.x0);
    if (a == "pgd") return run_pgd(*p.g(), *h, c, bp.x0);
    if (a == "fista") return run_fista(*p.g(), *h, c, bp.x0);
    const Index bs = cd_block_size(cfg, p.dim());
    Sampler order(sampler_of(cfg.sampler), (p.dim() + bs - 1) / bs, cfg.seed);
    return run_coordinate_descent(*h, bs, order, c, bp.x0);
  }
  if (a == "pdhg" || a == "admm") {
    const double na = operator_norm(*bp.A, cfg.seed);
    c.op_norm = na;
    if (a == "admm") {
      if (c.tau == 0.0) c.tau = 1.0;
      return run_admm(*bp.f, *bp.A, *bp.g, c, bp.x0);
    }
    if (c.tau == 0.0 && c.sigma == 0.0) c.tau = c.sigma = 0.99 / na;
    if (c.sigma == 0.0) c.sigma = 0.99 / (c.tau * na * na);
    if (c.tau == 0.0) c.tau = 0.99 / (c.sigma * na * na);
    return run_pdhg(*bp.f, *bp.A, *bp.g, c, bp.x0);
  }
  // condat-vu, pd3o
  const double na = operator_norm(*bp.A3, cfg.seed);
  const double L = bp.info ? bp.info->L : 0.0;
  c.op_norm = na;
  c.lipschitz = L;
  if (a == "condat-vu") {
    if (c.sigma == 0.0) c.sigma = na > 0.0 ? 1.0 / na : 1.0;
    if (c.tau == 0.0) c.tau = 0.99 / (c.sigma * na * na + L / 2.0);
    return run_condat_vu(*bp.f3, *bp.A3, *bp.g3, *bp.h3, c, bp.x0);
  }
  if (c.tau == 0.0) c.tau = L > 0.0 ? 1.0 / L : 0.99 / na;
  if (c.sigma == 0.0) c.sigma = na > 0.0 ? 0.99 / (c.tau * na * na) : 1.0;
  return run_pd3o(*bp.f3, *bp.A3, *bp.g3, *bp.h3, c, bp.x0);
}

IterateTrace run_stochastic(const ExperimentConfig& cfg, const BuiltProblem& bp, Monitor monitor) {
  const std::string& a = cfg.algorithm;
  const auto& p = need_problem(bp, a);
  const double n = static_cast<double>(p.n());
  const double L_max = bp.info->L_max;
  StochasticConfig c;
  c.monitor = std::move(monitor);
  c.sampler = sampler_of(cfg.sampler);
  c.seed = cfg.seed;
  if (c.sampler == SamplerKind::importance) {
    double total = 0.0;
    for (double l : bp.info->L_i) total += l;
    for (double l : bp.info->L_i) c.probabilities.push_back(l / total);
  }
  c.saga_form = cfg.saga_form == "modified" ? SagaForm::modified : SagaForm::standard;
  c.svrg_inner = cfg.svrg_inner;
  c.eta_rule = cfg.eta_rule == "constant" ? EtaRule::constant : EtaRule::decay;
  c.eta = cfg.eta;
  c.rho = cfg.rho;
  c.gamma = cfg.gamma;
  c.spdhg_sigma = cfg.sigma;
  c.spdhg_tau = cfg.tau;
  c.adaptive = cfg.algorithm == "diag-accum" ? AdaptiveVariant::diag_accum : AdaptiveVariant::adam;
  c.warm_start_passes = cfg.warm_start_passes;
  c.L_max = L_max;
  c.allow_large_step = cfg.allow_large_step;

  double tau0 = cfg.tau;
  if (tau0 == 0.0) {
    if (a == "sgd")
      tau0 = 1.0 / (2.0 * n * L_max);
    else if (a == "diag-accum" || a == "adam")
      tau0 = 0.01;
    else
      tau0 = 1.0 / (3.0 * n * L_max);
  }
  c.step = cfg.schedule == "sgd-decay" ? StepSchedule::sgd_decay(tau0, cfg.decay_c, cfg.decay_power, p.n())
                                       : StepSchedule::constant(tau0);

  if (a == "sgd") return run_sgd(p, c, bp.x0);
  if (a == "sag") return run_sag(p, c, bp.x0);
  if (a == "saga") return run_saga(p, c, bp.x0);
  if (a == "svrg") return run_svrg(p, c, bp.x0);
  if (a == "loopless-svrg") {
    c.loopless_p = cfg.loopless_p > 0.0 ? cfg.loopless_p : 1.0 / n;
    return run_svrg(p, c, bp.x0);
  }
  if (a == "acc-saga" || a == "acc-svrg") {
    c.acc_estimator = a == "acc-saga" ? Estimator::saga : Estimator::svrg;
    return run_accelerated_vr(p, c, bp.x0);
  }
  if (a == "spdhg") return run_spdhg(p, c, bp.x0);
  return run_adaptive(p, c, bp.x0);
}

}  // namespace

std::vector<MetricsRow> to_metrics(const ExperimentConfig& cfg, const IterateTrace& trace) {
  std::vector<MetricsRow> rows;
  rows.reserve(trace.rows.size());
  for (const TraceRow& r : trace.rows) {
    MetricsRow m;
    m.experiment = cfg.experiment;
    m.algorithm = cfg.algorithm;
    m.seed = cfg.seed;
    m.k = r.k;
    m.data_passes = r.data_passes();
    if (cfg.record_wall_time) m.seconds = r.seconds;
    m.objective = r.objective;
    m.subopt = r.subopt;
    m.rel_dist = r.rel_dist;
    rows.push_back(std::move(m));
  }
  return rows;
}

RunResult run_algorithm(const ExperimentConfig& cfg, const BuiltProblem& bp, const std::optional<Reference>& reference) {
  validate(cfg);
  RunResult res;
  res.reference = reference;
  Monitor m = make_monitor(cfg, bp, reference);
  res.trace = is_stochastic(cfg.algorithm) ? run_stochastic(cfg, bp, std::move(m))
                                           : run_deterministic(cfg, bp, std::move(m));
  res.rows = to_metrics(cfg, res.trace);
  return res;
}

namespace {

void write_outputs(const ExperimentConfig& cfg, const BuiltProblem& bp, const RunResult& res,
                   const std::filesystem::path& dir, const std::string& suffix) {
  std::filesystem::create_directories(dir);
  write_csv((dir / ("metrics" + suffix + ".csv")).string(), res.rows);
  nlohmann::json side = to_json(cfg);
  side["resolved"] = {{"reg", bp.reg},
                      {"stop_reason", res.trace.stop_reason},
                      {"iterations", res.trace.iterations},
                      {"final_passes", res.trace.final_passes},
                      {"warnings", res.trace.warnings}};
  if (bp.info) side["resolved"]["L"] = bp.info->L, side["resolved"]["L_max"] = bp.info->L_max;
  if (res.reference) side["resolved"]["phi_ref"] = res.reference->phi;
  write_json((dir / ("config" + suffix + ".json")).string(), side);
  DenseVector recon = res.trace.x;
  if (recon.shape().is_image() && recon.shape().channels > 1) {
    const Shape s = Shape::image(recon.shape().rows, recon.shape().cols);
    recon = DenseVector(s, recon.values().head(s.size()));
  }
  write_raw((dir / ("recon" + suffix + ".f64")).string(), recon);
  if (recon.shape().is_image()) write_pgm((dir / ("recon" + suffix + ".pgm")).string(), recon);
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  BuiltProblem bp = build_problem(cfg);
  std::optional<Reference> ref;
  if (cfg.reference_passes > 0.0) ref = compute_reference(bp, cfg.reference_passes, cfg.reference_tol);
  RunResult res = run_algorithm(cfg, bp, ref);
  write_outputs(cfg, bp, res, cfg.out_dir, "");
  return res;
}

std::vector<RunResult> run_compare(const ExperimentConfig& cfg, const std::vector<std::string>& algorithms,
                                   unsigned threads) {
  std::vector<ExperimentConfig> cfgs;
  for (const auto& a : algorithms) {
    ExperimentConfig c = cfg;
    c.algorithm = a;
    validate(c);
    cfgs.push_back(c);
  }
  const BuiltProblem shared = build_problem(cfg);
  std::optional<Reference> ref;
  if (cfg.reference_passes > 0.0) ref = compute_reference(shared, cfg.reference_passes, cfg.reference_tol);

  std::vector<RunResult> results(cfgs.size());
  std::vector<std::exception_ptr> errors(cfgs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    const BuiltProblem bp = shared;
    for (std::size_t i = next++; i < cfgs.size(); i = next++) {
      try {
        results[i] = run_algorithm(cfgs[i], bp, ref);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n_workers = std::min<unsigned>(worker_count(threads), static_cast<unsigned>(cfgs.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<MetricsRow> merged;
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    write_outputs(cfgs[i], shared, results[i], cfg.out_dir, "_" + cfgs[i].algorithm);
    merged.insert(merged.end(), results[i].rows.begin(), results[i].rows.end());
  }
  write_csv((std::filesystem::path(cfg.out_dir) / "metrics.csv").string(), merged);
  return results;
}

namespace {

/// Twelve significant digits, so closed-form ratios print cleanly.
std::string pretty(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

std::string diagnose(const ExperimentConfig& cfg) {
  const BuiltProblem bp = build_problem(cfg);
  std::ostringstream out;
  out << "experiment=" << cfg.experiment << "\n";
  out << "dim=" << bp.x0.size() << "\n";
  if (bp.info) {
    const auto& info = *bp.info;
    const double n = static_cast<double>(bp.problem->n());
    out << "n_subsets=" << bp.problem->n() << "\n";
    out << "L=" << pretty(info.L) << "\n";
    out << "L_max=" << pretty(info.L_max) << "\n";
    out << "upsilon=" << pretty(info.upsilon) << "\n";
    const double tau_pgd = cfg.tau > 0.0 ? cfg.tau : 1.0 / info.L;
    auto verdict = [](const std::optional<std::string>& m) { return m ? "warn: " + *m : std::string("ok"); };
    out << "guard pgd tau=" << pretty(tau_pgd) << ": " << verdict(guard_pgd(tau_pgd, info.L)) << "\n";
    const double vr_bound = 1.0 / (3.0 * n * info.L_max);
    const double tau_vr = cfg.tau > 0.0 ? cfg.tau : vr_bound;
    out << "guard saga/svrg tau=" << pretty(tau_vr) << ": "
        << (tau_vr <= vr_bound ? std::string("ok")
                               : "warn: tau exceeds 1/(3 n L_max)=" + pretty(vr_bound))
        << "\n";
    double k_max = 0.0;
    for (const auto& b : bp.problem->blocks()) k_max = std::max(k_max, operator_norm(*b.op, cfg.seed));
    const double sig = cfg.sigma > 0.0 ? cfg.sigma : cfg.gamma * cfg.rho / k_max;
    const double tau_pd = cfg.tau > 0.0 ? cfg.tau : 1.0 / (n * cfg.gamma * k_max);
    out << "guard spdhg sigma=" << pretty(sig) << " tau=" << pretty(tau_pd) << ": "
        << verdict(guard_spdhg(sig, tau_pd, bp.problem->n(), k_max)) << "\n";
  } else {
    const double na = operator_norm(*bp.A, cfg.seed);
    out << "norm_A=" << pretty(na) << "\n";
    const double t = cfg.tau > 0.0 ? cfg.tau : 0.99 / na;
    const double s = cfg.sigma > 0.0 ? cfg.sigma : 0.99 / na;
    out << "guard pdhg sigma=" << pretty(s) << " tau=" << pretty(t) << ": "
        << (guard_pdhg(t, s, na) ? "warn: " + *guard_pdhg(t, s, na) : std::string("ok")) << "\n";
  }
  return out.str();
}

}  // namespace stochograd
