#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stochograd/experiments/cli.hpp"
#include "stochograd/experiments/data.hpp"
#include "stochograd/experiments/runner.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

using namespace stochograd;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("stochograd_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int cli(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
  args.insert(args.begin(), "stochograd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

ExperimentConfig small_spikes() {
  ExperimentConfig c;
  c.experiment = "spikes-deblur";
  c.d = 200;
  c.kappa = 5;
  c.n_spikes = 8;
  c.n_subsets = 20;
  c.noise_sigma = 0.01;
  c.budget_passes = 20;
  c.reference_passes = 5000;
  return c;
}

ExperimentConfig small_ct(Index size = 32) {
  ExperimentConfig c;
  c.experiment = "ct-shepp-logan";
  c.size = size;
  c.angles = 48;
  c.n_subsets = 8;
  c.noise_sigma = 1.0;
  c.budget_passes = 5;
  c.reference_passes = 50;
  return c;
}

void write_config(const fs::path& p, const ExperimentConfig& c) { write_json(p.string(), to_json(c)); }

}  // namespace

TEST_CASE("spikes sit at the pinned positions") {
  const DenseVector x = gen_sparse_spikes(10, 2, 3);
  for (Index i = 0; i < 10; ++i) CHECK((x[i] != 0.0) == (i == 2 || i == 7));

  const DenseVector y = gen_sparse_spikes(1000, 20, 0);
  Index nnz = 0;
  for (Index i = 0; i < 1000; ++i) {
    if (y[i] == 0.0) continue;
    ++nnz;
    CHECK(i % 50 == 25);
    CHECK(std::abs(y[i]) >= 0.75);
    CHECK(std::abs(y[i]) <= 1.25);
  }
  CHECK(nnz == 20);
  CHECK_THROWS(gen_sparse_spikes(3, 4, 0));
}

TEST_CASE("phantom range, mirror symmetry and golden checksum") {
  const Index n = 128;
  const DenseVector p = gen_shepp_logan(n);
  CHECK(p.values().minCoeff() >= 0.0);
  CHECK(p.values().maxCoeff() <= 1.0);
  CHECK(p.values().sum() > 0.0);

  // Ellipses off the vertical axis, or rotated, break left-right symmetry.
  struct E {
    double a, b, x0, y0, phi;
  };
  const E off_axis[] = {{0.11, 0.31, 0.22, 0.0, -18.0},
                        {0.16, 0.41, -0.22, 0.0, 18.0},
                        {0.046, 0.023, -0.08, -0.605, 0.0},
                        {0.023, 0.046, 0.06, -0.605, 0.0}};
  auto asymmetric = [&](Index c, Index r) {
    const double x = 2.0 * (c + 0.5) / n - 1.0, y = 1.0 - 2.0 * (r + 0.5) / n;
    for (const E& e : off_axis)
      for (double xs : {x, -x}) {
        const double t = e.phi * std::numbers::pi / 180.0;
        const double dx = xs - e.x0, dy = y - e.y0;
        const double u = (dx * std::cos(t) + dy * std::sin(t)) / e.a;
        const double w = (-dx * std::sin(t) + dy * std::cos(t)) / e.b;
        if (u * u + w * w <= 1.0) return true;
      }
    return false;
  };
  Index checked = 0;
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) {
      if (asymmetric(c, r)) continue;
      CHECK(std::abs(p[r * n + c] - p[r * n + (n - 1 - c)]) <= 1e-12);
      ++checked;
    }
  CHECK(checked > n * n / 2);

  CHECK(checksum(p.values()) == 6211594682290433988ULL);
  CHECK(p.values().sum() == doctest::Approx(2032.8).epsilon(1e-12));
  CHECK_THROWS(gen_shepp_logan(8));
}

TEST_CASE("gaussian noise moments and reproducibility") {
  const DenseVector v = DenseVector::constant(Shape::flat(100000), 2.0);
  const DenseVector same = add_gaussian_noise(v, 0.0, 1);
  CHECK(same.values() == v.values());

  const DenseVector a = add_gaussian_noise(v, 0.3, 11);
  const Vec e = a.values() - v.values();
  const double mean = e.mean();
  const double sd = std::sqrt((e.array() - mean).square().sum() / static_cast<double>(e.size() - 1));
  CHECK(std::abs(sd - 0.3) <= 0.03 * 0.3);
  CHECK(std::abs(mean) <= 5.0 * 0.3 / std::sqrt(1e5));

  const DenseVector b = add_gaussian_noise(v, 0.3, 11);
  CHECK(checksum(a.values()) == checksum(b.values()));
  CHECK(checksum(a.values()) != checksum(add_gaussian_noise(v, 0.3, 12).values()));
}

TEST_CASE("beer-lambert noise") {
  const double big = 1e6;
  const DenseVector zero(Shape::flat(10000));
  const DenseVector out = beer_lambert_noise(zero, big, 5);
  CHECK(out.values().cwiseAbs().mean() <= 3.0 / std::sqrt(big));

  // Counts of zero are raised to one, so the output stays finite.
  const DenseVector dark = DenseVector::constant(Shape::flat(1000), 30.0);
  const DenseVector clamped = beer_lambert_noise(dark, 50.0, 5);
  CHECK(clamped.all_finite());
  CHECK(clamped.values().maxCoeff() == doctest::Approx(std::log(50.0)));

  // Perturbation shrinks as the intensity grows.
  const DenseVector mid = DenseVector::constant(Shape::flat(20000), 1.0);
  double prev = kInfinity;
  for (double I0 : {50.0, 250.0, 5000.0}) {
    const double pert = (beer_lambert_noise(mid, I0, 9).values() - mid.values()).cwiseAbs().mean();
    CHECK(pert < prev);
    prev = pert;
  }
  CHECK_THROWS(beer_lambert_noise(zero, 0.0, 1));
  CHECK_THROWS(beer_lambert_noise(DenseVector::constant(Shape::flat(2), -1.0), 10.0, 1));
}

TEST_CASE("spikes with kappa=1 have L=1 and the sparsity weight from the data") {
  ExperimentConfig c = small_spikes();
  c.kappa = 1;
  const BuiltProblem bp = build_problem(c);
  CHECK(bp.info->L == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bp.reg == doctest::Approx(0.5 * bp.data.values().cwiseAbs().maxCoeff()));
  CHECK(bp.x0.values().isZero());
}

TEST_CASE("ct problem blocks sum to the full data term") {
  ExperimentConfig c = small_ct(64);
  c.angles = 120;
  c.n_subsets = 8;
  const BuiltProblem bp = build_problem(c);
  CHECK(bp.problem->n() == 8);
  Pcg64 rng(3, streams::test);
  for (int t = 0; t < 3; ++t) {
    const Vec x = sgtest::randn(64 * 64, rng);
    double sum = 0.0;
    for (Index i = 0; i < bp.problem->n(); ++i) sum += bp.problem->block_value(i, x);
    const double full = 0.5 * (bp.K->apply(DenseVector(Shape::image(64, 64), x)).values() - bp.data.values()).squaredNorm();
    CHECK(std::abs(sum - full) <= 1e-10 * full);
  }
  // The box makes negative images infeasible.
  CHECK(bp.objective(-Vec::Ones(64 * 64)) == kInfinity);
}

TEST_CASE("denoise-tgv builds the block operator and a two-block f") {
  ExperimentConfig c;
  c.experiment = "denoise-tgv";
  c.size = 16;
  c.reg = 0.1;
  const BuiltProblem bp = build_problem(c);
  CHECK(!bp.problem);
  CHECK(bp.A->cols() == 3 * 16 * 16);
  CHECK(bp.A->rows() == 6 * 16 * 16);
  CHECK(bp.f->name().find("separable") != std::string::npos);
  CHECK(bp.x0.shape() == Shape::image(16, 16, 3));

  // f is 0.1 ||.||_{2,1} on the first block and 0.2 ||.||_{2,1} on the second.
  Vec y = Vec::Zero(6 * 16 * 16);
  y[0] = 3.0;
  y[2 * 16 * 16] = 4.0;
  CHECK(bp.f->value(y) == doctest::Approx(0.1 * 3.0 + 0.2 * 4.0));
}

TEST_CASE("reference recovers the least-squares solution") {
  ExperimentConfig c;
  c.experiment = "tridiag-ls";
  c.d = 50;
  c.n_subsets = 5;
  const BuiltProblem bp = build_problem(c);
  const Reference ref = compute_reference(bp, 100000, 1e-13);
  Mat K = Mat::Zero(50, 50);
  for (Index i = 0; i < 50; ++i) {
    K(i, i) = 2.0;
    if (i + 1 < 50) K(i, i + 1) = K(i + 1, i) = -1.0;
  }
  const Vec x_star = K.partialPivLu().solve(bp.data.values());
  CHECK(sgtest::rel_diff(ref.x.values(), x_star) <= 1e-8);
}

TEST_CASE("reference value is converged and deterministic") {
  const ExperimentConfig c = small_spikes();
  const BuiltProblem bp = build_problem(c);
  const Reference a = compute_reference(bp, 5000, 1e-9);
  const Reference b = compute_reference(bp, 10000, 1e-9);
  CHECK(std::abs(a.phi - b.phi) <= 1e-9);
  const Reference again = compute_reference(build_problem(c), 5000, 1e-9);
  CHECK(again.x.values() == a.x.values());
}

TEST_CASE("config round trip and rejection of bad keys") {
  ExperimentConfig c = small_ct();
  c.target_rel_dist = 1e-3;
  c.seed = 42;
  const ExperimentConfig back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));

  nlohmann::json j = {{"size", 32}, {"nonsense", 1}, {"algorithm", 3}};
  try {
    config_from_json(j);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.keys == std::vector<std::string>{"algorithm", "nonsense"});
  }
  try {
    config_from_json({{"algorithm", "newton"}, {"size", 4}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.keys == std::vector<std::string>{"algorithm", "size"});
  }
}

TEST_CASE("csv schema and formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
  CHECK(format_double(2.0) == "2");
  MetricsRow r;
  r.experiment = "tridiag-ls";
  r.algorithm = "sgd";
  r.seed = 7;
  r.k = 30;
  r.data_passes = 1.5;
  r.objective = 0.25;
  r.rel_dist = 0.125;
  std::ostringstream out;
  write_csv(out, {r});
  CHECK(out.str() == std::string("schema=1\n") + kCsvHeader + "\ntridiag-ls,sgd,7,30,1.5,,0.25,,0.125\n");
}

TEST_CASE("image outputs") {
  const fs::path dir = scratch("images");
  const DenseVector img = gen_shepp_logan(16);
  write_pgm((dir / "p.pgm").string(), img);
  write_raw((dir / "p.f64").string(), img);
  const std::string pgm = slurp(dir / "p.pgm");
  CHECK(pgm.rfind("P5\n16 16\n65535\n", 0) == 0);
  CHECK(pgm.size() == std::string("P5\n16 16\n65535\n").size() + 2 * 256);
  const std::string raw = slurp(dir / "p.f64");
  REQUIRE(raw.size() == 8 * 256);
  double first_bright = 0.0;
  for (Index i = 0; i < 256; ++i) {
    double v;
    std::memcpy(&v, raw.data() + 8 * i, 8);
    CHECK(v == img[i]);
    if (first_bright == 0.0) first_bright = v;
  }
  const auto header = nlohmann::json::parse(slurp(dir / "p.f64.json"));
  CHECK(header["shape"] == nlohmann::json::array({16, 16}));
  CHECK(header["dtype"] == "float64");
}

TEST_CASE("data-pass bookkeeping in the metrics") {
  ExperimentConfig c = small_spikes();
  c.algorithm = "saga";
  c.budget_passes = 4;
  const BuiltProblem bp = build_problem(c);
  const RunResult r = run_algorithm(c, bp, compute_reference(bp, 5000, 1e-10));
  REQUIRE(r.rows.size() == 4);
  // The gradient table costs one pass before the first step.
  for (std::size_t j = 0; j < r.rows.size(); ++j) {
    CHECK(r.rows[j].data_passes == static_cast<double>(j + 1));
    CHECK(r.rows[j].k == static_cast<Index>(j) * 20);
    CHECK(*r.rows[j].subopt >= -1e-8);
  }
  CHECK(!r.rows[0].seconds);
}

TEST_CASE("algorithm dispatch covers every name") {
  ExperimentConfig c = small_spikes();
  c.budget_passes = 2;
  c.reference_passes = 0;
  const BuiltProblem spikes = build_problem(c);
  ExperimentConfig t;
  t.experiment = "tridiag-ls";
  t.d = 40;
  t.n_subsets = 4;
  t.budget_passes = 2;
  const BuiltProblem tri = build_problem(t);
  ExperimentConfig dn;
  dn.experiment = "denoise-tv";
  dn.size = 16;
  dn.noise_sigma = 0.1;
  dn.budget_passes = 3;
  const BuiltProblem den = build_problem(dn);
  for (const auto& a : algorithm_names()) {
    CAPTURE(a);
    const bool plain = a == "gd" || a == "nag" || a == "cd";
    ExperimentConfig cc = plain ? t : c;
    cc.algorithm = a;
    const RunResult r = run_algorithm(cc, plain ? tri : spikes, std::nullopt);
    CHECK(!r.trace.diverged);
    CHECK(r.trace.x.all_finite());
  }
  for (const char* a : {"pdhg", "admm", "condat-vu", "pd3o"}) {
    CAPTURE(a);
    ExperimentConfig cc = dn;
    cc.algorithm = a;
    const RunResult r = run_algorithm(cc, den, std::nullopt);
    CHECK(r.rows.back().objective < r.rows.front().objective);
  }
  ExperimentConfig bad = dn;
  bad.algorithm = "saga";
  CHECK_THROWS_AS(run_algorithm(bad, den, std::nullopt), ConfigError);
  ExperimentConfig gd_spikes = c;
  gd_spikes.algorithm = "gd";
  CHECK_THROWS_AS(run_algorithm(gd_spikes, spikes, std::nullopt), ConfigError);
}

TEST_CASE("cli: usage errors, config errors and diagnose") {
  std::string out, err;
  CHECK(cli({"frobnicate"}, &out, &err) == kExitUsage);
  CHECK(cli({"run", "--bogus"}, &out, &err) == kExitUsage);
  CHECK(err.find("Usage") != std::string::npos);
  CHECK(cli({}, &out, &err) == kExitUsage);

  const fs::path dir = scratch("cli_config");
  {
    std::ofstream f(dir / "bad.json");
    f << R"({"experiment": "spikes-deblur", "kapa": 5, "d": -1})";
  }
  CHECK(cli({"diagnose", "--config", (dir / "bad.json").string()}, &out, &err) == kExitConfig);
  CHECK(err.find("kapa") != std::string::npos);
  CHECK(err.find(" d") != std::string::npos);

  ExperimentConfig c;
  c.experiment = "spikes-deblur";
  c.kappa = 25;
  c.n_subsets = 1000;
  write_config(dir / "k25.json", c);
  REQUIRE(cli({"diagnose", "--config", (dir / "k25.json").string()}, &out, &err) == 0);
  CHECK(out.find("upsilon=25\n") != std::string::npos);
  CHECK(out.find("L=1\n") != std::string::npos);

  // Flags override the config file.
  REQUIRE(cli({"diagnose", "--config", (dir / "k25.json").string(), "--subsets", "1"}, &out, &err) == 0);
  CHECK(out.find("n_subsets=1\n") != std::string::npos);
  const auto at = out.find("upsilon=");
  REQUIRE(at != std::string::npos);
  CHECK(std::stod(out.substr(at + 8)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("cli: run is deterministic and writes its artifacts") {
  const fs::path dir = scratch("cli_run");
  ExperimentConfig c = small_ct();
  c.algorithm = "saga";
  write_config(dir / "c.json", c);
  REQUIRE(cli({"run", "--config", (dir / "c.json").string(), "--out", (dir / "a").string(), "--seed", "4"}) == 0);
  REQUIRE(cli({"run", "--config", (dir / "c.json").string(), "--out", (dir / "b").string(), "--seed", "4"}) == 0);
  const std::string csv = slurp(dir / "a" / "metrics.csv");
  CHECK(csv.rfind(std::string("schema=1\n") + kCsvHeader + "\n", 0) == 0);
  CHECK(csv == slurp(dir / "b" / "metrics.csv"));
  for (const char* f : {"config.json", "recon.pgm", "recon.f64", "recon.f64.json"}) CHECK(fs::exists(dir / "a" / f));
  const auto side = nlohmann::json::parse(slurp(dir / "a" / "config.json"));
  CHECK(side["seed"] == 4);
  CHECK(side["algorithm"] == "saga");

  REQUIRE(cli({"run", "--config", (dir / "c.json").string(), "--out", (dir / "s").string(), "--seed", "5"}) == 0);
  CHECK(csv != slurp(dir / "s" / "metrics.csv"));
}

TEST_CASE("cli: compare writes one csv per algorithm and a merged file") {
  const fs::path dir = scratch("cli_compare");
  ExperimentConfig c = small_spikes();
  c.out_dir = (dir / "cmp").string();
  write_config(dir / "c.json", c);
  std::string out;
  REQUIRE(cli({"compare", "--config", (dir / "c.json").string(), "--algorithms", "pgd,sgd,saga", "--threads", "3"},
              &out) == 0);
  std::size_t rows = 0;
  for (const char* a : {"pgd", "sgd", "saga"}) {
    const std::string csv = slurp(dir / "cmp" / (std::string("metrics_") + a + ".csv"));
    REQUIRE(!csv.empty());
    rows += static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) - 2;
  }
  const std::string merged = slurp(dir / "cmp" / "metrics.csv");
  CHECK(static_cast<std::size_t>(std::count(merged.begin(), merged.end(), '\n')) - 2 == rows);

  // Thread count does not change results.
  c.out_dir = (dir / "serial").string();
  write_config(dir / "c1.json", c);
  REQUIRE(cli({"compare", "--config", (dir / "c1.json").string(), "--algorithms", "pgd,sgd,saga", "--threads", "1"}) ==
          0);
  CHECK(slurp(dir / "serial" / "metrics.csv") == merged);
}

TEST_CASE("cli: divergence exits with code 2") {
  const fs::path dir = scratch("cli_diverge");
  ExperimentConfig c;
  c.experiment = "tridiag-ls";
  c.d = 50;
  c.algorithm = "gd";
  c.tau = 1.0;
  c.budget_passes = 2000;
  c.reference_passes = 0;
  c.out_dir = (dir / "o").string();
  write_config(dir / "c.json", c);
  std::string out;
  CHECK(cli({"run", "--config", (dir / "c.json").string()}, &out) == kExitDiverged);
  CHECK(out.find("stop=divergence") != std::string::npos);
}

TEST_CASE("worker count honours the environment cap") {
  ::setenv("STOCHOGRAD_THREADS", "2", 1);
  CHECK(worker_count(8) == 2);
  CHECK(worker_count(1) == 1);
  ::unsetenv("STOCHOGRAD_THREADS");
  CHECK(worker_count(3) == 3);
}
