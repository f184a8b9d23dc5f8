#include "stochograd/experiments/data.hpp"

#include "stochograd/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <stdexcept>

namespace stochograd {

namespace {

struct Ellipse {
  double value, a, b, x0, y0, phi_deg;
};

constexpr std::array<Ellipse, 10> kModifiedSheppLogan{{
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
    {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},
    {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
    {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},
    {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
    {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},
    {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
    {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},
    {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
}};

}  // namespace

DenseVector gen_sparse_spikes(Index d, Index n_spikes, std::uint64_t seed) {
  if (n_spikes < 0 || n_spikes > d) throw std::invalid_argument("gen_sparse_spikes: need 0 <= n_spikes <= d");
  DenseVector x(Shape::flat(d));
  Pcg64 rng(seed, streams::phantom);
  for (Index j = 0; j < n_spikes; ++j) {
    const auto pos = static_cast<Index>(std::floor((static_cast<double>(j) + 0.5) * static_cast<double>(d) /
                                                   static_cast<double>(n_spikes)));
    const double sign = rng.below(2) == 0 ? -1.0 : 1.0;
    x[pos] = sign * (0.75 + 0.5 * rng.uniform());
  }
  return x;
}

DenseVector gen_shepp_logan(Index size) {
  if (size < 16) throw std::invalid_argument("gen_shepp_logan: size must be at least 16");
  DenseVector img(Shape::image(size, size));
  const double s = static_cast<double>(size);
  for (Index r = 0; r < size; ++r) {
    const double y = 1.0 - 2.0 * (static_cast<double>(r) + 0.5) / s;
    for (Index c = 0; c < size; ++c) {
      const double x = 2.0 * (static_cast<double>(c) + 0.5) / s - 1.0;
      double v = 0.0;
      for (const Ellipse& e : kModifiedSheppLogan) {
        const double phi = e.phi_deg * std::numbers::pi / 180.0;
        const double cp = std::cos(phi), sp = std::sin(phi);
        const double dx = x - e.x0, dy = y - e.y0;
        const double u = (dx * cp + dy * sp) / e.a;
        const double w = (-dx * sp + dy * cp) / e.b;
        if (u * u + w * w <= 1.0) v += e.value;
      }
      img[r * size + c] = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

DenseVector add_gaussian_noise(const DenseVector& v, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("add_gaussian_noise: sigma must be non-negative");
  DenseVector out = v;
  if (sigma == 0.0) return out;
  Pcg64 rng(seed, streams::noise);
  std::normal_distribution<double> nd(0.0, sigma);
  for (Index i = 0; i < out.size(); ++i) out[i] += nd(rng);
  return out;
}

DenseVector beer_lambert_noise(const DenseVector& v, double I0, std::uint64_t seed) {
  if (!(I0 > 0.0)) throw std::invalid_argument("beer_lambert_noise: I0 must be positive");
  if (v.size() > 0 && v.values().minCoeff() < 0.0) throw std::invalid_argument("beer_lambert_noise: v must be >= 0");
  DenseVector out = v;
  Pcg64 rng(seed, streams::noise);
  for (Index i = 0; i < out.size(); ++i) {
    const double mean = I0 * std::exp(-v[i]);
    long long counts = 1;
    if (mean > 0.0) counts = std::max<long long>(std::poisson_distribution<long long>(mean)(rng), 1);
    out[i] = -std::log(static_cast<double>(counts) / I0);
  }
  return out;
}

std::uint64_t checksum(const Vec& values) {
  std::uint64_t h = 1469598103934665603ULL;
  for (Index i = 0; i < values.size(); ++i) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &values[i], sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

}  // namespace stochograd
