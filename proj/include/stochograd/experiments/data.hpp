#pragma once

#include "stochograd/vector.hpp"

#include <cstdint>

namespace stochograd {

/// Spikes at floor((j + 0.5) d / n_spikes) with random sign and magnitude in [0.75, 1.25].
DenseVector gen_sparse_spikes(Index d, Index n_spikes, std::uint64_t seed);

/// Modified (high-contrast) Shepp-Logan phantom sampled at pixel centres, clamped to [0, 1].
DenseVector gen_shepp_logan(Index size);

DenseVector add_gaussian_noise(const DenseVector& v, double sigma, std::uint64_t seed);

/// Counts N ~ Poisson(I0 exp(-v)), zero counts raised to one, returned as -ln(N / I0).
DenseVector beer_lambert_noise(const DenseVector& v, double I0, std::uint64_t seed);

/// FNV-1a over the bytes of the values; used for golden checks.
std::uint64_t checksum(const Vec& values);

}  // namespace stochograd
