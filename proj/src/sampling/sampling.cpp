#include "stochograd/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace stochograd {

Partition partition_staggered(Index n_items, Index n_subsets) {
  if (n_items < 1 || n_subsets < 1 || n_subsets > n_items) {
    throw std::invalid_argument("staggered partition needs 1 <= n_subsets <= n_items");
  }
  Partition p;
  p.n_items = n_items;
  p.subsets.resize(static_cast<std::size_t>(n_subsets));
  for (Index i = 0; i < n_items; ++i) p.subsets[static_cast<std::size_t>(i % n_subsets)].push_back(i);
  return p;
}

Partition expand_groups(const Partition& groups, Index group_size) {
  if (group_size < 1) throw std::invalid_argument("group size must be >= 1");
  Partition p;
  p.n_items = groups.n_items * group_size;
  for (const auto& subset : groups.subsets) {
    std::vector<Index> rows;
    rows.reserve(subset.size() * static_cast<std::size_t>(group_size));
    for (Index j : subset) {
      for (Index r = 0; r < group_size; ++r) rows.push_back(j * group_size + r);
    }
    p.subsets.push_back(std::move(rows));
  }
  return p;
}

std::vector<Index> prime_factors(Index n) {
  if (n < 1) throw std::invalid_argument("prime_factors needs n >= 1");
  std::vector<Index> out;
  for (Index p = 2; p * p <= n; ++p) {
    while (n % p == 0) {
      out.push_back(p);
      n /= p;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

std::vector<Index> herman_meyer_order(Index n) {
  const auto primes = prime_factors(n);
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    Index rest = k;
    Index radix = 1;
    Index value = 0;
    for (Index p : primes) {
      radix *= p;
      value += (rest % p) * (n / radix);
      rest /= p;
    }
    order[static_cast<std::size_t>(k)] = value;
  }
  return order;
}

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::uniform: return "uniform";
    case SamplerKind::permutation: return "permutation";
    case SamplerKind::cyclic: return "cyclic";
    case SamplerKind::herman_meyer: return "herman-meyer";
    case SamplerKind::importance: return "importance";
  }
  return "unknown";
}

std::optional<SamplerKind> parse_sampler_kind(const std::string& name) {
  for (auto k : {SamplerKind::uniform, SamplerKind::permutation, SamplerKind::cyclic, SamplerKind::herman_meyer,
                 SamplerKind::importance}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

Sampler::Sampler(SamplerKind kind, Index n, std::uint64_t seed, std::vector<double> weights)
    : kind_(kind), n_(n), seed_(seed), rng_(seed, streams::sampler), weights_(std::move(weights)) {
  if (n < 1) throw std::invalid_argument("sampler needs n >= 1");
  if (kind_ == SamplerKind::importance) {
    if (static_cast<Index>(weights_.size()) != n) throw std::invalid_argument("importance sampler needs n weights");
    double total = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0)) throw std::invalid_argument("importance weights must be >= 0");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("importance weights must sum to 1");
    cumulative_.resize(weights_.size());
    std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
    cumulative_.back() = 1.0;
  } else if (kind_ == SamplerKind::herman_meyer) {
    order_ = herman_meyer_order(n);
  } else if (kind_ == SamplerKind::permutation) {
    order_.resize(static_cast<std::size_t>(n));
  }
}

Index Sampler::next() {
  const Index pos = counter_ % n_;
  ++counter_;
  switch (kind_) {
    case SamplerKind::uniform: return static_cast<Index>(rng_.below(static_cast<std::uint64_t>(n_)));
    case SamplerKind::cyclic: return pos;
    case SamplerKind::herman_meyer: return order_[static_cast<std::size_t>(pos)];
    case SamplerKind::permutation:
      if (pos == 0) {
        std::iota(order_.begin(), order_.end(), Index{0});
        for (Index i = n_ - 1; i > 0; --i) {
          const auto j = static_cast<Index>(rng_.below(static_cast<std::uint64_t>(i + 1)));
          std::swap(order_[static_cast<std::size_t>(i)], order_[static_cast<std::size_t>(j)]);
        }
      }
      return order_[static_cast<std::size_t>(pos)];
    case SamplerKind::importance: {
      const double u = rng_.uniform();
      const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      return std::min<Index>(static_cast<Index>(it - cumulative_.begin()), n_ - 1);
    }
  }
  return pos;
}

Sampler Sampler::clone_with_seed(std::uint64_t seed) const { return Sampler(kind_, n_, seed, weights_); }

}  // namespace stochograd
