#pragma once

#include "stochograd/random.hpp"
#include "stochograd/vector.hpp"

#include <optional>
#include <string>
#include <vector>

namespace stochograd {

/// Disjoint index sets covering 0..n_items-1.
struct Partition {
  Index n_items = 0;
  std::vector<std::vector<Index>> subsets;

  Index size() const { return static_cast<Index>(subsets.size()); }
};

/// Subset i = {i, i + n, i + 2n, ...}.
Partition partition_staggered(Index n_items, Index n_subsets);

/// Expand a partition of groups (e.g. projection angles) into one of rows,
/// where group j owns rows j*group_size .. (j+1)*group_size-1.
Partition expand_groups(const Partition& groups, Index group_size);

/// Mixed-radix digit reversal over the ascending prime factorisation of n.
/// For powers of two this is bit reversal.
std::vector<Index> herman_meyer_order(Index n);

/// Prime factors of n in ascending order, with multiplicity.
std::vector<Index> prime_factors(Index n);

enum class SamplerKind { uniform, permutation, cyclic, herman_meyer, importance };

std::string to_string(SamplerKind kind);
std::optional<SamplerKind> parse_sampler_kind(const std::string& name);

/// Index stream over 0..n-1. Deterministic for a given seed; not thread-safe.
class Sampler {
 public:
  Sampler(SamplerKind kind, Index n, std::uint64_t seed, std::vector<double> weights = {});

  Index next();
  SamplerKind kind() const { return kind_; }
  Index n() const { return n_; }
  std::uint64_t seed() const { return seed_; }
  /// Fresh sampler of the same kind and weights with another seed.
  Sampler clone_with_seed(std::uint64_t seed) const;

 private:
  SamplerKind kind_;
  Index n_;
  std::uint64_t seed_;
  Pcg64 rng_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  std::vector<Index> order_;
  Index counter_ = 0;
};

}  // namespace stochograd
