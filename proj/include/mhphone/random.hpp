#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Dense>

namespace mhphone {

using Rng = std::mt19937_64;

/// Splits one global seed into independent per-component streams.
///
/// The rule is `splitmix64(seed ^ fnv1a64(component))`, so the same
/// (seed, component) pair always yields the same stream and distinct
/// component names decorrelate. Nested components are named with a `/`
/// separator, e.g. "evaluate/seed-3".
std::uint64_t derive_seed(std::uint64_t seed, std::string_view component);

inline Rng make_rng(std::uint64_t seed, std::string_view component) {
  return Rng(derive_seed(seed, component));
}

/// Draws an index from a probability vector by inverse CDF. Entries need
/// not be normalized; zero-mass entries are never returned.
int sample_categorical(const Eigen::Ref<const Eigen::VectorXd>& probs,
                       Rng& rng);

/// Symmetric or general Dirichlet draw via normalized Gamma variates.
Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& concentration,
                                 Rng& rng);

}  // namespace mhphone
