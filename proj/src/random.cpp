#include "mhphone/random.hpp"

namespace mhphone {
namespace {

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view component) {
  return splitmix64(seed ^ fnv1a64(component));
}

int sample_categorical(const Eigen::Ref<const Eigen::VectorXd>& probs,
                       Rng& rng) {
  const double total = probs.sum();
  std::uniform_real_distribution<double> unif(0.0, total);
  const double u = unif(rng);
  double acc = 0.0;
  int last_positive = 0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    acc += probs[i];
    if (u < acc) return last_positive;
  }
  // u landed on the rounding gap at the top of the CDF.
  return last_positive;
}

Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& concentration,
                                 Rng& rng) {
  Eigen::VectorXd out(concentration.size());
  for (Eigen::Index i = 0; i < concentration.size(); ++i) {
    std::gamma_distribution<double> gamma(concentration[i], 1.0);
    out[i] = gamma(rng);
  }
  return out / out.sum();
}

}  // namespace mhphone
