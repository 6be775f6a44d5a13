#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "json.hpp"

#include "mhphone/corpus.hpp"
#include "mhphone/parallel.hpp"

namespace mhphone {

/// Draws `n_signs` synthetic signs of `frames` frames from a generator.
using SignGenerator =
    std::function<Corpus(int n_signs, int frames, std::uint64_t seed)>;

struct DiscriminatorOptions {
  int seeds = 5;
  double train_fraction = 0.8;
  int epochs = 50;
  double learning_rate = 1e-2;
  int hidden = 16;
  std::uint64_t seed = 0;
  std::size_t threads = default_threads();
};

struct SeedOutcome {
  double test_bce = 0.0;
  double initial_train_bce = 0.0;
  double final_train_bce = 0.0;
};

/// Test BCE of a discriminator trained to separate real from generated
/// signs; low values mean the generator is easy to tell apart.
struct EvalReport {
  double bce_mean = 0.0;
  double bce_std = 0.0;  // sample standard deviation across seeds
  int n_seeds = 0;
  std::vector<double> per_seed;
  std::vector<SeedOutcome> details;
  DiscriminatorOptions options;
};

/// For each seed: draw |real| generated signs, stratified train/test split,
/// full-batch Adam on the training BCE, then score the test set. Requires
/// at least 10 real signs.
EvalReport evaluate_generator(const Corpus& real, const SignGenerator& generator,
                              const DiscriminatorOptions& options = {});

nlohmann::json to_json(const EvalReport& report);

}  // namespace mhphone
