#pragma once

#include <cstdint>

#include "mhphone/corpus.hpp"
#include "mhphone/dbn.hpp"
#include "mhphone/model_params.hpp"

namespace mhphone {

/// Shape of a randomly drawn ground-truth model.
struct TruthOptions {
  double sigma = 0.1;          // shared per-dimension dispersion
  double self_prob = 0.8;      // T[i,i] for every prototype
  double end_prob = 0.05;      // T[i,0] for every prototype
  double spread = 2.0;         // prototype coordinates ~ U(-spread, spread)
  double min_separation = 2.0; // between any two prototypes, end state included
};

/// A valid ModelParams with an absorbing end state, pi[0] = 0, strong
/// self-transitions and well-separated prototypes. Deterministic in seed.
ModelParams random_truth(int n_states, int dim, std::uint64_t seed,
                         const TruthOptions& options = {});

/// Samples M signs from `truth` and returns the hidden labels alongside.
LabeledCorpus synth_corpus(const ModelParams& truth, int n_signs,
                           std::uint64_t seed, int frames = kDefaultFrames,
                           const SampleOptions& options = {});

}  // namespace mhphone
