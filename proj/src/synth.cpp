#include "mhphone/synth.hpp"

#include "mhphone/error.hpp"
#include "mhphone/random.hpp"

namespace mhphone {

ModelParams random_truth(int n_states, int dim, std::uint64_t seed,
                         const TruthOptions& options) {
  if (n_states < 2 || dim < 1) {
    throw Error(ErrorKind::kInvalidParams, "truth needs N >= 2 and D >= 1");
  }
  if (options.self_prob + options.end_prob > 1.0 || options.self_prob < 0.0 ||
      options.end_prob < 0.0) {
    throw Error(ErrorKind::kInvalidParams, "self_prob + end_prob must be <= 1");
  }
  Rng rng = make_rng(seed, "truth");
  std::uniform_real_distribution<double> coord(-options.spread, options.spread);

  ModelParams truth;
  truth.mu = Eigen::MatrixXd::Zero(n_states, dim);
  for (int i = 1; i < n_states; ++i) {
    for (int attempt = 0;; ++attempt) {
      for (int d = 0; d < dim; ++d) truth.mu(i, d) = coord(rng);
      bool separated = true;
      for (int j = 0; j < i && separated; ++j) {
        separated = (truth.mu.row(i) - truth.mu.row(j)).norm() >= options.min_separation;
      }
      if (separated) break;
      if (attempt > 10000) {
        throw Error(ErrorKind::kInvalidParams,
                    "cannot place well-separated prototypes; widen spread");
      }
    }
  }

  truth.pi = Eigen::VectorXd::Zero(n_states);
  truth.pi.tail(n_states - 1) =
      sample_dirichlet(Eigen::VectorXd::Constant(n_states - 1, 2.0), rng);

  truth.trans = Eigen::MatrixXd::Zero(n_states, n_states);
  truth.trans(0, 0) = 1.0;
  for (int i = 1; i < n_states; ++i) {
    truth.trans(i, 0) = options.end_prob;
    const double rest = 1.0 - options.self_prob - options.end_prob;
    if (n_states == 2) {
      truth.trans(i, i) = 1.0 - options.end_prob;
      continue;
    }
    truth.trans(i, i) = options.self_prob;
    const Eigen::VectorXd split =
        sample_dirichlet(Eigen::VectorXd::Ones(n_states - 2), rng);
    int k = 0;
    for (int j = 1; j < n_states; ++j) {
      if (j == i) continue;
      truth.trans(i, j) = rest * split[k++];
    }
  }
  truth.sigma = Eigen::VectorXd::Constant(dim, options.sigma);
  validate_params(truth);
  return truth;
}

LabeledCorpus synth_corpus(const ModelParams& truth, int n_signs,
                           std::uint64_t seed, int frames,
                           const SampleOptions& options) {
  return sample_labeled(truth, n_signs, frames, seed, options);
}

}  // namespace mhphone
