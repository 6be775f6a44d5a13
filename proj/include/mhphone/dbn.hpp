#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mhphone/corpus.hpp"
#include "mhphone/model_params.hpp"
#include "mhphone/parallel.hpp"

namespace mhphone {

enum class EStepKind { kGreedy, kViterbi };

std::string_view to_string(EStepKind kind);
EStepKind parse_e_step(std::string_view text);

/// Uniform pi and T, zero end prototype, the remaining N-1 prototypes
/// seeded k-means++-style from non-padding frames, sigma from the
/// empirical per-dimension spread. Throws NotEnoughData when there are
/// fewer than N-1 non-padding frames.
ModelParams init_params(int n_states, const Corpus& corpus, std::uint64_t seed);

/// P x N matrix of -0.5 * sum_d ((x_fd - mu_id) / sigma_d)^2. The
/// normalizing constants are shared by all states and dropped.
Eigen::MatrixXd emission_scores(const ModelParams& params,
                                const FrameMatrix& frames);

/// Left-to-right pass: c_0 maximizes the frame score plus log pi, every
/// later c_f maximizes the frame score plus log T[c_{f-1}, .]. O(P N).
Eigen::VectorXi greedy_path(const ModelParams& params, const FrameMatrix& frames);

/// Max-product dynamic program over the same scores. O(P N^2). Ties go
/// to the lower state index.
Eigen::VectorXi viterbi_path(const ModelParams& params, const FrameMatrix& frames);

/// log pi[c_0] + sum log T[c_{f-1}, c_f] + sum of emission_scores along
/// the path.
double path_score(const ModelParams& params, const FrameMatrix& frames,
                  const Eigen::Ref<const Eigen::VectorXi>& path);

Assignment e_step_greedy(const ModelParams& params, const Corpus& corpus,
                         std::size_t threads = 1);
Assignment e_step_viterbi(const ModelParams& params, const Corpus& corpus,
                          std::size_t threads = 1);
Assignment e_step(EStepKind kind, const ModelParams& params,
                  const Corpus& corpus, std::size_t threads = 1);

/// MAP update in the order pi, T, mu, sigma. pi and the rows of T use the
/// Dirichlet closed form, mu the conjugate Gaussian closed form with the
/// previous sigma, sigma a golden-section search on log sigma.
ModelParams m_step(const Corpus& corpus, const Assignment& labels,
                   const Hyperparams& hyper, const ModelParams& prev);

struct LogJointTerms {
  double sigma_prior = 0.0;
  double pi_prior = 0.0;
  double trans_prior = 0.0;
  double mu_prior = 0.0;
  double categorical = 0.0;
  double emission = 0.0;

  double total() const {
    return sigma_prior + pi_prior + trans_prior + mu_prior + categorical +
           emission;
  }
};

LogJointTerms log_joint_terms(const ModelParams& params, const Corpus& corpus,
                              const Assignment& labels,
                              const Hyperparams& hyper);

/// Full log density of (sigma, pi, T, mu, c, x) under the generative model.
double log_joint(const ModelParams& params, const Corpus& corpus,
                 const Assignment& labels, const Hyperparams& hyper);

struct FitOptions {
  int max_iters = 200;
  double tol = 1e-6;  // on the relative change of the log joint
  EStepKind e_step = EStepKind::kGreedy;
  std::uint64_t seed = 0;
  std::size_t threads = default_threads();
};

struct FitReport {
  int iterations = 0;
  std::vector<double> log_joint_trace;
  bool converged = false;
};

struct FitResult {
  ModelParams params;
  Assignment labels;
  FitReport report;
};

/// Hard EM. Stops when the relative change of the log joint drops below
/// `tol` or after `max_iters` passes. A non-finite `tol` requests exactly
/// one pass, reported as not converged.
FitResult fit_em(const Corpus& corpus, int n_states, const Hyperparams& hyper,
                 const FitOptions& options);

struct SampleOptions {
  // Once the chain reaches the end state the rest of the sign is exact
  // zero padding. When false every frame, end state included, is a
  // Gaussian draw and the chain keeps running.
  bool exact_end_token = true;
};

struct LabeledCorpus {
  Corpus corpus;
  Assignment labels;
};

/// Ancestral sampling of `n_signs` signs of `frames` frames each.
LabeledCorpus sample_labeled(const ModelParams& params, int n_signs, int frames,
                             std::uint64_t seed,
                             const SampleOptions& options = {});

Corpus sample(const ModelParams& params, int n_signs, int frames,
              std::uint64_t seed, const SampleOptions& options = {});

}  // namespace mhphone
