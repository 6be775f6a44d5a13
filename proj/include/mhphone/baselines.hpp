#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

#include "mhphone/corpus.hpp"
#include "mhphone/dbn.hpp"
#include "mhphone/model_params.hpp"
#include "mhphone/parallel.hpp"

// Frame-level ablations of the hold-sequence model. Both treat every frame
// of a sign, padding included, as an exchangeable draw from a mixture of
// body-configuration prototypes; neither has temporal structure.
namespace mhphone {

struct GmmParams {
  Eigen::VectorXd weights;  // N
  Eigen::MatrixXd mu;       // N x D
  Eigen::VectorXd sigma;    // D, shared diagonal

  int n_components() const { return static_cast<int>(weights.size()); }
  int dim() const { return static_cast<int>(mu.cols()); }
};

/// Mixture of unigrams over prototypes: each sign draws one topic, then
/// every frame draws a prototype from that topic's word distribution.
struct GmmLdaParams {
  Eigen::VectorXd topic_weights;  // T, the topic choice for signs
  Eigen::MatrixXd topic_word;     // T x N, rows stochastic
  double doc_topic_prior = 1.0;   // Dirichlet concentration on topic_weights
  double word_prior = 1.0;        // Dirichlet concentration on topic_word rows
  Eigen::MatrixXd mu;             // N x D
  Eigen::VectorXd sigma;          // D

  int n_topics() const { return static_cast<int>(topic_weights.size()); }
  int n_components() const { return static_cast<int>(mu.rows()); }
  int dim() const { return static_cast<int>(mu.cols()); }
};

void validate_params(const GmmParams& params);
void validate_params(const GmmLdaParams& params);

struct BaselineFitOptions {
  int max_iters = 200;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  std::size_t threads = default_threads();
};

struct GmmFit {
  GmmParams params;
  Assignment labels;
  FitReport report;
};

struct GmmLdaFit {
  GmmLdaParams params;
  Assignment labels;
  Eigen::VectorXi topics;  // one per sign
  FitReport report;
};

/// Hard EM over all frames. Weights take the Dirichlet closed form, the
/// means and sigma go through the same updates as the hold-sequence model.
GmmFit fit_gmm(const Corpus& corpus, int n_components, const Hyperparams& hyper,
               const BaselineFitOptions& options);

/// Hard EM with one topic per sign. The E-step maximizes jointly over the
/// topic and the frame labels. Both Dirichlet priors use hyper.alpha.
GmmLdaFit fit_gmm_lda(const Corpus& corpus, int n_components, int n_topics,
                      const Hyperparams& hyper,
                      const BaselineFitOptions& options);

double gmm_log_joint(const GmmParams& params, const Corpus& corpus,
                     const Assignment& labels, const Hyperparams& hyper);
double gmm_lda_log_joint(const GmmLdaParams& params, const Corpus& corpus,
                         const Assignment& labels,
                         const Eigen::VectorXi& topics,
                         const Hyperparams& hyper);

LabeledCorpus sample_gmm_labeled(const GmmParams& params, int n_signs,
                                 int frames, std::uint64_t seed);
Corpus sample_gmm(const GmmParams& params, int n_signs, int frames,
                  std::uint64_t seed);

struct TopicLabeledCorpus {
  Corpus corpus;
  Assignment labels;
  Eigen::VectorXi topics;
};

TopicLabeledCorpus sample_gmm_lda_labeled(const GmmLdaParams& params,
                                          int n_signs, int frames,
                                          std::uint64_t seed);
Corpus sample_gmm_lda(const GmmLdaParams& params, int n_signs, int frames,
                      std::uint64_t seed);

}  // namespace mhphone
