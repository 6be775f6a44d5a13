#include "mhphone/baselines.hpp"

#include <cmath>
#include <string>

#include <spdlog/spdlog.h>

#include "mhphone/emission.hpp"
#include "mhphone/error.hpp"
#include "mhphone/random.hpp"

namespace mhphone {
namespace {

void check_distribution(const Eigen::Ref<const Eigen::VectorXd>& p,
                        const std::string& name) {
  if ((p.array() < 0.0).any() || !p.allFinite() ||
      std::abs(p.sum() - 1.0) > kStochasticTolerance) {
    throw Error(ErrorKind::kInvalidParams, name + " is not a distribution");
  }
}

void check_emission(const Eigen::MatrixXd& mu, const Eigen::VectorXd& sigma) {
  if (sigma.size() != mu.cols()) {
    throw Error(ErrorKind::kInvalidParams, "sigma must have D entries");
  }
  if (!mu.allFinite()) throw Error(ErrorKind::kInvalidParams, "mu must be finite");
  if (!(sigma.array() > 0.0).all() || !sigma.allFinite()) {
    throw Error(ErrorKind::kInvalidParams, "sigma must be positive");
  }
}

Eigen::Index first_argmax(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

// Records one EM value; returns true when the loop should stop.
bool record_iteration(FitReport& report, int iter, double value, double tol) {
  report.log_joint_trace.push_back(value);
  report.iterations = iter;
  if (!std::isfinite(tol)) return true;
  const auto& trace = report.log_joint_trace;
  if (trace.size() < 2) return false;
  const double prev = trace[trace.size() - 2];
  if (std::abs(value - prev) < tol * std::max(std::abs(prev), 1.0)) {
    report.converged = true;
    return true;
  }
  return false;
}

double emission_prior_terms(const Eigen::MatrixXd& mu, const Eigen::VectorXd& sigma,
                            const Hyperparams& hyper) {
  double out = 0.0;
  for (Eigen::Index d = 0; d < sigma.size(); ++d) {
    out += log_lognormal_pdf(sigma[d], hyper.mu_sigma, hyper.sigma_sigma);
  }
  for (Eigen::Index i = 0; i < mu.rows(); ++i) {
    for (Eigen::Index d = 0; d < mu.cols(); ++d) {
      out += log_normal_pdf(mu(i, d), hyper.mu_mu, hyper.sigma_mu);
    }
  }
  return out;
}

// Frame labels that maximize log weights + emission score, one sign at a
// time.
Assignment mixture_labels(const Eigen::VectorXd& weights,
                          const Eigen::MatrixXd& mu, const Eigen::VectorXd& sigma,
                          const Corpus& corpus, std::size_t threads) {
  const Eigen::VectorXd log_w = weights.array().log();
  Assignment labels(corpus.size(), corpus.frames);
  parallel_for(static_cast<std::size_t>(corpus.size()), threads, [&](std::size_t w) {
    const Eigen::MatrixXd scores = frame_scores(mu, sigma, corpus.signs[w].features);
    for (Eigen::Index f = 0; f < scores.rows(); ++f) {
      labels(static_cast<Eigen::Index>(w), f) =
          static_cast<int>(first_argmax(scores.row(f).transpose() + log_w));
    }
  });
  return labels;
}

struct TopicStep {
  Assignment labels;
  Eigen::VectorXi topics;
};

TopicStep topic_e_step(const GmmLdaParams& params, const Corpus& corpus,
                       std::size_t threads) {
  const Eigen::VectorXd log_theta = params.topic_weights.array().log();
  const Eigen::MatrixXd log_psi = params.topic_word.array().log();
  const int n_topics = params.n_topics();
  TopicStep step;
  step.labels.resize(corpus.size(), corpus.frames);
  step.topics.resize(corpus.size());
  parallel_for(static_cast<std::size_t>(corpus.size()), threads, [&](std::size_t w) {
    const auto row = static_cast<Eigen::Index>(w);
    const Eigen::MatrixXd scores =
        frame_scores(params.mu, params.sigma, corpus.signs[w].features);
    int best_topic = 0;
    double best_total = 0.0;
    Eigen::VectorXi best_labels(scores.rows());
    Eigen::VectorXi cand(scores.rows());
    for (int t = 0; t < n_topics; ++t) {
      double total = log_theta[t];
      for (Eigen::Index f = 0; f < scores.rows(); ++f) {
        const Eigen::VectorXd s = scores.row(f).transpose() + log_psi.row(t).transpose();
        const Eigen::Index c = first_argmax(s);
        cand[f] = static_cast<int>(c);
        total += s[c];
      }
      if (t == 0 || total > best_total) {
        best_total = total;
        best_topic = t;
        best_labels = cand;
      }
    }
    step.topics[row] = best_topic;
    step.labels.row(row) = best_labels.transpose();
  });
  return step;
}

GmmLdaParams topic_m_step(const Corpus& corpus, const Assignment& labels,
                          const Eigen::VectorXi& topics, const Hyperparams& hyper,
                          const GmmLdaParams& prev) {
  const int n_topics = prev.n_topics();
  const int n = prev.n_components();
  Eigen::VectorXd topic_counts = Eigen::VectorXd::Zero(n_topics);
  Eigen::MatrixXd word_counts = Eigen::MatrixXd::Zero(n_topics, n);
  for (int w = 0; w < corpus.size(); ++w) {
    topic_counts[topics[w]] += 1.0;
    for (int f = 0; f < corpus.frames; ++f) word_counts(topics[w], labels(w, f)) += 1.0;
  }
  GmmLdaParams next = prev;
  next.topic_weights = dirichlet_map(topic_counts, prev.doc_topic_prior);
  for (int t = 0; t < n_topics; ++t) {
    next.topic_word.row(t) =
        dirichlet_map(word_counts.row(t).transpose(), prev.word_prior).transpose();
  }
  next.mu = update_means(accumulate_emission(corpus, labels, n), prev.sigma, hyper,
                         /*pin_end_state=*/false);
  next.sigma = update_sigma(corpus, labels, next.mu, hyper);
  return next;
}

GmmParams initial_mixture(const Corpus& corpus, int n_components,
                          std::uint64_t seed) {
  if (n_components < 1) {
    throw Error(ErrorKind::kInvalidParams, "need at least one component");
  }
  const FrameMatrix frames = collect_frames(corpus, /*include_padding=*/true);
  Rng rng = make_rng(seed, "init");
  GmmParams params;
  params.weights = Eigen::VectorXd::Constant(n_components, 1.0 / n_components);
  params.mu = seed_prototypes(frames, n_components, /*zero_centre=*/false, rng);
  params.sigma = empirical_sigma(frames);
  return params;
}

}  // namespace

void validate_params(const GmmParams& params) {
  check_distribution(params.weights, "weights");
  if (params.mu.rows() != params.weights.size()) {
    throw Error(ErrorKind::kInvalidParams, "mu must have N rows");
  }
  check_emission(params.mu, params.sigma);
}

void validate_params(const GmmLdaParams& params) {
  check_distribution(params.topic_weights, "topic_weights");
  if (params.topic_word.rows() != params.n_topics() ||
      params.topic_word.cols() != params.n_components()) {
    throw Error(ErrorKind::kInvalidParams, "topic_word must be T x N");
  }
  for (int t = 0; t < params.n_topics(); ++t) {
    check_distribution(params.topic_word.row(t).transpose(),
                       "topic_word row " + std::to_string(t));
  }
  if (!(params.doc_topic_prior > 0.0) || !(params.word_prior > 0.0)) {
    throw Error(ErrorKind::kInvalidParams, "priors must be positive");
  }
  check_emission(params.mu, params.sigma);
}

GmmFit fit_gmm(const Corpus& corpus, int n_components, const Hyperparams& hyper,
               const BaselineFitOptions& options) {
  if (corpus.signs.empty()) {
    throw Error(ErrorKind::kInvariantViolation, "M: corpus has no signs");
  }
  validate_hyper(hyper);
  GmmFit fit;
  fit.params = initial_mixture(corpus, n_components, options.seed);
  for (int iter = 1; iter <= options.max_iters; ++iter) {
    fit.labels = mixture_labels(fit.params.weights, fit.params.mu, fit.params.sigma,
                                corpus, options.threads);
    const EmissionStats stats = accumulate_emission(corpus, fit.labels, n_components);
    GmmParams next;
    next.weights = dirichlet_map(stats.counts, hyper.alpha);
    next.mu = update_means(stats, fit.params.sigma, hyper, /*pin_end_state=*/false);
    next.sigma = update_sigma(corpus, fit.labels, next.mu, hyper);
    fit.params = std::move(next);
    const double value = gmm_log_joint(fit.params, corpus, fit.labels, hyper);
    spdlog::debug("gmm iter {} log_joint {:.10g}", iter, value);
    if (record_iteration(fit.report, iter, value, options.tol)) break;
  }
  return fit;
}

GmmLdaFit fit_gmm_lda(const Corpus& corpus, int n_components, int n_topics,
                      const Hyperparams& hyper,
                      const BaselineFitOptions& options) {
  if (corpus.signs.empty()) {
    throw Error(ErrorKind::kInvariantViolation, "M: corpus has no signs");
  }
  if (n_topics < 1) throw Error(ErrorKind::kInvalidParams, "need at least one topic");
  if (n_topics > corpus.size()) {
    throw Error(ErrorKind::kNotEnoughData, "more topics than signs");
  }
  validate_hyper(hyper);

  const GmmParams start = initial_mixture(corpus, n_components, options.seed);
  GmmLdaFit fit;
  fit.params.topic_weights = Eigen::VectorXd::Constant(n_topics, 1.0 / n_topics);
  fit.params.topic_word =
      Eigen::MatrixXd::Constant(n_topics, n_components, 1.0 / n_components);
  fit.params.doc_topic_prior = hyper.alpha;
  fit.params.word_prior = hyper.alpha;
  fit.params.mu = start.mu;
  fit.params.sigma = start.sigma;

  for (int iter = 1; iter <= options.max_iters; ++iter) {
    if (iter == 1) {
      // Uniform topics cannot break symmetry, so the first pass clusters
      // the signs' prototype histograms with k-means++ seeding instead.
      fit.labels = mixture_labels(start.weights, start.mu, start.sigma, corpus,
                                  options.threads);
      FrameMatrix hist = FrameMatrix::Zero(corpus.size(), n_components);
      for (int w = 0; w < corpus.size(); ++w) {
        for (int f = 0; f < corpus.frames; ++f) hist(w, fit.labels(w, f)) += 1.0;
      }
      hist /= static_cast<double>(corpus.frames);
      Rng rng = make_rng(options.seed, "topics");
      const Eigen::MatrixXd centres =
          seed_prototypes(hist, n_topics, /*zero_centre=*/false, rng);
      fit.topics.resize(corpus.size());
      for (int w = 0; w < corpus.size(); ++w) {
        Eigen::VectorXd neg_dist(n_topics);
        for (int t = 0; t < n_topics; ++t) {
          neg_dist[t] = -(hist.row(w) - centres.row(t)).squaredNorm();
        }
        fit.topics[w] = static_cast<int>(first_argmax(neg_dist));
      }
    } else {
      TopicStep step = topic_e_step(fit.params, corpus, options.threads);
      fit.labels = std::move(step.labels);
      fit.topics = std::move(step.topics);
    }
    fit.params = topic_m_step(corpus, fit.labels, fit.topics, hyper, fit.params);
    const double value =
        gmm_lda_log_joint(fit.params, corpus, fit.labels, fit.topics, hyper);
    spdlog::debug("gmm-lda iter {} log_joint {:.10g}", iter, value);
    if (record_iteration(fit.report, iter, value, options.tol)) break;
  }
  return fit;
}

double gmm_log_joint(const GmmParams& params, const Corpus& corpus,
                     const Assignment& labels, const Hyperparams& hyper) {
  double out = emission_prior_terms(params.mu, params.sigma, hyper) +
               log_dirichlet_pdf(params.weights, hyper.alpha);
  for (int w = 0; w < corpus.size(); ++w) {
    const FrameMatrix& x = corpus.signs[w].features;
    for (int f = 0; f < corpus.frames; ++f) {
      const int c = labels(w, f);
      out += std::log(params.weights[c]) +
             log_emission(x.row(f), params.mu.row(c), params.sigma);
    }
  }
  return out;
}

double gmm_lda_log_joint(const GmmLdaParams& params, const Corpus& corpus,
                         const Assignment& labels,
                         const Eigen::VectorXi& topics,
                         const Hyperparams& hyper) {
  double out = emission_prior_terms(params.mu, params.sigma, hyper) +
               log_dirichlet_pdf(params.topic_weights, params.doc_topic_prior);
  for (int t = 0; t < params.n_topics(); ++t) {
    out += log_dirichlet_pdf(params.topic_word.row(t).transpose(), params.word_prior);
  }
  for (int w = 0; w < corpus.size(); ++w) {
    const FrameMatrix& x = corpus.signs[w].features;
    const int t = topics[w];
    out += std::log(params.topic_weights[t]);
    for (int f = 0; f < corpus.frames; ++f) {
      const int c = labels(w, f);
      out += std::log(params.topic_word(t, c)) +
             log_emission(x.row(f), params.mu.row(c), params.sigma);
    }
  }
  return out;
}

namespace {

SignSequence draw_frames(const Eigen::Ref<const Eigen::VectorXd>& weights,
                         const Eigen::MatrixXd& mu, const Eigen::VectorXd& sigma,
                         int frames, Rng& rng,
                         Eigen::RowVectorXi& labels_row) {
  std::normal_distribution<double> normal(0.0, 1.0);
  SignSequence sign;
  sign.features.resize(frames, mu.cols());
  sign.true_length = frames;
  for (int f = 0; f < frames; ++f) {
    const int c = sample_categorical(weights, rng);
    labels_row[f] = c;
    for (Eigen::Index d = 0; d < mu.cols(); ++d) {
      sign.features(f, d) = mu(c, d) + sigma[d] * normal(rng);
    }
  }
  return sign;
}

Corpus finish_corpus(std::vector<SignSequence> signs, int frames, int dim) {
  Corpus corpus = make_corpus(std::move(signs), /*synthetic=*/true);
  corpus.frames = frames;
  corpus.dim = dim;
  corpus.feature_order = default_feature_order(dim);
  return corpus;
}

}  // namespace

LabeledCorpus sample_gmm_labeled(const GmmParams& params, int n_signs,
                                 int frames, std::uint64_t seed) {
  validate_params(params);
  Rng rng = make_rng(seed, "sample");
  LabeledCorpus out;
  out.labels.resize(n_signs, frames);
  std::vector<SignSequence> signs;
  for (int w = 0; w < n_signs; ++w) {
    Eigen::RowVectorXi row(frames);
    SignSequence sign = draw_frames(params.weights, params.mu, params.sigma,
                                    frames, rng, row);
    out.labels.row(w) = row;
    sign.gloss = "sample-" + std::to_string(w);
    sign.signer = "gmm";
    signs.push_back(std::move(sign));
  }
  out.corpus = finish_corpus(std::move(signs), frames, params.dim());
  return out;
}

Corpus sample_gmm(const GmmParams& params, int n_signs, int frames,
                  std::uint64_t seed) {
  return sample_gmm_labeled(params, n_signs, frames, seed).corpus;
}

TopicLabeledCorpus sample_gmm_lda_labeled(const GmmLdaParams& params,
                                          int n_signs, int frames,
                                          std::uint64_t seed) {
  validate_params(params);
  Rng rng = make_rng(seed, "sample");
  TopicLabeledCorpus out;
  out.labels.resize(n_signs, frames);
  out.topics.resize(n_signs);
  std::vector<SignSequence> signs;
  for (int w = 0; w < n_signs; ++w) {
    const int topic = sample_categorical(params.topic_weights, rng);
    out.topics[w] = topic;
    Eigen::RowVectorXi row(frames);
    SignSequence sign =
        draw_frames(params.topic_word.row(topic).transpose(), params.mu,
                    params.sigma, frames, rng, row);
    out.labels.row(w) = row;
    sign.gloss = "sample-" + std::to_string(w);
    sign.signer = "gmm-lda";
    signs.push_back(std::move(sign));
  }
  out.corpus = finish_corpus(std::move(signs), frames, params.dim());
  return out;
}

Corpus sample_gmm_lda(const GmmLdaParams& params, int n_signs, int frames,
                      std::uint64_t seed) {
  return sample_gmm_lda_labeled(params, n_signs, frames, seed).corpus;
}

}  // namespace mhphone
