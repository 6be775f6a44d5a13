#include "mhphone/dbn.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <spdlog/spdlog.h>

#include "mhphone/emission.hpp"
#include "mhphone/error.hpp"
#include "mhphone/random.hpp"

namespace mhphone {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_dims(const ModelParams& params, const Corpus& corpus) {
  if (params.dim() != corpus.dim) {
    throw Error(ErrorKind::kInvalidParams,
                "model D=" + std::to_string(params.dim()) +
                    " does not match corpus D=" + std::to_string(corpus.dim));
  }
}

Eigen::Index first_argmax(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

template <typename PathFn>
Assignment run_e_step(const ModelParams& params, const Corpus& corpus,
                      std::size_t threads, PathFn path_fn) {
  check_dims(params, corpus);
  Assignment labels(corpus.size(), corpus.frames);
  parallel_for(static_cast<std::size_t>(corpus.size()), threads,
               [&](std::size_t w) {
                 const auto row = static_cast<Eigen::Index>(w);
                 labels.row(row) =
                     path_fn(params, corpus.signs[w].features).transpose();
               });
  return labels;
}

}  // namespace

std::string_view to_string(EStepKind kind) {
  return kind == EStepKind::kViterbi ? "viterbi" : "greedy";
}

EStepKind parse_e_step(std::string_view text) {
  if (text == "greedy") return EStepKind::kGreedy;
  if (text == "viterbi") return EStepKind::kViterbi;
  throw Error(ErrorKind::kInvalidParams,
              "unknown e-step '" + std::string(text) + "'");
}

ModelParams init_params(int n_states, const Corpus& corpus, std::uint64_t seed) {
  if (n_states < 2) {
    throw Error(ErrorKind::kInvalidParams,
                "need the end state plus at least one prototype (N >= 2)");
  }
  const FrameMatrix frames = collect_frames(corpus, /*include_padding=*/false);
  Rng rng = make_rng(seed, "init");

  ModelParams params;
  const double uniform = 1.0 / n_states;
  params.pi = Eigen::VectorXd::Constant(n_states, uniform);
  params.trans = Eigen::MatrixXd::Constant(n_states, n_states, uniform);
  params.mu = Eigen::MatrixXd::Zero(n_states, corpus.dim);
  params.mu.bottomRows(n_states - 1) =
      seed_prototypes(frames, n_states - 1, /*zero_centre=*/true, rng);
  params.sigma = empirical_sigma(frames);
  return params;
}

Eigen::MatrixXd emission_scores(const ModelParams& params,
                                const FrameMatrix& frames) {
  return frame_scores(params.mu, params.sigma, frames);
}

Eigen::VectorXi greedy_path(const ModelParams& params, const FrameMatrix& frames) {
  const Eigen::MatrixXd scores = emission_scores(params, frames);
  const Eigen::VectorXd log_pi = params.pi.array().log();
  const Eigen::MatrixXd log_trans = params.trans.array().log();

  Eigen::VectorXi path(frames.rows());
  if (frames.rows() == 0) return path;
  path[0] = static_cast<int>(
      first_argmax(scores.row(0).transpose() + log_pi));
  for (Eigen::Index f = 1; f < frames.rows(); ++f) {
    path[f] = static_cast<int>(first_argmax(
        scores.row(f).transpose() + log_trans.row(path[f - 1]).transpose()));
  }
  return path;
}

Eigen::VectorXi viterbi_path(const ModelParams& params, const FrameMatrix& frames) {
  const int n = params.n_states();
  const auto length = frames.rows();
  const Eigen::MatrixXd scores = emission_scores(params, frames);
  const Eigen::MatrixXd log_trans = params.trans.array().log();

  Eigen::VectorXi path(length);
  if (length == 0) return path;

  Eigen::MatrixXd best(length, n);
  Eigen::MatrixXi back(length, n);
  best.row(0) = scores.row(0) + params.pi.array().log().matrix().transpose();
  back.row(0).setZero();
  for (Eigen::Index f = 1; f < length; ++f) {
    for (int i = 0; i < n; ++i) {
      double top = kNegInf;
      int arg = 0;
      for (int j = 0; j < n; ++j) {
        const double cand = best(f - 1, j) + log_trans(j, i);
        if (cand > top) {
          top = cand;
          arg = j;
        }
      }
      best(f, i) = top + scores(f, i);
      back(f, i) = arg;
    }
  }
  path[length - 1] =
      static_cast<int>(first_argmax(best.row(length - 1).transpose()));
  for (Eigen::Index f = length - 1; f > 0; --f) {
    path[f - 1] = back(f, path[f]);
  }
  return path;
}

double path_score(const ModelParams& params, const FrameMatrix& frames,
                  const Eigen::Ref<const Eigen::VectorXi>& path) {
  const Eigen::MatrixXd scores = emission_scores(params, frames);
  double out = std::log(params.pi[path[0]]) + scores(0, path[0]);
  for (Eigen::Index f = 1; f < path.size(); ++f) {
    out += std::log(params.trans(path[f - 1], path[f])) + scores(f, path[f]);
  }
  return out;
}

Assignment e_step_greedy(const ModelParams& params, const Corpus& corpus,
                         std::size_t threads) {
  return run_e_step(params, corpus, threads, greedy_path);
}

Assignment e_step_viterbi(const ModelParams& params, const Corpus& corpus,
                          std::size_t threads) {
  return run_e_step(params, corpus, threads, viterbi_path);
}

Assignment e_step(EStepKind kind, const ModelParams& params,
                  const Corpus& corpus, std::size_t threads) {
  return kind == EStepKind::kViterbi ? e_step_viterbi(params, corpus, threads)
                                     : e_step_greedy(params, corpus, threads);
}

ModelParams m_step(const Corpus& corpus, const Assignment& labels,
                   const Hyperparams& hyper, const ModelParams& prev) {
  const int n = prev.n_states();
  if (labels.rows() != corpus.size() || labels.cols() != corpus.frames) {
    throw Error(ErrorKind::kInvalidParams,
                "assignment shape does not match the corpus");
  }

  Eigen::VectorXd start_counts = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd bigram_counts = Eigen::MatrixXd::Zero(n, n);
  for (int w = 0; w < corpus.size(); ++w) {
    start_counts[labels(w, 0)] += 1.0;
    for (int f = 1; f < corpus.frames; ++f) {
      bigram_counts(labels(w, f - 1), labels(w, f)) += 1.0;
    }
  }

  ModelParams next;
  next.pi = dirichlet_map(start_counts, hyper.alpha);
  next.trans.resize(n, n);
  for (int j = 0; j < n; ++j) {
    next.trans.row(j) =
        dirichlet_map(bigram_counts.row(j).transpose(), hyper.alpha).transpose();
  }
  next.mu = update_means(accumulate_emission(corpus, labels, n), prev.sigma,
                         hyper, /*pin_end_state=*/true);
  next.sigma = update_sigma(corpus, labels, next.mu, hyper);
  return next;
}

LogJointTerms log_joint_terms(const ModelParams& params, const Corpus& corpus,
                              const Assignment& labels,
                              const Hyperparams& hyper) {
  check_dims(params, corpus);
  LogJointTerms terms;
  for (Eigen::Index d = 0; d < params.sigma.size(); ++d) {
    terms.sigma_prior +=
        log_lognormal_pdf(params.sigma[d], hyper.mu_sigma, hyper.sigma_sigma);
  }
  terms.pi_prior = log_dirichlet_pdf(params.pi, hyper.alpha);
  for (int j = 0; j < params.n_states(); ++j) {
    terms.trans_prior +=
        log_dirichlet_pdf(params.trans.row(j).transpose(), hyper.alpha);
  }
  for (int i = 1; i < params.n_states(); ++i) {
    for (int d = 0; d < params.dim(); ++d) {
      terms.mu_prior += log_normal_pdf(params.mu(i, d), hyper.mu_mu, hyper.sigma_mu);
    }
  }
  for (int w = 0; w < corpus.size(); ++w) {
    const FrameMatrix& x = corpus.signs[w].features;
    terms.categorical += std::log(params.pi[labels(w, 0)]);
    for (int f = 0; f < corpus.frames; ++f) {
      if (f > 0) {
        terms.categorical += std::log(params.trans(labels(w, f - 1), labels(w, f)));
      }
      terms.emission += log_emission(x.row(f), params.mu.row(labels(w, f)),
                                     params.sigma);
    }
  }
  return terms;
}

double log_joint(const ModelParams& params, const Corpus& corpus,
                 const Assignment& labels, const Hyperparams& hyper) {
  return log_joint_terms(params, corpus, labels, hyper).total();
}

FitResult fit_em(const Corpus& corpus, int n_states, const Hyperparams& hyper,
                 const FitOptions& options) {
  if (corpus.signs.empty()) {
    throw Error(ErrorKind::kInvariantViolation, "M: corpus has no signs");
  }
  validate_hyper(hyper);
  FitResult result;
  result.params = init_params(n_states, corpus, options.seed);
  const bool single_pass = !std::isfinite(options.tol);

  for (int iter = 1; iter <= options.max_iters; ++iter) {
    result.labels = e_step(options.e_step, result.params, corpus, options.threads);
    result.params = m_step(corpus, result.labels, hyper, result.params);
    const double value = log_joint(result.params, corpus, result.labels, hyper);
    auto& trace = result.report.log_joint_trace;
    trace.push_back(value);
    result.report.iterations = iter;
    spdlog::debug("em iter {} log_joint {:.10g}", iter, value);
    if (single_pass) break;
    if (trace.size() >= 2) {
      const double prev = trace[trace.size() - 2];
      if (std::abs(value - prev) < options.tol * std::max(std::abs(prev), 1.0)) {
        result.report.converged = true;
        break;
      }
    }
  }
  return result;
}

LabeledCorpus sample_labeled(const ModelParams& params, int n_signs, int frames,
                             std::uint64_t seed, const SampleOptions& options) {
  validate_params(params);
  Rng rng = make_rng(seed, "sample");
  std::normal_distribution<double> normal(0.0, 1.0);
  const int dim = params.dim();

  LabeledCorpus out;
  out.labels = Assignment::Zero(n_signs, frames);
  std::vector<SignSequence> signs;
  signs.reserve(static_cast<std::size_t>(n_signs));
  for (int w = 0; w < n_signs; ++w) {
    SignSequence sign;
    sign.gloss = "sample-" + std::to_string(w);
    sign.signer = "dbn";
    sign.features = FrameMatrix::Zero(frames, dim);
    sign.true_length = frames;
    int state = sample_categorical(params.pi, rng);
    for (int f = 0; f < frames; ++f) {
      if (f > 0) state = sample_categorical(params.trans.row(state).transpose(), rng);
      if (state == 0 && options.exact_end_token) {
        // Labels after the end are already zero, as are the features.
        sign.true_length = f;
        break;
      }
      out.labels(w, f) = state;
      for (int d = 0; d < dim; ++d) {
        sign.features(f, d) = params.mu(state, d) + params.sigma[d] * normal(rng);
      }
    }
    signs.push_back(std::move(sign));
  }
  out.corpus = make_corpus(std::move(signs), /*synthetic=*/true);
  out.corpus.frames = frames;
  out.corpus.dim = dim;
  out.corpus.feature_order = default_feature_order(dim);
  return out;
}

Corpus sample(const ModelParams& params, int n_signs, int frames,
              std::uint64_t seed, const SampleOptions& options) {
  return sample_labeled(params, n_signs, frames, seed, options).corpus;
}

}  // namespace mhphone
