#include "mhphone/emission.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "mhphone/error.hpp"
#include "mhphone/golden_section.hpp"

namespace mhphone {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

}  // namespace

Eigen::VectorXd dirichlet_map(const Eigen::VectorXd& counts, double alpha) {
  Eigen::VectorXd p = (counts.array() + alpha - 1.0).max(0.0).matrix();
  const double total = p.sum();
  if (!(total > 0.0)) {
    return Eigen::VectorXd::Constant(counts.size(),
                                     1.0 / static_cast<double>(counts.size()));
  }
  return p / total;
}

EmissionStats accumulate_emission(const Corpus& corpus,
                                  const Assignment& labels, int n_states) {
  EmissionStats stats;
  stats.counts = Eigen::VectorXd::Zero(n_states);
  stats.sums = Eigen::MatrixXd::Zero(n_states, corpus.dim);
  for (int w = 0; w < corpus.size(); ++w) {
    const FrameMatrix& x = corpus.signs[w].features;
    for (int f = 0; f < corpus.frames; ++f) {
      const int c = labels(w, f);
      stats.counts[c] += 1.0;
      stats.sums.row(c) += x.row(f);
    }
  }
  return stats;
}

Eigen::MatrixXd update_means(const EmissionStats& stats,
                             const Eigen::VectorXd& sigma,
                             const Hyperparams& hyper, bool pin_end_state) {
  const auto n = stats.sums.rows();
  const auto dim = stats.sums.cols();
  const double prior_precision = 1.0 / (hyper.sigma_mu * hyper.sigma_mu);
  Eigen::MatrixXd mu(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index d = 0; d < dim; ++d) {
      const double noise_precision = 1.0 / (sigma[d] * sigma[d]);
      const double precision = stats.counts[i] * noise_precision + prior_precision;
      mu(i, d) = (stats.sums(i, d) * noise_precision +
                  hyper.mu_mu * prior_precision) /
                 precision;
    }
  }
  if (pin_end_state) mu.row(0).setZero();
  return mu;
}

double log_sigma_objective(double log_sigma, double n, double sq_residuals,
                           const Hyperparams& hyper) {
  const double z = (log_sigma - hyper.mu_sigma) / hyper.sigma_sigma;
  return -(n + 1.0) * log_sigma -
         0.5 * sq_residuals * std::exp(-2.0 * log_sigma) - 0.5 * z * z;
}

Eigen::VectorXd squared_residuals(const Corpus& corpus,
                                  const Assignment& labels,
                                  const Eigen::MatrixXd& mu) {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(corpus.dim);
  for (int w = 0; w < corpus.size(); ++w) {
    const FrameMatrix& x = corpus.signs[w].features;
    for (int f = 0; f < corpus.frames; ++f) {
      q += (x.row(f) - mu.row(labels(w, f))).array().square().matrix().transpose();
    }
  }
  return q;
}

Eigen::VectorXd update_sigma(const Corpus& corpus, const Assignment& labels,
                             const Eigen::MatrixXd& mu,
                             const Hyperparams& hyper) {
  const Eigen::VectorXd q = squared_residuals(corpus, labels, mu);
  const double n = static_cast<double>(corpus.size()) * corpus.frames;
  Eigen::VectorXd sigma(corpus.dim);
  for (int d = 0; d < corpus.dim; ++d) {
    const double s = golden_section_maximize(
        [&](double log_sigma) {
          return log_sigma_objective(log_sigma, n, q[d], hyper);
        },
        kLogSigmaLo, kLogSigmaHi, kLogSigmaTol);
    sigma[d] = std::exp(s);
  }
  return sigma;
}

double log_normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - kHalfLog2Pi;
}

double log_lognormal_pdf(double x, double location, double scale) {
  return log_normal_pdf(std::log(x), location, scale) - std::log(x);
}

double log_dirichlet_pdf(const Eigen::Ref<const Eigen::VectorXd>& p,
                         double alpha) {
  const auto n = static_cast<double>(p.size());
  double out = std::lgamma(alpha * n) - n * std::lgamma(alpha);
  if (alpha != 1.0) {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      out += (alpha - 1.0) * std::log(p[i]);
    }
  }
  return out;
}

double log_emission(const Eigen::Ref<const Eigen::RowVectorXd>& frame,
                    const Eigen::Ref<const Eigen::RowVectorXd>& mean,
                    const Eigen::VectorXd& sigma) {
  double out = 0.0;
  for (Eigen::Index d = 0; d < frame.size(); ++d) {
    out += log_normal_pdf(frame[d], mean[d], sigma[d]);
  }
  return out;
}

Eigen::MatrixXd frame_scores(const Eigen::MatrixXd& mu,
                             const Eigen::VectorXd& sigma,
                             const FrameMatrix& frames) {
  const auto n = mu.rows();
  const Eigen::ArrayXd inv_sigma = sigma.array().inverse();
  Eigen::MatrixXd scores(frames.rows(), n);
  for (Eigen::Index f = 0; f < frames.rows(); ++f) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::ArrayXd z =
          (frames.row(f) - mu.row(i)).transpose().array() * inv_sigma;
      scores(f, i) = -0.5 * z.square().sum();
    }
  }
  return scores;
}

FrameMatrix collect_frames(const Corpus& corpus, bool include_padding) {
  Eigen::Index rows = 0;
  for (const SignSequence& sign : corpus.signs) {
    rows += include_padding ? sign.frames() : sign.true_length;
  }
  FrameMatrix out(rows, corpus.dim);
  Eigen::Index r = 0;
  for (const SignSequence& sign : corpus.signs) {
    const int take = include_padding ? sign.frames() : sign.true_length;
    out.middleRows(r, take) = sign.features.topRows(take);
    r += take;
  }
  return out;
}

Eigen::VectorXd empirical_sigma(const FrameMatrix& frames) {
  const auto dim = frames.cols();
  if (frames.rows() == 0) return Eigen::VectorXd::Constant(dim, 1.0);
  const Eigen::RowVectorXd mean = frames.colwise().mean();
  Eigen::VectorXd sd =
      ((frames.rowwise() - mean).array().square().colwise().sum() /
       static_cast<double>(frames.rows()))
          .sqrt()
          .transpose();
  return sd.array().max(kSigmaFloor).matrix();
}

Eigen::MatrixXd seed_prototypes(const FrameMatrix& frames, int count,
                                bool zero_centre, Rng& rng) {
  const auto rows = frames.rows();
  if (rows < count) {
    throw Error(ErrorKind::kNotEnoughData,
                "need " + std::to_string(count) + " frames to seed prototypes, have " +
                    std::to_string(rows));
  }
  Eigen::MatrixXd centres(count, frames.cols());
  if (count == 0) return centres;

  Eigen::VectorXd nearest(rows);
  std::vector<bool> taken(static_cast<std::size_t>(rows), false);
  if (zero_centre) {
    nearest = frames.rowwise().squaredNorm();
  } else {
    nearest.setConstant(std::numeric_limits<double>::infinity());
  }

  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd weight(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      weight[r] = taken[r] ? 0.0 : nearest[r];
    }
    // No centres yet, or every remaining frame duplicates one: uniform
    // over frames not yet taken.
    if (!std::isfinite(weight.sum()) || !(weight.sum() > 0.0)) {
      for (Eigen::Index r = 0; r < rows; ++r) weight[r] = taken[r] ? 0.0 : 1.0;
    }
    const int pick = sample_categorical(weight, rng);
    taken[pick] = true;
    centres.row(k) = frames.row(pick);
    for (Eigen::Index r = 0; r < rows; ++r) {
      nearest[r] = std::min(nearest[r], (frames.row(r) - frames.row(pick)).squaredNorm());
    }
  }
  return centres;
}

}  // namespace mhphone
