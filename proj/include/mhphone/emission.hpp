#pragma once

#include <Eigen/Dense>

#include "mhphone/corpus.hpp"
#include "mhphone/model_params.hpp"
#include "mhphone/random.hpp"

// Gaussian emission machinery shared by the hold-sequence model and the
// frame-level baselines: sufficient statistics, conjugate MAP updates,
// prior densities and prototype seeding.
namespace mhphone {

inline constexpr double kLogSigmaLo = -8.0;
inline constexpr double kLogSigmaHi = 8.0;
inline constexpr double kLogSigmaTol = 1e-8;
inline constexpr double kSigmaFloor = 1e-3;

/// Dirichlet MAP of a categorical given counts: p_i proportional to
/// max(count_i + alpha - 1, 0). An all-zero numerator yields uniform.
Eigen::VectorXd dirichlet_map(const Eigen::VectorXd& counts, double alpha);

struct EmissionStats {
  Eigen::VectorXd counts;  // frames per state
  Eigen::MatrixXd sums;    // per-state feature sums, N x D
};

EmissionStats accumulate_emission(const Corpus& corpus,
                                  const Assignment& labels, int n_states);

/// Per-dimension conjugate MAP of the state means under a N(mu_mu,
/// sigma_mu^2) prior, with observation noise `sigma`. States without
/// frames land on the prior mean. When `pin_end_state` is set, row 0 is
/// exactly zero.
Eigen::MatrixXd update_means(const EmissionStats& stats,
                             const Eigen::VectorXd& sigma,
                             const Hyperparams& hyper, bool pin_end_state);

/// Log posterior of one sigma_d as a function of s = log sigma_d, up to a
/// constant: Gaussian likelihood of `n` residuals whose squares sum to
/// `sq_residuals`, times the LogNormal(mu_sigma, sigma_sigma) prior.
double log_sigma_objective(double log_sigma, double n, double sq_residuals,
                           const Hyperparams& hyper);

/// Sum of squared residuals per dimension over every frame of the corpus.
Eigen::VectorXd squared_residuals(const Corpus& corpus,
                                  const Assignment& labels,
                                  const Eigen::MatrixXd& mu);

/// Golden-section search on log sigma_d over [-8, 8] for every dimension.
Eigen::VectorXd update_sigma(const Corpus& corpus, const Assignment& labels,
                             const Eigen::MatrixXd& mu,
                             const Hyperparams& hyper);

double log_normal_pdf(double x, double mean, double sd);
double log_lognormal_pdf(double x, double location, double scale);
/// Symmetric Dirichlet(alpha) log density. Zero entries are allowed when
/// alpha == 1.
double log_dirichlet_pdf(const Eigen::Ref<const Eigen::VectorXd>& p,
                         double alpha);

/// Emission log density of one frame under a diagonal Gaussian.
double log_emission(const Eigen::Ref<const Eigen::RowVectorXd>& frame,
                    const Eigen::Ref<const Eigen::RowVectorXd>& mean,
                    const Eigen::VectorXd& sigma);

/// P x N matrix of -0.5 * sum_d ((x_fd - mu_id) / sigma_d)^2, the part of
/// the Gaussian log density that differs between states sharing sigma.
Eigen::MatrixXd frame_scores(const Eigen::MatrixXd& mu,
                             const Eigen::VectorXd& sigma,
                             const FrameMatrix& frames);

/// Rows < true_length of every sign, or every row when
/// `include_padding` is set.
FrameMatrix collect_frames(const Corpus& corpus, bool include_padding);

/// Per-dimension standard deviation of `frames`, floored at 1e-3.
Eigen::VectorXd empirical_sigma(const FrameMatrix& frames);

/// k-means++ seeding: draws `count` rows of `frames`, each with
/// probability proportional to the squared distance to the nearest centre
/// chosen so far. When `zero_centre` is set the origin counts as an
/// existing centre. Throws NotEnoughData if there are fewer rows than
/// requested.
Eigen::MatrixXd seed_prototypes(const FrameMatrix& frames, int count,
                                bool zero_centre, Rng& rng);

}  // namespace mhphone
