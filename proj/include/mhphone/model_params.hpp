#pragma once

#include <Eigen/Dense>

namespace mhphone {

/// Prior constants. Defaults are the values used to fit the published
/// model: alpha = 1, mu_mu = 0, sigma_mu = 10, mu_sigma = 1, sigma_sigma = 10.
struct Hyperparams {
  double alpha = 1.0;        // Dirichlet concentration for pi and rows of T
  double mu_mu = 0.0;        // prior mean of every prototype coordinate
  double sigma_mu = 10.0;    // prior std of every prototype coordinate
  double mu_sigma = 1.0;     // LogNormal location of each sigma_d
  double sigma_sigma = 10.0; // LogNormal scale of each sigma_d
};

/// Throws InvalidParams unless alpha, sigma_mu and sigma_sigma are positive.
void validate_hyper(const Hyperparams& hyper);

/// Parameters of the hold-sequence network. State 0 is the end state whose
/// prototype is pinned to the zero vector. `sigma` holds per-dimension
/// standard deviations shared by every state.
struct ModelParams {
  Eigen::VectorXd pi;     // N
  Eigen::MatrixXd trans;  // N x N, row-stochastic, trans(from, to)
  Eigen::MatrixXd mu;     // N x D
  Eigen::VectorXd sigma;  // D

  int n_states() const { return static_cast<int>(pi.size()); }
  int dim() const { return static_cast<int>(mu.cols()); }
};

inline constexpr double kStochasticTolerance = 1e-9;

/// Checks every ModelParams invariant; throws InvalidParams on failure.
void validate_params(const ModelParams& params);

/// Per-sign, per-frame state labels (M x P).
using Assignment =
    Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Returns a copy with states 1..N-1 relabeled: new state perm[i] takes the
/// role of old state i. perm[0] must be 0.
ModelParams permute_states(const ModelParams& params,
                           const Eigen::VectorXi& perm);

}  // namespace mhphone
