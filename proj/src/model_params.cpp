#include "mhphone/model_params.hpp"

#include <cmath>
#include <string>

#include "mhphone/error.hpp"

namespace mhphone {
namespace {

void check_distribution(const Eigen::Ref<const Eigen::VectorXd>& p,
                        const std::string& name) {
  if ((p.array() < 0.0).any() || !p.allFinite()) {
    throw Error(ErrorKind::kInvalidParams, name + " has a negative entry");
  }
  if (std::abs(p.sum() - 1.0) > kStochasticTolerance) {
    throw Error(ErrorKind::kInvalidParams, name + " does not sum to 1");
  }
}

}  // namespace

void validate_hyper(const Hyperparams& hyper) {
  if (!(hyper.alpha > 0.0)) {
    throw Error(ErrorKind::kInvalidParams, "alpha must be positive");
  }
  if (!(hyper.sigma_mu > 0.0)) {
    throw Error(ErrorKind::kInvalidParams, "sigma_mu must be positive");
  }
  if (!(hyper.sigma_sigma > 0.0)) {
    throw Error(ErrorKind::kInvalidParams, "sigma_sigma must be positive");
  }
  if (!std::isfinite(hyper.mu_mu) || !std::isfinite(hyper.mu_sigma)) {
    throw Error(ErrorKind::kInvalidParams, "prior locations must be finite");
  }
}

void validate_params(const ModelParams& params) {
  const int n = params.n_states();
  if (n < 1) throw Error(ErrorKind::kInvalidParams, "no states");
  if (params.trans.rows() != n || params.trans.cols() != n) {
    throw Error(ErrorKind::kInvalidParams, "trans must be N x N");
  }
  if (params.mu.rows() != n) {
    throw Error(ErrorKind::kInvalidParams, "mu must have N rows");
  }
  if (params.sigma.size() != params.mu.cols()) {
    throw Error(ErrorKind::kInvalidParams, "sigma must have D entries");
  }
  check_distribution(params.pi, "pi");
  for (int i = 0; i < n; ++i) {
    check_distribution(params.trans.row(i).transpose(),
                       "trans row " + std::to_string(i));
  }
  if (!(params.mu.row(0).array() == 0.0).all()) {
    throw Error(ErrorKind::kInvalidParams, "mu[0] must be the zero vector");
  }
  if (!params.mu.allFinite()) {
    throw Error(ErrorKind::kInvalidParams, "mu must be finite");
  }
  if (!(params.sigma.array() > 0.0).all() || !params.sigma.allFinite()) {
    throw Error(ErrorKind::kInvalidParams, "sigma must be positive");
  }
}

ModelParams permute_states(const ModelParams& params,
                           const Eigen::VectorXi& perm) {
  const int n = params.n_states();
  ModelParams out = params;
  for (int i = 0; i < n; ++i) {
    out.pi[perm[i]] = params.pi[i];
    out.mu.row(perm[i]) = params.mu.row(i);
    for (int j = 0; j < n; ++j) {
      out.trans(perm[i], perm[j]) = params.trans(i, j);
    }
  }
  return out;
}

}  // namespace mhphone
