#pragma once

// Independent reference computations used only by tests. Nothing here
// calls into the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mhphone/corpus.hpp"
#include "mhphone/model_params.hpp"

namespace mhphone::testing {

inline Eigen::VectorXd random_simplex(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) p[i] = u(rng);
  return p / p.sum();
}

/// Random valid parameters with strictly positive pi and T.
inline ModelParams random_params(int n, int dim, std::mt19937_64& rng,
                                 double spread = 1.5) {
  std::uniform_real_distribution<double> coord(-spread, spread);
  std::uniform_real_distribution<double> scale(0.3, 1.5);
  ModelParams p;
  p.pi = random_simplex(n, rng);
  p.trans.resize(n, n);
  for (int i = 0; i < n; ++i) p.trans.row(i) = random_simplex(n, rng).transpose();
  p.mu = Eigen::MatrixXd::Zero(n, dim);
  for (int i = 1; i < n; ++i) {
    for (int d = 0; d < dim; ++d) p.mu(i, d) = coord(rng);
  }
  p.sigma.resize(dim);
  for (int d = 0; d < dim; ++d) p.sigma[d] = scale(rng);
  return p;
}

inline FrameMatrix random_frames(int frames, int dim, std::mt19937_64& rng,
                                 double spread = 1.5) {
  std::uniform_real_distribution<double> coord(-spread, spread);
  FrameMatrix x(frames, dim);
  for (int f = 0; f < frames; ++f) {
    for (int d = 0; d < dim; ++d) x(f, d) = coord(rng);
  }
  return x;
}

/// Wraps full-length sequences (no padding) into a synthetic corpus.
inline Corpus corpus_of(const std::vector<FrameMatrix>& seqs) {
  std::vector<SignSequence> signs;
  for (const FrameMatrix& x : seqs) {
    SignSequence s;
    s.features = x;
    s.true_length = static_cast<int>(x.rows());
    signs.push_back(s);
  }
  return make_corpus(std::move(signs), /*synthetic=*/true);
}

/// Unnormalized probability of frame x under state i, times `prior`,
/// written directly from the exponential form.
inline double state_weight(const ModelParams& p, const Eigen::RowVectorXd& x,
                           int i, double prior) {
  double quad = 0.0;
  for (int d = 0; d < p.dim(); ++d) {
    const double r = x[d] - p.mu(i, d);
    quad += r * r / (p.sigma[d] * p.sigma[d]);
  }
  return std::exp(-0.5 * quad) * prior;
}

/// Per-step exhaustive argmax: at each frame every state is scored and the
/// scores are normalized into a distribution before picking the mode.
inline std::vector<int> greedy_oracle(const ModelParams& p, const FrameMatrix& x) {
  std::vector<int> path;
  for (Eigen::Index f = 0; f < x.rows(); ++f) {
    std::vector<double> w(p.n_states());
    for (int i = 0; i < p.n_states(); ++i) {
      const double prior = f == 0 ? p.pi[i] : p.trans(path.back(), i);
      w[i] = state_weight(p, x.row(f), i, prior);
    }
    const double z = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& v : w) v /= z;
    path.push_back(static_cast<int>(std::max_element(w.begin(), w.end()) - w.begin()));
  }
  return path;
}

/// Log score of a full path, summed frame by frame.
inline double path_log_score(const ModelParams& p, const FrameMatrix& x,
                             const std::vector<int>& path) {
  double s = 0.0;
  for (Eigen::Index f = 0; f < x.rows(); ++f) {
    const int c = path[f];
    s += std::log(f == 0 ? p.pi[c] : p.trans(path[f - 1], c));
    for (int d = 0; d < p.dim(); ++d) {
      const double r = (x(f, d) - p.mu(c, d)) / p.sigma[d];
      s -= 0.5 * r * r;
    }
  }
  return s;
}

/// Enumerates all N^P label sequences and returns the best one.
inline std::vector<int> exhaustive_best_path(const ModelParams& p, const FrameMatrix& x) {
  const int n = p.n_states();
  const auto len = static_cast<int>(x.rows());
  std::vector<int> path(len, 0), best;
  double best_score = -std::numeric_limits<double>::infinity();
  while (true) {
    const double s = path_log_score(p, x, path);
    if (s > best_score) {
      best_score = s;
      best = path;
    }
    int k = len - 1;
    while (k >= 0 && path[k] == n - 1) path[k--] = 0;
    if (k < 0) break;
    ++path[k];
  }
  return best;
}

/// Maximizes a 1-D function by a coarse grid followed by two zoomed grids.
template <typename F>
double grid_maximize(F&& f, double lo, double hi) {
  double best = lo;
  for (int pass = 0; pass < 4; ++pass) {
    const int steps = 4000;
    const double h = (hi - lo) / steps;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= steps; ++k) {
      const double x = lo + k * h;
      const double v = f(x);
      if (v > best_val) {
        best_val = v;
        best = x;
      }
    }
    lo = best - 2 * h;
    hi = best + 2 * h;
  }
  return best;
}

/// Maximizes sum_i c_i log p_i over the simplex by gradient ascent in
/// softmax coordinates. All c_i must be positive.
inline Eigen::VectorXd simplex_maximize(const Eigen::VectorXd& c) {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(c.size());
  const double total = c.sum();
  Eigen::VectorXd p;
  for (int it = 0; it < 20000; ++it) {
    p = (z.array() - z.maxCoeff()).exp();
    p /= p.sum();
    const Eigen::VectorXd grad = c - total * p;
    if (grad.cwiseAbs().maxCoeff() < 1e-12 * total) break;
    z += grad / total;
  }
  return p;
}

/// Exhaustive search for the relabeling of states 1..N-1 of `estimate`
/// that best matches `truth` (state 0 stays fixed). perm[i] is the
/// estimated state aligned to truth state i.
inline std::vector<int> align_states(const Eigen::MatrixXd& truth_mu,
                                     const Eigen::MatrixXd& est_mu, bool fix_zero = true) {
  const int n = static_cast<int>(truth_mu.rows());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  auto begin = perm.begin() + (fix_zero ? 1 : 0);
  do {
    double cost = 0.0;
    for (int i = 0; i < n; ++i) cost += (truth_mu.row(i) - est_mu.row(perm[i])).squaredNorm();
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(begin, perm.end()));
  return best;
}

struct MeanAndError {
  double mean = 0.0;
  double standard_error = 0.0;
};

inline MeanAndError mean_and_error(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  MeanAndError out;
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.standard_error = std::sqrt(ss / (n - 1.0) / n);
  return out;
}

/// Draws a Markov chain of `length` states with std::discrete_distribution.
inline std::vector<int> simulate_chain(const Eigen::VectorXd& pi, const Eigen::MatrixXd& trans,
                                       int length, std::mt19937_64& rng) {
  auto draw = [&](const Eigen::VectorXd& w) {
    std::discrete_distribution<int> dist(w.data(), w.data() + w.size());
    return dist(rng);
  };
  std::vector<int> chain;
  chain.reserve(static_cast<std::size_t>(length));
  chain.push_back(draw(pi));
  for (int t = 1; t < length; ++t) {
    const Eigen::VectorXd row = trans.row(chain.back()).transpose();
    chain.push_back(draw(row));
  }
  return chain;
}

}  // namespace mhphone::testing
