#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mhphone/dbn.hpp"
#include "mhphone/emission.hpp"
#include "oracles.hpp"

namespace mhphone {
namespace {

using testing::corpus_of;
using testing::random_frames;
using testing::random_params;

ModelParams flat_prev(int n, int dim) {
  ModelParams p;
  p.pi = Eigen::VectorXd::Constant(n, 1.0 / n);
  p.trans = Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  p.mu = Eigen::MatrixXd::Zero(n, dim);
  p.sigma = Eigen::VectorXd::Ones(dim);
  return p;
}

// Log posterior of sigma for one dimension written straight from the
// densities: Gaussian likelihood of each residual times the LogNormal prior.
double sigma_posterior(double sigma, const std::vector<double>& residuals, const Hyperparams& h) {
  double out = 0.0;
  for (double r : residuals) {
    out += -std::log(sigma) - 0.5 * std::log(2 * std::numbers::pi) - 0.5 * r * r / (sigma * sigma);
  }
  const double z = (std::log(sigma) - h.mu_sigma) / h.sigma_sigma;
  return out - std::log(sigma) - std::log(h.sigma_sigma) - 0.5 * std::log(2 * std::numbers::pi) -
         0.5 * z * z;
}

TEST(MStep, StartCountsGiveMle) {
  FrameMatrix a = FrameMatrix::Zero(2, 1), b = FrameMatrix::Zero(2, 1);
  a(0, 0) = b(0, 0) = 1.0;
  const Corpus c = corpus_of({a, a, a, b});
  Assignment z(4, 2);
  z << 0, 0, 0, 0, 0, 0, 1, 0;
  const ModelParams p = m_step(c, z, {}, flat_prev(2, 1));
  EXPECT_DOUBLE_EQ(p.pi[0], 0.75);
  EXPECT_DOUBLE_EQ(p.pi[1], 0.25);
}

TEST(MStep, EmptyStateFallsBackToPrior) {
  std::mt19937_64 rng(1);
  const Corpus c = corpus_of({random_frames(4, 3, rng)});
  Assignment z = Assignment::Constant(1, 4, 1);
  Hyperparams h;
  ModelParams p = m_step(c, z, h, flat_prev(3, 3));
  EXPECT_TRUE(p.mu.row(2).isZero(0.0));
  EXPECT_TRUE(p.mu.row(0).isZero(0.0));
  // No transitions out of states 0 and 2: uniform rows under alpha = 1.
  EXPECT_TRUE(p.trans.row(0).isApprox(Eigen::RowVector3d::Constant(1.0 / 3)));
  EXPECT_TRUE(p.trans.row(2).isApprox(Eigen::RowVector3d::Constant(1.0 / 3)));
  h.mu_mu = 0.7;
  p = m_step(c, z, h, flat_prev(3, 3));
  EXPECT_TRUE(p.mu.row(2).isConstant(0.7, 1e-15));
  EXPECT_TRUE(p.mu.row(0).isZero(0.0));
}

TEST(MStep, DirichletMapClipsBelowZero) {
  const Eigen::VectorXd p = dirichlet_map(Eigen::Vector3d(0, 3, 1), 0.5);
  EXPECT_DOUBLE_EQ(p[0], 0.0);
  EXPECT_DOUBLE_EQ(p[1], 2.5 / 3);
  EXPECT_DOUBLE_EQ(p[2], 0.5 / 3);
  EXPECT_TRUE(dirichlet_map(Eigen::Vector2d(0, 0), 1.0).isApprox(Eigen::Vector2d(0.5, 0.5)));
}

TEST(MStep, OutputsAreValidParams) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const ModelParams prev = random_params(4, 3, rng);
    const Corpus c = corpus_of({random_frames(6, 3, rng), random_frames(6, 3, rng)});
    const Assignment z = e_step_greedy(prev, c);
    const ModelParams next = m_step(c, z, {}, prev);
    EXPECT_NO_THROW(validate_params(next));
    EXPECT_TRUE(next.mu.row(0).isZero(0.0));
  }
}

TEST(MStep, CategoricalUpdatesMaximizePosterior) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> state(0, 3);
  for (int trial = 0; trial < 10; ++trial) {
    Hyperparams h;
    h.alpha = 1.0 + trial * 0.3;
    std::vector<FrameMatrix> seqs;
    for (int w = 0; w < 8; ++w) seqs.push_back(random_frames(5, 2, rng));
    const Corpus c = corpus_of(seqs);
    Assignment z(8, 5);
    for (Eigen::Index k = 0; k < z.size(); ++k) z.data()[k] = state(rng);
    const ModelParams p = m_step(c, z, h, flat_prev(4, 2));

    Eigen::VectorXd start = Eigen::VectorXd::Constant(4, h.alpha - 1);
    Eigen::MatrixXd bigram = Eigen::MatrixXd::Constant(4, 4, h.alpha - 1);
    for (int w = 0; w < 8; ++w) {
      start[z(w, 0)] += 1;
      for (int f = 1; f < 5; ++f) bigram(z(w, f - 1), z(w, f)) += 1;
    }
    if ((start.array() > 0).all()) {
      EXPECT_LE((p.pi - testing::simplex_maximize(start)).cwiseAbs().maxCoeff(), 1e-6);
    }
    for (int j = 0; j < 4; ++j) {
      const Eigen::VectorXd row = bigram.row(j).transpose();
      if (!(row.array() > 0).all()) continue;
      EXPECT_LE((p.trans.row(j).transpose() - testing::simplex_maximize(row)).cwiseAbs().maxCoeff(),
                1e-6);
    }
  }
}

TEST(MStep, MeanUpdateMaximizesPosterior) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    Hyperparams h;
    h.mu_mu = 0.2 * trial - 1.0;
    h.sigma_mu = 0.5 + 0.3 * trial;
    const ModelParams prev = random_params(3, 2, rng);
    const Corpus c = corpus_of({random_frames(5, 2, rng), random_frames(5, 2, rng)});
    const Assignment z = e_step_greedy(prev, c);
    const ModelParams p = m_step(c, z, h, prev);
    for (int i = 1; i < 3; ++i) {
      for (int d = 0; d < 2; ++d) {
        auto objective = [&](double m) {
          double out = -0.5 * std::pow((m - h.mu_mu) / h.sigma_mu, 2);
          for (int w = 0; w < c.size(); ++w) {
            for (int f = 0; f < c.frames; ++f) {
              if (z(w, f) == i) out -= 0.5 * std::pow((c.signs[w].features(f, d) - m) / prev.sigma[d], 2);
            }
          }
          return out;
        };
        EXPECT_NEAR(p.mu(i, d), testing::grid_maximize(objective, -12.0, 12.0), 1e-6);
      }
    }
  }
}

TEST(MStep, SigmaSearchMatchesGridOnTinyInstance) {
  FrameMatrix x(4, 1);
  x << 0.3, -1.2, 0.8, 2.1;
  const Corpus c = corpus_of({x});
  const Assignment z = Assignment::Zero(1, 4);
  Hyperparams h;
  const Eigen::VectorXd sigma = update_sigma(c, z, Eigen::MatrixXd::Zero(1, 1), h);
  const std::vector<double> r{0.3, -1.2, 0.8, 2.1};
  const double s = testing::grid_maximize(
      [&](double log_sigma) { return sigma_posterior(std::exp(log_sigma), r, h); }, -8.0, 8.0);
  EXPECT_NEAR(std::log(sigma[0]), s, 1e-5);
}

TEST(MStep, SigmaSearchMatchesGridOnRandomFits) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    Hyperparams h;
    h.mu_sigma = -1.0 + 0.25 * trial;
    h.sigma_sigma = 0.5 + trial;
    const ModelParams prev = random_params(3, 2, rng);
    const Corpus c = corpus_of({random_frames(6, 2, rng), random_frames(6, 2, rng)});
    const Assignment z = e_step_greedy(prev, c);
    const ModelParams p = m_step(c, z, h, prev);
    for (int d = 0; d < 2; ++d) {
      std::vector<double> r;
      for (int w = 0; w < c.size(); ++w) {
        for (int f = 0; f < c.frames; ++f) r.push_back(c.signs[w].features(f, d) - p.mu(z(w, f), d));
      }
      const double s = testing::grid_maximize(
          [&](double log_sigma) { return sigma_posterior(std::exp(log_sigma), r, h); }, -8.0, 8.0);
      EXPECT_NEAR(std::log(p.sigma[d]), s, 1e-5);
    }
  }
}

}  // namespace
}  // namespace mhphone
