#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mhphone/corpus.hpp"
#include "mhphone/random.hpp"

namespace mhphone {

/// Single-layer gated recurrent unit with a logistic readout of the final
/// hidden state:
///
///   z_t = sigmoid([x_t, h_{t-1}] W_z + b_z)
///   r_t = sigmoid([x_t, h_{t-1}] W_r + b_r)
///   n_t = tanh([x_t, r_t * h_{t-1}] W_n + b_n)
///   h_t = (1 - z_t) * n_t + z_t * h_{t-1},    h_0 = 0
///   p   = sigmoid(w . h_P + b)
///
/// The same struct doubles as the gradient container.
struct GruNet {
  Eigen::MatrixXd w_update;  // (D + H) x H
  Eigen::MatrixXd w_reset;   // (D + H) x H
  Eigen::MatrixXd w_cand;    // (D + H) x H
  Eigen::VectorXd b_update;  // H
  Eigen::VectorXd b_reset;   // H
  Eigen::VectorXd b_cand;    // H
  Eigen::VectorXd w_out;     // H
  double b_out = 0.0;

  int input_dim() const { return static_cast<int>(w_update.rows() - w_update.cols()); }
  int hidden_dim() const { return static_cast<int>(w_update.cols()); }

  static GruNet zeros(int input_dim, int hidden_dim);
  /// Glorot-uniform weights, zero biases.
  static GruNet random(int input_dim, int hidden_dim, Rng& rng);

  Eigen::Index parameter_count() const;
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);
};

/// Probability that `sequence` (P x D) is real.
double gru_forward(const GruNet& net, const FrameMatrix& sequence);

/// Pre-sigmoid score for each sequence of a batch.
Eigen::VectorXd gru_logits(const GruNet& net, std::span<const FrameMatrix> batch);

/// Mean binary cross-entropy of `labels` (1 = real) under the net.
double gru_bce(const GruNet& net, std::span<const FrameMatrix> batch,
               const Eigen::VectorXd& labels);

struct GruLossAndGrad {
  double loss = 0.0;
  GruNet grad;
};

/// Mean BCE and its exact gradient by backpropagation through time.
/// Throws EmptyBatch for an empty batch.
GruLossAndGrad gru_grad(const GruNet& net, std::span<const FrameMatrix> batch,
                        const Eigen::VectorXd& labels);

/// Adam with bias correction over the flattened parameter vector.
class AdamOptimizer {
 public:
  AdamOptimizer(Eigen::Index size, double learning_rate, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-8);

  void step(GruNet& net, const GruNet& grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  Eigen::VectorXd m_, v_;
};

}  // namespace mhphone
