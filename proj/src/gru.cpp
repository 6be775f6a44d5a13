#include "mhphone/gru.hpp"

#include <cmath>

#include "mhphone/error.hpp"

namespace mhphone {
namespace {

using Mat = Eigen::MatrixXd;

Mat sigmoid(const Mat& a) {
  return (1.0 / (1.0 + (-a.array()).exp())).matrix();
}

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

// Stable log(1 + exp(l)) - y * l.
double bce_from_logit(double logit, double label) {
  return std::max(logit, 0.0) - label * logit + std::log1p(std::exp(-std::abs(logit)));
}

void check_batch(const GruNet& net, std::span<const FrameMatrix> batch) {
  if (batch.empty()) throw Error(ErrorKind::kEmptyBatch, "batch has no sequences");
  const auto frames = batch.front().rows();
  for (const FrameMatrix& seq : batch) {
    if (seq.cols() != net.input_dim() || seq.rows() != frames) {
      throw Error(ErrorKind::kInvalidParams,
                  "sequence shape does not match the discriminator");
    }
  }
}

// Rows of frame t across the batch, B x D.
Mat frame_slice(std::span<const FrameMatrix> batch, Eigen::Index t) {
  Mat x(static_cast<Eigen::Index>(batch.size()), batch.front().cols());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    x.row(static_cast<Eigen::Index>(b)) = batch[b].row(t);
  }
  return x;
}

struct StepCache {
  Mat x, h_prev, z, r, n;
};

struct ForwardPass {
  std::vector<StepCache> steps;
  Mat h_final;
};

ForwardPass run_forward(const GruNet& net, std::span<const FrameMatrix> batch,
                        bool keep_cache) {
  const auto batch_size = static_cast<Eigen::Index>(batch.size());
  const auto hidden = net.hidden_dim();
  const auto dim = net.input_dim();
  ForwardPass pass;
  Mat h = Mat::Zero(batch_size, hidden);
  Mat v(batch_size, dim + hidden);
  const Eigen::Index frames = batch.front().rows();
  if (keep_cache) pass.steps.reserve(static_cast<std::size_t>(frames));
  for (Eigen::Index t = 0; t < frames; ++t) {
    Mat x = frame_slice(batch, t);
    v.leftCols(dim) = x;
    v.rightCols(hidden) = h;
    Mat z = sigmoid((v * net.w_update).rowwise() + net.b_update.transpose());
    Mat r = sigmoid((v * net.w_reset).rowwise() + net.b_reset.transpose());
    v.rightCols(hidden) = r.cwiseProduct(h);
    Mat n = ((v * net.w_cand).rowwise() + net.b_cand.transpose()).array().tanh().matrix();
    Mat h_next = (1.0 - z.array()).matrix().cwiseProduct(n) + z.cwiseProduct(h);
    if (keep_cache) {
      pass.steps.push_back({std::move(x), h, std::move(z), std::move(r), std::move(n)});
    }
    h = std::move(h_next);
  }
  pass.h_final = std::move(h);
  return pass;
}

}  // namespace

GruNet GruNet::zeros(int input_dim, int hidden_dim) {
  GruNet net;
  const int rows = input_dim + hidden_dim;
  net.w_update = Mat::Zero(rows, hidden_dim);
  net.w_reset = Mat::Zero(rows, hidden_dim);
  net.w_cand = Mat::Zero(rows, hidden_dim);
  net.b_update = Eigen::VectorXd::Zero(hidden_dim);
  net.b_reset = Eigen::VectorXd::Zero(hidden_dim);
  net.b_cand = Eigen::VectorXd::Zero(hidden_dim);
  net.w_out = Eigen::VectorXd::Zero(hidden_dim);
  net.b_out = 0.0;
  return net;
}

GruNet GruNet::random(int input_dim, int hidden_dim, Rng& rng) {
  GruNet net = zeros(input_dim, hidden_dim);
  const double gate_limit = std::sqrt(6.0 / (input_dim + 2.0 * hidden_dim));
  const double out_limit = std::sqrt(6.0 / (hidden_dim + 1.0));
  std::uniform_real_distribution<double> gate(-gate_limit, gate_limit);
  std::uniform_real_distribution<double> out(-out_limit, out_limit);
  for (Mat* w : {&net.w_update, &net.w_reset, &net.w_cand}) {
    for (Eigen::Index i = 0; i < w->size(); ++i) w->data()[i] = gate(rng);
  }
  for (Eigen::Index i = 0; i < net.w_out.size(); ++i) net.w_out[i] = out(rng);
  return net;
}

Eigen::Index GruNet::parameter_count() const {
  return 3 * w_update.size() + 3 * b_update.size() + w_out.size() + 1;
}

Eigen::VectorXd GruNet::flatten() const {
  Eigen::VectorXd flat(parameter_count());
  Eigen::Index at = 0;
  auto put = [&](const auto& block) {
    flat.segment(at, block.size()) = block.reshaped();
    at += block.size();
  };
  put(w_update);
  put(w_reset);
  put(w_cand);
  put(b_update);
  put(b_reset);
  put(b_cand);
  put(w_out);
  flat[at] = b_out;
  return flat;
}

void GruNet::assign(const Eigen::VectorXd& flat) {
  Eigen::Index at = 0;
  auto take = [&](auto& block) {
    block.reshaped() = flat.segment(at, block.size());
    at += block.size();
  };
  take(w_update);
  take(w_reset);
  take(w_cand);
  take(b_update);
  take(b_reset);
  take(b_cand);
  take(w_out);
  b_out = flat[at];
}

double gru_forward(const GruNet& net, const FrameMatrix& sequence) {
  const FrameMatrix* one = &sequence;
  return sigmoid(gru_logits(net, std::span<const FrameMatrix>(one, 1))[0]);
}

Eigen::VectorXd gru_logits(const GruNet& net, std::span<const FrameMatrix> batch) {
  check_batch(net, batch);
  const ForwardPass pass = run_forward(net, batch, /*keep_cache=*/false);
  return (pass.h_final * net.w_out).array() + net.b_out;
}

double gru_bce(const GruNet& net, std::span<const FrameMatrix> batch,
               const Eigen::VectorXd& labels) {
  const Eigen::VectorXd logits = gru_logits(net, batch);
  double total = 0.0;
  for (Eigen::Index b = 0; b < logits.size(); ++b) {
    total += bce_from_logit(logits[b], labels[b]);
  }
  return total / static_cast<double>(logits.size());
}

GruLossAndGrad gru_grad(const GruNet& net, std::span<const FrameMatrix> batch,
                        const Eigen::VectorXd& labels) {
  check_batch(net, batch);
  const auto batch_size = static_cast<Eigen::Index>(batch.size());
  const auto hidden = net.hidden_dim();
  const auto dim = net.input_dim();
  const ForwardPass pass = run_forward(net, batch, /*keep_cache=*/true);
  const Eigen::VectorXd logits = (pass.h_final * net.w_out).array() + net.b_out;

  GruLossAndGrad out;
  out.grad = GruNet::zeros(dim, hidden);
  Eigen::VectorXd dlogit(batch_size);
  for (Eigen::Index b = 0; b < batch_size; ++b) {
    out.loss += bce_from_logit(logits[b], labels[b]);
    dlogit[b] = (sigmoid(logits[b]) - labels[b]) / static_cast<double>(batch_size);
  }
  out.loss /= static_cast<double>(batch_size);

  GruNet& g = out.grad;
  g.w_out = pass.h_final.transpose() * dlogit;
  g.b_out = dlogit.sum();
  Mat dh = dlogit * net.w_out.transpose();  // B x H

  Mat v(batch_size, dim + hidden);
  for (auto step = pass.steps.rbegin(); step != pass.steps.rend(); ++step) {
    const Mat& z = step->z;
    const Mat& r = step->r;
    const Mat& n = step->n;
    const Mat& h_prev = step->h_prev;

    const Mat dn = dh.cwiseProduct((1.0 - z.array()).matrix());
    const Mat dz = dh.cwiseProduct(h_prev - n);
    Mat dh_prev = dh.cwiseProduct(z);

    const Mat da_n = dn.cwiseProduct((1.0 - n.array().square()).matrix());
    v.leftCols(dim) = step->x;
    v.rightCols(hidden) = r.cwiseProduct(h_prev);
    g.w_cand += v.transpose() * da_n;
    g.b_cand += da_n.colwise().sum().transpose();
    const Mat d_rh = da_n * net.w_cand.bottomRows(hidden).transpose();
    const Mat dr = d_rh.cwiseProduct(h_prev);
    dh_prev += d_rh.cwiseProduct(r);

    v.rightCols(hidden) = h_prev;
    const Mat da_z = dz.cwiseProduct(z.cwiseProduct((1.0 - z.array()).matrix()));
    const Mat da_r = dr.cwiseProduct(r.cwiseProduct((1.0 - r.array()).matrix()));
    g.w_update += v.transpose() * da_z;
    g.b_update += da_z.colwise().sum().transpose();
    g.w_reset += v.transpose() * da_r;
    g.b_reset += da_r.colwise().sum().transpose();
    dh_prev += da_z * net.w_update.bottomRows(hidden).transpose();
    dh_prev += da_r * net.w_reset.bottomRows(hidden).transpose();

    dh = std::move(dh_prev);
  }
  return out;
}

AdamOptimizer::AdamOptimizer(Eigen::Index size, double learning_rate, double beta1,
                             double beta2, double epsilon)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(epsilon),
      m_(Eigen::VectorXd::Zero(size)),
      v_(Eigen::VectorXd::Zero(size)) {}

void AdamOptimizer::step(GruNet& net, const GruNet& grad) {
  ++t_;
  const Eigen::VectorXd g = grad.flatten();
  m_ = beta1_ * m_ + (1.0 - beta1_) * g;
  v_ = beta2_ * v_ + (1.0 - beta2_) * g.cwiseProduct(g);
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const Eigen::VectorXd update =
      (lr_ * (m_ / c1).array() / ((v_ / c2).array().sqrt() + eps_)).matrix();
  net.assign(net.flatten() - update);
}

}  // namespace mhphone
