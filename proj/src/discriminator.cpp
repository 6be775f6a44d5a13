#include "mhphone/discriminator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <spdlog/spdlog.h>

#include "mhphone/error.hpp"
#include "mhphone/gru.hpp"
#include "mhphone/random.hpp"

namespace mhphone {
namespace {

struct Split {
  std::vector<FrameMatrix> train, test;
  Eigen::VectorXd train_labels, test_labels;
};

void append(std::vector<FrameMatrix>& seqs, std::vector<double>& labels,
            const Corpus& corpus, const std::vector<int>& indices, double label) {
  for (int i : indices) {
    seqs.push_back(corpus.signs[i].features);
    labels.push_back(label);
  }
}

Split stratified_split(const Corpus& real, const Corpus& fake, double fraction,
                       Rng& rng) {
  std::vector<FrameMatrix> train, test;
  std::vector<double> train_labels, test_labels;
  for (const auto& [corpus, label] :
       {std::pair<const Corpus*, double>{&real, 1.0}, {&fake, 0.0}}) {
    std::vector<int> order(static_cast<std::size_t>(corpus->size()));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_train = static_cast<std::size_t>(
        std::lround(fraction * static_cast<double>(order.size())));
    append(train, train_labels, *corpus, {order.begin(), order.begin() + n_train}, label);
    append(test, test_labels, *corpus, {order.begin() + n_train, order.end()}, label);
  }
  Split split;
  split.train = std::move(train);
  split.test = std::move(test);
  split.train_labels = Eigen::Map<Eigen::VectorXd>(train_labels.data(),
                                                   static_cast<Eigen::Index>(train_labels.size()));
  split.test_labels = Eigen::Map<Eigen::VectorXd>(test_labels.data(),
                                                  static_cast<Eigen::Index>(test_labels.size()));
  return split;
}

SeedOutcome run_seed(const Corpus& real, const SignGenerator& generator,
                     const DiscriminatorOptions& options, std::uint64_t seed) {
  const Corpus fake = generator(real.size(), real.frames, derive_seed(seed, "generate"));
  if (fake.size() != real.size() || fake.frames != real.frames || fake.dim != real.dim) {
    throw Error(ErrorKind::kInvalidParams,
                "generator output does not match the real corpus shape");
  }
  Rng split_rng = make_rng(seed, "split");
  const Split split = stratified_split(real, fake, options.train_fraction, split_rng);

  Rng init_rng = make_rng(seed, "init");
  GruNet net = GruNet::random(real.dim, options.hidden, init_rng);
  AdamOptimizer adam(net.parameter_count(), options.learning_rate);

  SeedOutcome outcome;
  outcome.initial_train_bce = gru_bce(net, split.train, split.train_labels);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const GruLossAndGrad step = gru_grad(net, split.train, split.train_labels);
    adam.step(net, step.grad);
  }
  outcome.final_train_bce = gru_bce(net, split.train, split.train_labels);
  outcome.test_bce = gru_bce(net, split.test, split.test_labels);
  return outcome;
}

}  // namespace

EvalReport evaluate_generator(const Corpus& real, const SignGenerator& generator,
                              const DiscriminatorOptions& options) {
  if (real.size() < 10) {
    throw Error(ErrorKind::kNotEnoughData, "evaluation needs at least 10 real signs");
  }
  if (options.seeds < 1 || options.hidden < 1 || options.epochs < 0 ||
      !(options.train_fraction > 0.0 && options.train_fraction < 1.0)) {
    throw Error(ErrorKind::kInvalidParams, "invalid discriminator options");
  }
  EvalReport report;
  report.options = options;
  report.n_seeds = options.seeds;
  report.details.resize(static_cast<std::size_t>(options.seeds));
  parallel_for(static_cast<std::size_t>(options.seeds), options.threads,
               [&](std::size_t s) {
                 const std::uint64_t seed = derive_seed(
                     options.seed, "evaluate/seed-" + std::to_string(s));
                 report.details[s] = run_seed(real, generator, options, seed);
               });
  for (const SeedOutcome& outcome : report.details) {
    report.per_seed.push_back(outcome.test_bce);
  }
  const double n = static_cast<double>(report.per_seed.size());
  report.bce_mean = std::accumulate(report.per_seed.begin(), report.per_seed.end(), 0.0) / n;
  if (report.per_seed.size() > 1) {
    double ss = 0.0;
    for (double v : report.per_seed) ss += (v - report.bce_mean) * (v - report.bce_mean);
    report.bce_std = std::sqrt(ss / (n - 1.0));
  }
  spdlog::debug("discriminator bce {:.4f} +- {:.4f}", report.bce_mean, report.bce_std);
  return report;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json details = nlohmann::json::array();
  for (const SeedOutcome& d : report.details) {
    details.push_back({{"test_bce", d.test_bce},
                       {"initial_train_bce", d.initial_train_bce},
                       {"final_train_bce", d.final_train_bce}});
  }
  const DiscriminatorOptions& o = report.options;
  return {{"bce_mean", report.bce_mean},
          {"bce_std", report.bce_std},
          {"n_seeds", report.n_seeds},
          {"per_seed", report.per_seed},
          {"details", details},
          {"discriminator",
           {{"architecture", "gru"},
            {"hidden", o.hidden},
            {"epochs", o.epochs},
            {"learning_rate", o.learning_rate},
            {"optimizer", "adam"},
            {"train_fraction", o.train_fraction},
            {"seeds", o.seeds},
            {"seed", o.seed}}}};
}

}  // namespace mhphone
