#include "mhphone/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <memory>
#include <ostream>
#include <string>

#include <fmt/format.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "mhphone/baselines.hpp"
#include "mhphone/corpus.hpp"
#include "mhphone/dbn.hpp"
#include "mhphone/discriminator.hpp"
#include "mhphone/error.hpp"
#include "mhphone/interpret.hpp"
#include "mhphone/model_io.hpp"
#include "mhphone/random.hpp"
#include "mhphone/synth.hpp"

namespace mhphone {
namespace {

using nlohmann::json;

constexpr const char* kFooter = R"(Seeds: every random draw derives from --seed through
  splitmix64(seed ^ fnv1a64(component)); components are "synth/truth",
  "synth/corpus", "train", "generate", "evaluate" and "export".

Corpus files (JSON lines): a header
  {"format":"mh-corpus","version":1,"D":14,"P":25,"feature_order":[...]}
  followed by one record per sign
  {"gloss":str,"signer":str,"noise":"none|low|medium|high|broken","frames":[[D floats],...]}
  holding only the unpadded frames. Zero rows may only form a suffix.

Model files (JSON): {"format":"mh-model","version":1,"kind":"dbn|gmm|gmm-lda",
  "N":..,"D":..,"P":..,"hyper":{..}, parameters.., "fit":{..}, "config":{..}}.

Environment: MH_PHONE_LOG sets the log level (trace, debug, info, warn, error, off).)";

struct GlobalFlags {
  std::uint64_t seed = 0;
  std::size_t threads = default_threads();
  std::string log_level;
};

struct HyperFlags {
  Hyperparams hyper;
  void attach(CLI::App* cmd) {
    cmd->add_option("--alpha", hyper.alpha, "Dirichlet concentration")->capture_default_str();
    cmd->add_option("--mu-mu", hyper.mu_mu, "prior mean of prototypes")->capture_default_str();
    cmd->add_option("--sigma-mu", hyper.sigma_mu, "prior std of prototypes")->capture_default_str();
    cmd->add_option("--mu-sigma", hyper.mu_sigma, "LogNormal location of sigma")->capture_default_str();
    cmd->add_option("--sigma-sigma", hyper.sigma_sigma, "LogNormal scale of sigma")->capture_default_str();
  }
};

json hyper_echo(const Hyperparams& h) {
  return {{"alpha", h.alpha},
          {"mu_mu", h.mu_mu},
          {"sigma_mu", h.sigma_mu},
          {"mu_sigma", h.mu_sigma},
          {"sigma_sigma", h.sigma_sigma}};
}

void write_json(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path);
}

void configure_logging(const std::string& flag_level, std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("mh-phone", std::move(sink));
  std::string level = flag_level;
  if (level.empty()) {
    const char* env = std::getenv("MH_PHONE_LOG");
    level = env != nullptr ? env : "warn";
  }
  logger->set_level(spdlog::level::from_str(level));
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(std::move(logger));
}

// --- synth ---------------------------------------------------------------

struct SynthFlags {
  int n_states = 5;
  int m_signs = 300;
  int frames = kDefaultFrames;
  int dim = kPoseFeatures;
  double sigma = 0.1;
  bool noisy_end_token = false;
  std::string out;
  std::string truth_out;
};

void run_synth(const SynthFlags& f, const GlobalFlags& g) {
  TruthOptions truth_options;
  truth_options.sigma = f.sigma;
  const ModelParams truth =
      random_truth(f.n_states, f.dim, derive_seed(g.seed, "synth/truth"), truth_options);
  SampleOptions sample_options;
  sample_options.exact_end_token = !f.noisy_end_token;
  const LabeledCorpus data = synth_corpus(truth, f.m_signs, derive_seed(g.seed, "synth/corpus"),
                                          f.frames, sample_options);
  const json config = {{"command", "synth"},
                       {"seed", g.seed},
                       {"n_states", f.n_states},
                       {"m_signs", f.m_signs},
                       {"frames", f.frames},
                       {"dim", f.dim},
                       {"sigma", f.sigma},
                       {"exact_end_token", !f.noisy_end_token},
                       {"out", f.out},
                       {"truth_out", f.truth_out}};
  save_corpus(f.out, data.corpus, config);
  if (!f.truth_out.empty()) {
    StoredModel stored;
    stored.params = truth;
    stored.frames = f.frames;
    stored.feature_order = data.corpus.feature_order;
    stored.config = config;
    save_model(f.truth_out, stored);
  }
  spdlog::info("wrote {} signs to {}", data.corpus.size(), f.out);
}

// --- train ---------------------------------------------------------------

struct TrainFlags {
  std::string corpus;
  std::string model = "dbn";
  int n_states = 5;
  int topics = 10;
  std::string e_step = "greedy";
  int max_iters = 200;
  double tol = 1e-6;
  bool include_broken = false;
  std::string out;
  HyperFlags hyper;
};

void run_train(const TrainFlags& f, const GlobalFlags& g) {
  const Hyperparams& hyper = f.hyper.hyper;
  validate_hyper(hyper);
  const ModelKind kind = parse_model_kind(f.model);
  const EStepKind e_kind = parse_e_step(f.e_step);
  LoadOptions load;
  load.include_broken = f.include_broken;
  const Corpus corpus = load_corpus(f.corpus, load);
  const std::uint64_t seed = derive_seed(g.seed, "train");

  StoredModel stored;
  stored.hyper = hyper;
  stored.frames = corpus.frames;
  stored.feature_order = corpus.feature_order;
  stored.config = {{"command", "train"},
                   {"seed", g.seed},
                   {"corpus", f.corpus},
                   {"model", f.model},
                   {"n_states", f.n_states},
                   {"max_iters", f.max_iters},
                   {"tol", f.tol},
                   {"include_broken", f.include_broken},
                   {"hyper", hyper_echo(hyper)},
                   {"m_signs", corpus.size()},
                   {"out", f.out}};
  if (kind == ModelKind::kDbn) stored.config["e_step"] = f.e_step;
  if (kind == ModelKind::kGmmLda) stored.config["topics"] = f.topics;

  if (kind == ModelKind::kDbn) {
    FitOptions options;
    options.max_iters = f.max_iters;
    options.tol = f.tol;
    options.e_step = e_kind;
    options.seed = seed;
    options.threads = g.threads;
    FitResult fit = fit_em(corpus, f.n_states, hyper, options);
    stored.params = std::move(fit.params);
    stored.fit = std::move(fit.report);
  } else {
    BaselineFitOptions options;
    options.max_iters = f.max_iters;
    options.tol = f.tol;
    options.seed = seed;
    options.threads = g.threads;
    if (kind == ModelKind::kGmm) {
      GmmFit fit = fit_gmm(corpus, f.n_states, hyper, options);
      stored.params = std::move(fit.params);
      stored.fit = std::move(fit.report);
    } else {
      GmmLdaFit fit = fit_gmm_lda(corpus, f.n_states, f.topics, hyper, options);
      stored.params = std::move(fit.params);
      stored.fit = std::move(fit.report);
    }
  }
  save_model(f.out, stored);
  spdlog::info("{} fit: {} iterations, converged={}", f.model, stored.fit.iterations,
               stored.fit.converged);
}

// --- generate / export-samples -------------------------------------------

struct GenerateFlags {
  std::string model;
  int n = 100;
  int frames = 0;  // 0: the model's P
  std::string out;
};

Corpus draw_samples(const StoredModel& model, int n, int frames, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::kInvalidParams, "--n must be positive");
  const int p = frames > 0 ? frames : model.frames;
  Corpus corpus = make_generator(model)(n, p, seed);
  if (static_cast<int>(model.feature_order.size()) == corpus.dim) {
    corpus.feature_order = model.feature_order;
  }
  return corpus;
}

void run_generate(const GenerateFlags& f, const GlobalFlags& g) {
  const StoredModel model = load_model(f.model);
  const Corpus corpus = draw_samples(model, f.n, f.frames, derive_seed(g.seed, "generate"));
  const json config = {{"command", "generate"}, {"seed", g.seed}, {"model", f.model},
                       {"kind", to_string(model.kind())}, {"n", f.n},
                       {"frames", corpus.frames}, {"out", f.out}};
  save_corpus(f.out, corpus, config);
}

void run_export(const GenerateFlags& f, const GlobalFlags& g) {
  const StoredModel model = load_model(f.model);
  const Corpus corpus = draw_samples(model, f.n, f.frames, derive_seed(g.seed, "export"));
  std::ofstream out(f.out);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + f.out);
  out << "sample";
  for (int t = 0; t < corpus.frames; ++t) {
    for (const std::string& name : corpus.feature_order) {
      out << fmt::format(",t{:02d}.{}", t, name);
    }
  }
  out << '\n';
  for (int w = 0; w < corpus.size(); ++w) {
    out << w;
    const FrameMatrix& x = corpus.signs[w].features;
    for (Eigen::Index t = 0; t < x.rows(); ++t) {
      for (Eigen::Index d = 0; d < x.cols(); ++d) out << ',' << fmt::format("{}", x(t, d));
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + f.out);
}

// --- evaluate ------------------------------------------------------------

struct EvaluateFlags {
  std::string real;
  std::string model;
  int seeds = 5;
  int epochs = 50;
  double lr = 1e-2;
  int hidden = 16;
  double split = 0.8;
  bool include_broken = false;
  std::string report;
};

void run_evaluate(const EvaluateFlags& f, const GlobalFlags& g) {
  LoadOptions load;
  load.include_broken = f.include_broken;
  const Corpus real = load_corpus(f.real, load);
  const StoredModel model = load_model(f.model);
  if (model.dim() != real.dim) {
    throw Error(ErrorKind::kInvalidParams, "model and corpus disagree on D");
  }
  DiscriminatorOptions options;
  options.seeds = f.seeds;
  options.epochs = f.epochs;
  options.learning_rate = f.lr;
  options.hidden = f.hidden;
  options.train_fraction = f.split;
  options.seed = derive_seed(g.seed, "evaluate");
  options.threads = g.threads;
  const EvalReport report = evaluate_generator(real, make_generator(model), options);
  json doc = to_json(report);
  doc["generator"] = to_string(model.kind());
  doc["config"] = {{"command", "evaluate"}, {"seed", g.seed}, {"real", f.real},
                   {"model", f.model}, {"seeds", f.seeds}, {"epochs", f.epochs},
                   {"lr", f.lr}, {"hidden", f.hidden}, {"split", f.split},
                   {"include_broken", f.include_broken}, {"report", f.report}};
  write_json(f.report, doc);
  spdlog::info("BCE {:.4f} +- {:.4f}", report.bce_mean, report.bce_std);
}

// --- interpret -----------------------------------------------------------

struct InterpretFlags {
  std::string model;
  double frame_ms = 98.0;
  int horizon = 20;
  bool include_end = false;
  std::string out;
};

void run_interpret(const InterpretFlags& f, const GlobalFlags& g, std::ostream& out) {
  const StoredModel model = load_model(f.model);
  const auto* params = std::get_if<ModelParams>(&model.params);
  if (params == nullptr) {
    throw Error(ErrorKind::kInvalidParams, "interpret needs a dbn model");
  }
  InterpretConfig config;
  config.frame_ms = f.frame_ms;
  config.horizon = f.horizon;
  config.sign_frames = model.frames;
  config.include_end_in_ranking = f.include_end;
  config.feature_order = model.feature_order;
  const InterpretReport report = summarize(*params, config);
  json doc = to_json(report);
  doc["config"]["command"] = "interpret";
  doc["config"]["seed"] = g.seed;
  doc["config"]["model"] = f.model;
  doc["config"]["out"] = f.out;
  write_json(f.out, doc);
  out << format_report(report);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"mh-phone: movement-hold phonetic model of sign language"};
  app.footer(kFooter);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags global;
  app.add_option("--seed", global.seed, "global seed for every random stream")
      ->capture_default_str();
  app.add_option("--threads", global.threads, "worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber);
  app.add_option("--log-level", global.log_level, "trace|debug|info|warn|error|off");

  SynthFlags synth;
  auto* synth_cmd = app.add_subcommand("synth", "sample a corpus from a random ground-truth model");
  synth_cmd->add_option("--n-states", synth.n_states, "states including the end state")->capture_default_str();
  synth_cmd->add_option("--m-signs", synth.m_signs, "number of signs")->capture_default_str();
  synth_cmd->add_option("--frames", synth.frames, "P")->capture_default_str();
  synth_cmd->add_option("--dim", synth.dim, "D")->capture_default_str();
  synth_cmd->add_option("--sigma", synth.sigma, "dispersion of the truth")->capture_default_str();
  synth_cmd->add_flag("--noisy-end-token", synth.noisy_end_token,
                      "draw end-state frames from N(0, sigma) instead of exact zeros");
  synth_cmd->add_option("--out", synth.out, "corpus file")->required();
  synth_cmd->add_option("--truth-out", synth.truth_out, "model file for the ground truth");

  TrainFlags train;
  auto* train_cmd = app.add_subcommand("train", "fit a model to a corpus");
  train_cmd->add_option("--corpus", train.corpus, "corpus file")->required();
  train_cmd->add_option("--model", train.model, "dbn|gmm|gmm-lda")->capture_default_str();
  train_cmd->add_option("--n-states", train.n_states, "states / mixture components")->capture_default_str();
  train_cmd->add_option("--topics", train.topics, "topics for gmm-lda")->capture_default_str();
  train_cmd->add_option("--e-step", train.e_step, "greedy|viterbi")->capture_default_str();
  train_cmd->add_option("--max-iters", train.max_iters)->capture_default_str();
  train_cmd->add_option("--tol", train.tol, "relative log-joint change")->capture_default_str();
  train_cmd->add_flag("--include-broken", train.include_broken, "keep signs tagged broken");
  train_cmd->add_option("--out", train.out, "model file")->required();
  train.hyper.attach(train_cmd);

  GenerateFlags generate;
  auto* generate_cmd = app.add_subcommand("generate", "sample a corpus from a trained model");
  generate_cmd->add_option("--model", generate.model, "model file")->required();
  generate_cmd->add_option("--n", generate.n, "number of signs")->capture_default_str();
  generate_cmd->add_option("--frames", generate.frames, "P (default: the model's)");
  generate_cmd->add_option("--out", generate.out, "corpus file")->required();

  GenerateFlags export_flags;
  auto* export_cmd =
      app.add_subcommand("export-samples", "write generated signs as flat CSV rows");
  export_cmd->add_option("--model", export_flags.model, "model file")->required();
  export_cmd->add_option("--n", export_flags.n, "number of signs")->capture_default_str();
  export_cmd->add_option("--frames", export_flags.frames, "P (default: the model's)");
  export_cmd->add_option("--out", export_flags.out, "CSV file")->required();

  EvaluateFlags evaluate;
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "discriminator BCE of a generator against real data");
  evaluate_cmd->add_option("--real", evaluate.real, "real corpus file")->required();
  evaluate_cmd->add_option("--model", evaluate.model, "model file")->required();
  evaluate_cmd->add_option("--seeds", evaluate.seeds)->capture_default_str();
  evaluate_cmd->add_option("--epochs", evaluate.epochs)->capture_default_str();
  evaluate_cmd->add_option("--lr", evaluate.lr)->capture_default_str();
  evaluate_cmd->add_option("--hidden", evaluate.hidden)->capture_default_str();
  evaluate_cmd->add_option("--split", evaluate.split, "train fraction")->capture_default_str();
  evaluate_cmd->add_flag("--include-broken", evaluate.include_broken);
  evaluate_cmd->add_option("--report", evaluate.report, "report file")->required();

  InterpretFlags interpret;
  auto* interpret_cmd = app.add_subcommand("interpret", "phonetic statistics of a dbn model");
  interpret_cmd->add_option("--model", interpret.model, "model file")->required();
  interpret_cmd->add_option("--frame-ms", interpret.frame_ms)->capture_default_str();
  interpret_cmd->add_option("--horizon", interpret.horizon)->capture_default_str();
  interpret_cmd->add_flag("--include-end", interpret.include_end,
                          "rank the end state alongside the prototypes");
  interpret_cmd->add_option("--out", interpret.out, "report file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    if (dynamic_cast<const CLI::ExtrasError*>(&e) != nullptr) {
      const auto used = app.get_subcommands();
      err << (used.empty() ? app.help() : used.front()->help());
    }
    return 1;
  }

  try {
    configure_logging(global.log_level, err);
    if (*synth_cmd) run_synth(synth, global);
    if (*train_cmd) run_train(train, global);
    if (*generate_cmd) run_generate(generate, global);
    if (*export_cmd) run_export(export_flags, global);
    if (*evaluate_cmd) run_evaluate(evaluate, global);
    if (*interpret_cmd) run_interpret(interpret, global, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.is_validation() ? 1 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace mhphone
