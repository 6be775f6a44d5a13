#include "mhphone/model_io.hpp"

#include <fstream>

#include "mhphone/error.hpp"

namespace mhphone {
namespace {

using nlohmann::json;

constexpr std::string_view kModelFormat = "mh-model";
constexpr int kModelVersion = 1;

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.begin(), v.end()); }

json mat(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    rows.push_back(vec(m.row(i).transpose()));
  }
  return rows;
}

Eigen::VectorXd read_vec(const json& j, Eigen::Index expected, const char* name) {
  const auto values = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(values.size()) != expected) {
    throw Error(ErrorKind::kParseError, std::string(name) + " has the wrong length");
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), expected);
}

Eigen::MatrixXd read_mat(const json& j, Eigen::Index rows, Eigen::Index cols,
                         const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw Error(ErrorKind::kParseError, std::string(name) + " has the wrong row count");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    m.row(i) = read_vec(j[static_cast<std::size_t>(i)], cols, name).transpose();
  }
  return m;
}

json hyper_json(const Hyperparams& h) {
  return {{"alpha", h.alpha},
          {"mu_mu", h.mu_mu},
          {"sigma_mu", h.sigma_mu},
          {"mu_sigma", h.mu_sigma},
          {"sigma_sigma", h.sigma_sigma}};
}

Hyperparams hyper_from(const json& j) {
  Hyperparams h;
  h.alpha = j.at("alpha").get<double>();
  h.mu_mu = j.at("mu_mu").get<double>();
  h.sigma_mu = j.at("sigma_mu").get<double>();
  h.mu_sigma = j.at("mu_sigma").get<double>();
  h.sigma_sigma = j.at("sigma_sigma").get<double>();
  return h;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kDbn: return "dbn";
    case ModelKind::kGmm: return "gmm";
    case ModelKind::kGmmLda: return "gmm-lda";
  }
  return "dbn";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "dbn") return ModelKind::kDbn;
  if (text == "gmm") return ModelKind::kGmm;
  if (text == "gmm-lda") return ModelKind::kGmmLda;
  throw Error(ErrorKind::kInvalidParams, "unknown model kind '" + std::string(text) + "'");
}

int StoredModel::dim() const {
  return std::visit([](const auto& p) { return static_cast<int>(p.mu.cols()); }, params);
}

json to_json(const StoredModel& model) {
  json doc = {{"format", kModelFormat},
              {"version", kModelVersion},
              {"kind", to_string(model.kind())},
              {"D", model.dim()},
              {"P", model.frames},
              {"feature_order", model.feature_order},
              {"hyper", hyper_json(model.hyper)}};
  if (const auto* p = std::get_if<ModelParams>(&model.params)) {
    doc["N"] = p->n_states();
    doc["pi"] = vec(p->pi);
    doc["trans"] = mat(p->trans);
    doc["mu"] = mat(p->mu);
    doc["sigma"] = vec(p->sigma);
  } else if (const auto* g = std::get_if<GmmParams>(&model.params)) {
    doc["N"] = g->n_components();
    doc["weights"] = vec(g->weights);
    doc["mu"] = mat(g->mu);
    doc["sigma"] = vec(g->sigma);
  } else {
    const auto& l = std::get<GmmLdaParams>(model.params);
    doc["N"] = l.n_components();
    doc["T"] = l.n_topics();
    doc["topic_weights"] = vec(l.topic_weights);
    doc["topic_word"] = mat(l.topic_word);
    doc["doc_topic_prior"] = l.doc_topic_prior;
    doc["word_prior"] = l.word_prior;
    doc["mu"] = mat(l.mu);
    doc["sigma"] = vec(l.sigma);
  }
  doc["fit"] = {{"iterations", model.fit.iterations},
                {"converged", model.fit.converged},
                {"log_joint_trace", model.fit.log_joint_trace}};
  doc["config"] = model.config.is_null() ? json::object() : model.config;
  return doc;
}

StoredModel model_from_json(const json& doc) {
  StoredModel model;
  try {
    if (doc.value("format", "") != kModelFormat) {
      throw Error(ErrorKind::kParseError, "not an mh-model document");
    }
    if (doc.at("version").get<int>() != kModelVersion) {
      throw Error(ErrorKind::kParseError, "unsupported model version");
    }
    const ModelKind kind = parse_model_kind(doc.value("kind", "dbn"));
    const int n = doc.at("N").get<int>();
    const int dim = doc.at("D").get<int>();
    if (n < 1 || dim < 1) throw Error(ErrorKind::kParseError, "N and D must be positive");
    model.frames = doc.value("P", kDefaultFrames);
    model.feature_order = doc.contains("feature_order")
                              ? doc["feature_order"].get<std::vector<std::string>>()
                              : default_feature_order(dim);
    model.hyper = hyper_from(doc.at("hyper"));
    if (kind == ModelKind::kDbn) {
      ModelParams p;
      p.pi = read_vec(doc.at("pi"), n, "pi");
      p.trans = read_mat(doc.at("trans"), n, n, "trans");
      p.mu = read_mat(doc.at("mu"), n, dim, "mu");
      p.sigma = read_vec(doc.at("sigma"), dim, "sigma");
      validate_params(p);
      model.params = std::move(p);
    } else if (kind == ModelKind::kGmm) {
      GmmParams g;
      g.weights = read_vec(doc.at("weights"), n, "weights");
      g.mu = read_mat(doc.at("mu"), n, dim, "mu");
      g.sigma = read_vec(doc.at("sigma"), dim, "sigma");
      validate_params(g);
      model.params = std::move(g);
    } else {
      GmmLdaParams l;
      const int topics = doc.at("T").get<int>();
      l.topic_weights = read_vec(doc.at("topic_weights"), topics, "topic_weights");
      l.topic_word = read_mat(doc.at("topic_word"), topics, n, "topic_word");
      l.doc_topic_prior = doc.at("doc_topic_prior").get<double>();
      l.word_prior = doc.at("word_prior").get<double>();
      l.mu = read_mat(doc.at("mu"), n, dim, "mu");
      l.sigma = read_vec(doc.at("sigma"), dim, "sigma");
      validate_params(l);
      model.params = std::move(l);
    }
    if (doc.contains("fit")) {
      const json& fit = doc["fit"];
      model.fit.iterations = fit.value("iterations", 0);
      model.fit.converged = fit.value("converged", false);
      model.fit.log_joint_trace =
          fit.value("log_joint_trace", std::vector<double>{});
    }
    model.config = doc.value("config", json::object());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParseError, e.what());
  }
  return model;
}

void save_model(const std::filesystem::path& path, const StoredModel& model) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << to_json(model).dump(2) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

StoredModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParseError, path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

SignGenerator make_generator(const StoredModel& model) {
  return std::visit(
      [](const auto& params) -> SignGenerator {
        using T = std::decay_t<decltype(params)>;
        return [params](int n_signs, int frames, std::uint64_t seed) {
          if constexpr (std::is_same_v<T, ModelParams>) {
            return sample(params, n_signs, frames, seed);
          } else if constexpr (std::is_same_v<T, GmmParams>) {
            return sample_gmm(params, n_signs, frames, seed);
          } else {
            return sample_gmm_lda(params, n_signs, frames, seed);
          }
        };
      },
      model.params);
}

}  // namespace mhphone
