#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "mhphone/baselines.hpp"
#include "mhphone/corpus.hpp"
#include "mhphone/dbn.hpp"
#include "mhphone/discriminator.hpp"
#include "mhphone/model_params.hpp"

namespace mhphone {

enum class ModelKind { kDbn, kGmm, kGmmLda };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

/// A trained model as persisted in an "mh-model" JSON file.
struct StoredModel {
  std::variant<ModelParams, GmmParams, GmmLdaParams> params;
  Hyperparams hyper;
  int frames = kDefaultFrames;  // P of the training corpus
  std::vector<std::string> feature_order;
  FitReport fit;
  nlohmann::json config;  // resolved run configuration, echoed verbatim

  ModelKind kind() const { return static_cast<ModelKind>(params.index()); }
  int dim() const;
};

nlohmann::json to_json(const StoredModel& model);
/// Throws ParseError on a malformed envelope and InvalidParams when the
/// parameters break their invariants.
StoredModel model_from_json(const nlohmann::json& doc);

void save_model(const std::filesystem::path& path, const StoredModel& model);
StoredModel load_model(const std::filesystem::path& path);

/// Ancestral sampler for whichever model kind is stored.
SignGenerator make_generator(const StoredModel& model);

}  // namespace mhphone
