#include "mhphone/corpus.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mhphone/error.hpp"

namespace mhphone {
namespace {

constexpr std::string_view kCorpusFormat = "mh-corpus";
constexpr int kCorpusVersion = 1;

double distance(const Point2& a, const Point2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

[[noreturn]] void fail_at(ErrorKind kind, std::size_t line,
                          const std::string& what) {
  throw Error(kind, "line " + std::to_string(line) + ": " + what);
}

bool is_zero_row(const FrameMatrix& m, Eigen::Index row) {
  return (m.row(row).array() == 0.0).all();
}

}  // namespace

std::string_view to_string(NoiseLevel level) {
  switch (level) {
    case NoiseLevel::kNone: return "none";
    case NoiseLevel::kLow: return "low";
    case NoiseLevel::kMedium: return "medium";
    case NoiseLevel::kHigh: return "high";
    case NoiseLevel::kBroken: return "broken";
  }
  return "none";
}

NoiseLevel parse_noise_level(std::string_view text) {
  if (text == "none") return NoiseLevel::kNone;
  if (text == "low") return NoiseLevel::kLow;
  if (text == "medium") return NoiseLevel::kMedium;
  if (text == "high") return NoiseLevel::kHigh;
  if (text == "broken") return NoiseLevel::kBroken;
  throw Error(ErrorKind::kParseError,
              "unknown noise level '" + std::string(text) + "'");
}

const std::array<std::string, kPoseFeatures>& pose_feature_order() {
  static const std::array<std::string, kPoseFeatures> names = {
      "head.x",           "head.y",           "right_shoulder.x",
      "right_shoulder.y", "left_shoulder.x",  "left_shoulder.y",
      "right_elbow.x",    "right_elbow.y",    "left_elbow.x",
      "left_elbow.y",     "right_wrist.x",    "right_wrist.y",
      "left_wrist.x",     "left_wrist.y"};
  return names;
}

const std::array<std::string, kJointCount>& joint_names() {
  static const std::array<std::string, kJointCount> names = {
      "head",       "right_shoulder", "left_shoulder", "right_elbow",
      "left_elbow", "right_wrist",    "left_wrist"};
  return names;
}

std::vector<std::string> default_feature_order(int dim) {
  if (dim == kPoseFeatures) {
    const auto& pose = pose_feature_order();
    return {pose.begin(), pose.end()};
  }
  std::vector<std::string> names;
  names.reserve(dim);
  for (int d = 0; d < dim; ++d) names.push_back("f" + std::to_string(d));
  return names;
}

Eigen::VectorXd normalize_pose(const Keypoints& frame) {
  const double scale = 0.5 * (distance(frame.head, frame.right_shoulder) +
                              distance(frame.head, frame.left_shoulder));
  if (!(scale > 0.0)) {
    throw Error(ErrorKind::kDegenerateScale,
                "head coincides with both shoulders");
  }
  const Point2* joints[kJointCount] = {
      &frame.head,       &frame.right_shoulder, &frame.left_shoulder,
      &frame.right_elbow, &frame.left_elbow,    &frame.right_wrist,
      &frame.left_wrist};
  Eigen::VectorXd out(kPoseFeatures);
  for (int j = 0; j < kJointCount; ++j) {
    out[2 * j] = (joints[j]->x - frame.head.x) / scale;
    out[2 * j + 1] = (joints[j]->y - frame.head.y) / scale;
  }
  return out;
}

SignSequence pad_sign(const FrameMatrix& frames, int padded_length) {
  const auto length = static_cast<int>(frames.rows());
  if (length > padded_length) {
    throw Error(ErrorKind::kTooLong,
                std::to_string(length) + " frames exceed P=" +
                    std::to_string(padded_length));
  }
  if (length < 1) {
    throw Error(ErrorKind::kInvariantViolation,
                "true_length: a sign needs at least one frame");
  }
  SignSequence sign;
  sign.features = FrameMatrix::Zero(padded_length, frames.cols());
  sign.features.topRows(length) = frames;
  sign.true_length = length;
  return sign;
}

SignSequence prepare_sign(const RawSign& raw, int padded_length) {
  FrameMatrix frames(static_cast<Eigen::Index>(raw.frames.size()),
                     kPoseFeatures);
  for (std::size_t f = 0; f < raw.frames.size(); ++f) {
    frames.row(static_cast<Eigen::Index>(f)) =
        normalize_pose(raw.frames[f]).transpose();
  }
  SignSequence sign = pad_sign(frames, padded_length);
  sign.gloss = raw.gloss;
  sign.signer = raw.signer_id;
  sign.noise = raw.noise;
  return sign;
}

int zero_suffix_start(const FrameMatrix& features) {
  auto row = features.rows();
  while (row > 0 && is_zero_row(features, row - 1)) --row;
  return static_cast<int>(row);
}

Corpus make_corpus(std::vector<SignSequence> signs, bool synthetic) {
  Corpus corpus;
  if (!signs.empty()) {
    corpus.frames = signs.front().frames();
    corpus.dim = signs.front().dim();
  }
  corpus.signs = std::move(signs);
  corpus.feature_order = default_feature_order(corpus.dim);
  corpus.synthetic = synthetic;
  return corpus;
}

void validate_corpus(const Corpus& corpus) {
  auto violation = [](const std::string& what) {
    throw Error(ErrorKind::kInvariantViolation, what);
  };
  if (corpus.signs.empty()) violation("M: corpus has no signs");
  if (static_cast<int>(corpus.feature_order.size()) != corpus.dim) {
    violation("feature_order: expected " + std::to_string(corpus.dim) +
              " names");
  }
  const bool check_head = !corpus.synthetic && corpus.dim == kPoseFeatures;
  for (std::size_t w = 0; w < corpus.signs.size(); ++w) {
    const SignSequence& sign = corpus.signs[w];
    const std::string where = "sign " + std::to_string(w) + ": ";
    if (sign.frames() != corpus.frames) violation(where + "P mismatch");
    if (sign.dim() != corpus.dim) violation(where + "D mismatch");
    if (sign.true_length < 0 || sign.true_length > sign.frames()) {
      violation(where + "true_length out of range");
    }
    if (zero_suffix_start(sign.features) > sign.true_length) {
      violation(where + "end token: nonzero row in the padding");
    }
    // Zero rows inside the sign must already belong to the suffix.
    const int suffix = zero_suffix_start(sign.features);
    for (int f = 0; f < suffix; ++f) {
      if (is_zero_row(sign.features, f)) {
        violation(where + "end token: nonzero row after a zero row");
      }
    }
    if (check_head) {
      for (int f = 0; f < sign.true_length; ++f) {
        if (sign.features(f, 0) != 0.0 || sign.features(f, 1) != 0.0) {
          violation(where + "head origin: frame " + std::to_string(f));
        }
      }
    }
  }
}

Corpus read_corpus(std::istream& in, const LoadOptions& options) {
  using nlohmann::json;
  Corpus corpus;
  bool have_header = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      fail_at(ErrorKind::kParseError, line_no, e.what());
    }
    try {
      if (!have_header) {
        if (record.value("format", "") != kCorpusFormat) {
          fail_at(ErrorKind::kParseError, line_no,
                  "missing mh-corpus header");
        }
        if (record.at("version").get<int>() != kCorpusVersion) {
          fail_at(ErrorKind::kParseError, line_no, "unsupported version");
        }
        corpus.dim = record.at("D").get<int>();
        corpus.frames = record.at("P").get<int>();
        corpus.feature_order =
            record.at("feature_order").get<std::vector<std::string>>();
        corpus.synthetic = record.value("synthetic", false);
        if (corpus.dim < 1 || corpus.frames < 1) {
          fail_at(ErrorKind::kInvariantViolation, line_no,
                  "D and P must be positive");
        }
        if (static_cast<int>(corpus.feature_order.size()) != corpus.dim) {
          fail_at(ErrorKind::kInvariantViolation, line_no,
                  "feature_order length differs from D");
        }
        have_header = true;
        continue;
      }

      const auto noise = parse_noise_level(record.at("noise").get<std::string>());
      const auto& rows = record.at("frames");
      if (!rows.is_array()) {
        fail_at(ErrorKind::kParseError, line_no, "frames must be an array");
      }
      const auto length = static_cast<Eigen::Index>(rows.size());
      if (length < 1) {
        fail_at(ErrorKind::kInvariantViolation, line_no,
                "true_length: empty frames list");
      }
      if (length > corpus.frames) {
        fail_at(ErrorKind::kInvariantViolation, line_no,
                "true_length: " + std::to_string(length) + " frames exceed P");
      }
      FrameMatrix frames(length, corpus.dim);
      for (Eigen::Index f = 0; f < length; ++f) {
        const auto& row = rows[static_cast<std::size_t>(f)];
        if (!row.is_array() || static_cast<int>(row.size()) != corpus.dim) {
          fail_at(ErrorKind::kInvariantViolation, line_no,
                  "D: frame " + std::to_string(f) + " does not have " +
                      std::to_string(corpus.dim) + " features");
        }
        for (int d = 0; d < corpus.dim; ++d) {
          frames(f, d) = row[static_cast<std::size_t>(d)].get<double>();
          if (!std::isfinite(frames(f, d))) {
            fail_at(ErrorKind::kInvariantViolation, line_no,
                    "features must be finite");
          }
        }
      }
      bool seen_zero = false;
      for (Eigen::Index f = 0; f < length; ++f) {
        if (is_zero_row(frames, f)) {
          seen_zero = true;
        } else if (seen_zero) {
          fail_at(ErrorKind::kInvariantViolation, line_no,
                  "end token: nonzero row after a zero row");
        }
      }
      if (!corpus.synthetic && corpus.dim == kPoseFeatures) {
        for (Eigen::Index f = 0; f < length; ++f) {
          if (frames(f, 0) != 0.0 || frames(f, 1) != 0.0) {
            fail_at(ErrorKind::kInvariantViolation, line_no,
                    "head origin: frame " + std::to_string(f));
          }
        }
      }
      if (noise == NoiseLevel::kBroken && !options.include_broken) continue;

      SignSequence sign = pad_sign(frames, corpus.frames);
      sign.gloss = record.at("gloss").get<std::string>();
      sign.signer = record.at("signer").get<std::string>();
      sign.noise = noise;
      corpus.signs.push_back(std::move(sign));
    } catch (const json::exception& e) {
      fail_at(ErrorKind::kParseError, line_no, e.what());
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kParseError &&
          std::string_view(e.what()).find("line ") == std::string_view::npos) {
        fail_at(ErrorKind::kParseError, line_no, e.what());
      }
      throw;
    }
  }
  if (!have_header) {
    throw Error(ErrorKind::kParseError, "line 1: missing mh-corpus header");
  }
  if (corpus.signs.empty()) {
    throw Error(ErrorKind::kInvariantViolation, "M: corpus has no signs");
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path,
                   const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return read_corpus(in, options);
}

void write_corpus(std::ostream& out, const Corpus& corpus,
                  const nlohmann::json& config) {
  using nlohmann::json;
  json header = {{"format", kCorpusFormat},
                 {"version", kCorpusVersion},
                 {"D", corpus.dim},
                 {"P", corpus.frames},
                 {"feature_order", corpus.feature_order}};
  if (corpus.synthetic) header["synthetic"] = true;
  if (!config.is_null()) header["config"] = config;
  out << header.dump() << '\n';
  for (const SignSequence& sign : corpus.signs) {
    json frames = json::array();
    for (int f = 0; f < sign.true_length; ++f) {
      json row = json::array();
      for (int d = 0; d < sign.dim(); ++d) row.push_back(sign.features(f, d));
      frames.push_back(std::move(row));
    }
    json record = {{"gloss", sign.gloss},
                   {"signer", sign.signer},
                   {"noise", to_string(sign.noise)},
                   {"frames", std::move(frames)}};
    out << record.dump() << '\n';
  }
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus,
                 const nlohmann::json& config) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  write_corpus(out, corpus, config);
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

}  // namespace mhphone
