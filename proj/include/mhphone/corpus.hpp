#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace mhphone {

inline constexpr int kDefaultFrames = 25;  // P: length of the longest sign
inline constexpr int kPoseFeatures = 14;   // D: 7 joints x (x, y)
inline constexpr int kJointCount = 7;

using FrameMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// One frame of 2D keypoints in image pixels.
struct Keypoints {
  Point2 head;
  Point2 right_shoulder;
  Point2 left_shoulder;
  Point2 right_elbow;
  Point2 left_elbow;
  Point2 right_wrist;
  Point2 left_wrist;
};

enum class NoiseLevel { kNone, kLow, kMedium, kHigh, kBroken };

std::string_view to_string(NoiseLevel level);
/// Throws Error(kParseError) for anything outside the five levels.
NoiseLevel parse_noise_level(std::string_view text);

struct RawSign {
  std::string gloss;
  std::string signer_id;
  NoiseLevel noise = NoiseLevel::kNone;
  std::vector<Keypoints> frames;
};

/// Feature names in storage order: head, right shoulder, left shoulder,
/// right elbow, left elbow, right wrist, left wrist; x before y.
const std::array<std::string, kPoseFeatures>& pose_feature_order();
const std::array<std::string, kJointCount>& joint_names();

/// Names used when D differs from the pose layout ("f0", "f1", ...).
std::vector<std::string> default_feature_order(int dim);

/// Moves the head to the origin and rescales so the mean of the two
/// head-to-shoulder distances is one. Throws DegenerateScale when both
/// distances are zero.
Eigen::VectorXd normalize_pose(const Keypoints& frame);

/// One sign: P rows of D features. Rows at or beyond true_length are the
/// all-zero end token.
struct SignSequence {
  std::string gloss;
  std::string signer;
  NoiseLevel noise = NoiseLevel::kNone;
  FrameMatrix features;
  int true_length = 0;

  int frames() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
};

/// Pads `frames` (L x D) with zero rows up to P. Throws TooLong if L > P
/// and InvariantViolation if L == 0.
SignSequence pad_sign(const FrameMatrix& frames, int padded_length);

/// Normalizes every frame of a raw sign and pads it.
SignSequence prepare_sign(const RawSign& raw, int padded_length = kDefaultFrames);

struct Corpus {
  std::vector<SignSequence> signs;
  int frames = kDefaultFrames;  // P
  int dim = kPoseFeatures;      // D
  std::vector<std::string> feature_order;
  // Synthetic corpora are sampled in feature space, so the head-at-origin
  // check does not apply to them.
  bool synthetic = false;

  int size() const { return static_cast<int>(signs.size()); }
};

/// Builds a corpus from signs that already share P and D.
Corpus make_corpus(std::vector<SignSequence> signs, bool synthetic);

/// Checks the corpus-level and per-sign invariants; throws
/// InvariantViolation naming the failed check.
void validate_corpus(const Corpus& corpus);

/// Index of the first row from which every row is zero.
int zero_suffix_start(const FrameMatrix& features);

struct LoadOptions {
  bool include_broken = false;
};

Corpus read_corpus(std::istream& in, const LoadOptions& options = {});
Corpus load_corpus(const std::filesystem::path& path,
                   const LoadOptions& options = {});

/// Writes the header line then one record per sign holding only the
/// unpadded frames. `config` is echoed into the header when non-null.
void write_corpus(std::ostream& out, const Corpus& corpus,
                  const nlohmann::json& config = nullptr);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus,
                 const nlohmann::json& config = nullptr);

}  // namespace mhphone
