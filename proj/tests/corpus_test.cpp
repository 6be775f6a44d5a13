#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "mhphone/corpus.hpp"
#include "mhphone/error.hpp"
#include "mhphone/synth.hpp"
#include "oracles.hpp"

namespace mhphone {
namespace {

Keypoints all_at(Point2 p) { return {p, p, p, p, p, p, p}; }

Keypoints from_features(const Eigen::VectorXd& v) {
  auto pt = [&](int j) { return Point2{v[2 * j], v[2 * j + 1]}; };
  return {pt(0), pt(1), pt(2), pt(3), pt(4), pt(5), pt(6)};
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kIo;
}

std::string error_text(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

TEST(NormalizePose, ShouldersAtUnitDistance) {
  Keypoints k = all_at({5, 5});
  k.right_shoulder = {4, 5};
  k.left_shoulder = {6, 5};
  const Eigen::VectorXd v = normalize_pose(k);
  ASSERT_EQ(v.size(), 14);
  EXPECT_EQ(v[0], 0.0);
  EXPECT_EQ(v[1], 0.0);
  EXPECT_DOUBLE_EQ(v[2], -1.0);
  EXPECT_DOUBLE_EQ(v[3], 0.0);
  EXPECT_DOUBLE_EQ(v[4], 1.0);
  EXPECT_DOUBLE_EQ(v[5], 0.0);
  for (int d = 6; d < 14; ++d) EXPECT_EQ(v[d], 0.0) << d;
}

TEST(NormalizePose, ScaleIsMeanHeadShoulderDistance) {
  Keypoints k = all_at({0, 0});
  k.right_shoulder = {2, 0};
  k.left_shoulder = {-2, 0};
  k.right_wrist = {1, 1};
  const Eigen::VectorXd v = normalize_pose(k);
  EXPECT_DOUBLE_EQ(v[10], 0.5);
  EXPECT_DOUBLE_EQ(v[11], 0.5);
}

TEST(NormalizePose, HeadIsOriginAndIdempotent) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> px(0.0, 640.0);
  for (int trial = 0; trial < 200; ++trial) {
    Keypoints k;
    for (Point2* p : {&k.head, &k.right_shoulder, &k.left_shoulder, &k.right_elbow,
                      &k.left_elbow, &k.right_wrist, &k.left_wrist}) {
      *p = {px(rng), px(rng)};
    }
    const Eigen::VectorXd once = normalize_pose(k);
    EXPECT_EQ(once[0], 0.0);
    EXPECT_EQ(once[1], 0.0);
    const Eigen::VectorXd twice = normalize_pose(from_features(once));
    EXPECT_LE((once - twice).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(NormalizePose, DegenerateScale) {
  EXPECT_EQ(kind_of([] { normalize_pose(all_at({3, 3})); }), ErrorKind::kDegenerateScale);
  // One shoulder on the head is still a usable scale.
  Keypoints k = all_at({3, 3});
  k.left_shoulder = {5, 3};
  EXPECT_DOUBLE_EQ(normalize_pose(k)[4], 2.0);
}

TEST(PadSign, PadsWithZeroRows) {
  const FrameMatrix frames = FrameMatrix::Constant(3, 14, 0.25);
  const SignSequence s = pad_sign(frames, 8);
  EXPECT_EQ(s.frames(), 8);
  EXPECT_EQ(s.true_length, 3);
  EXPECT_TRUE(s.features.bottomRows(5).isZero(0.0));
  EXPECT_EQ(s.features.topRows(3), frames);
}

TEST(PadSign, FullLengthUnchanged) {
  const FrameMatrix frames = FrameMatrix::Constant(25, 14, 1.0);
  const SignSequence s = pad_sign(frames, 25);
  EXPECT_EQ(s.true_length, 25);
  EXPECT_EQ(s.features, frames);
}

TEST(PadSign, TooLong) {
  EXPECT_EQ(kind_of([] { pad_sign(FrameMatrix::Ones(26, 14), 25); }), ErrorKind::kTooLong);
}

TEST(PrepareSign, NormalizesAndPads) {
  RawSign raw;
  raw.gloss = "HELLO";
  raw.signer_id = "s1";
  Keypoints k = all_at({10, 10});
  k.right_shoulder = {8, 10};
  k.left_shoulder = {12, 10};
  k.right_wrist = {10, 6};
  raw.frames = {k, k};
  const SignSequence s = prepare_sign(raw);
  EXPECT_EQ(s.frames(), kDefaultFrames);
  EXPECT_EQ(s.true_length, 2);
  EXPECT_DOUBLE_EQ(s.features(1, 11), -2.0);
  EXPECT_EQ(s.gloss, "HELLO");
}

std::string header(int dim = 14, int frames = 25) {
  nlohmann::json h = {{"format", "mh-corpus"}, {"version", 1}, {"D", dim},
                      {"P", frames}, {"feature_order", default_feature_order(dim)}};
  return h.dump() + "\n";
}

std::string record(const std::vector<std::vector<double>>& frames,
                   const std::string& noise = "none") {
  nlohmann::json r = {{"gloss", "G"}, {"signer", "a"}, {"noise", noise}, {"frames", frames}};
  return r.dump() + "\n";
}

std::vector<double> pose_row(double v) {
  std::vector<double> row(14, v);
  row[0] = row[1] = 0.0;
  return row;
}

TEST(LoadCorpus, TwoValidRecords) {
  std::istringstream in(header() + record({pose_row(1.0), pose_row(2.0)}) +
                        record({pose_row(0.5)}));
  const Corpus c = read_corpus(in);
  EXPECT_EQ(c.size(), 2);
  EXPECT_EQ(c.signs[0].true_length, 2);
  EXPECT_EQ(c.signs[1].frames(), 25);
  EXPECT_TRUE(c.signs[1].features.bottomRows(24).isZero(0.0));
  EXPECT_NO_THROW(validate_corpus(c));
}

TEST(LoadCorpus, WrongFeatureCount) {
  std::vector<double> short_row(13, 0.0);
  std::istringstream in(header() + record({short_row}));
  const std::string what = error_text([&] { read_corpus(in); });
  EXPECT_NE(what.find("InvariantViolation"), std::string::npos) << what;
  EXPECT_NE(what.find("D:"), std::string::npos) << what;
}

TEST(LoadCorpus, NonzeroRowAfterZeroRow) {
  std::istringstream in(header() + record({pose_row(1.0), pose_row(0.0), pose_row(1.0)}));
  const std::string what = error_text([&] { read_corpus(in); });
  EXPECT_NE(what.find("InvariantViolation"), std::string::npos) << what;
  EXPECT_NE(what.find("end token"), std::string::npos) << what;
}

TEST(LoadCorpus, ParseErrorCarriesLineNumber) {
  std::istringstream in(header() + record({pose_row(1.0)}) + "{not json\n");
  const std::string what = error_text([&] { read_corpus(in); });
  EXPECT_NE(what.find("ParseError"), std::string::npos) << what;
  EXPECT_NE(what.find("line 3"), std::string::npos) << what;
}

TEST(LoadCorpus, RejectsUnknownNoiseLevelAndMissingHeader) {
  std::istringstream bad_noise(header() + record({pose_row(1.0)}, "extreme"));
  EXPECT_EQ(kind_of([&] { read_corpus(bad_noise); }), ErrorKind::kParseError);
  std::istringstream no_header(record({pose_row(1.0)}));
  EXPECT_EQ(kind_of([&] { read_corpus(no_header); }), ErrorKind::kParseError);
}

TEST(LoadCorpus, RejectsHeadAwayFromOrigin) {
  std::vector<double> row(14, 1.0);
  std::istringstream in(header() + record({row}));
  const std::string what = error_text([&] { read_corpus(in); });
  EXPECT_NE(what.find("head origin"), std::string::npos) << what;
}

TEST(LoadCorpus, TooManyFrames) {
  std::istringstream in(header(14, 2) + record({pose_row(1), pose_row(1), pose_row(1)}));
  EXPECT_EQ(kind_of([&] { read_corpus(in); }), ErrorKind::kInvariantViolation);
}

TEST(LoadCorpus, BrokenSignsSkippedByDefault) {
  const std::string text =
      header() + record({pose_row(1.0)}) + record({pose_row(2.0)}, "broken");
  std::istringstream a(text);
  EXPECT_EQ(read_corpus(a).size(), 1);
  std::istringstream b(text);
  LoadOptions keep;
  keep.include_broken = true;
  EXPECT_EQ(read_corpus(b, keep).size(), 2);
}

TEST(LoadCorpus, WriteThenReadIsExact) {
  const ModelParams truth = random_truth(4, 14, 3);
  const Corpus original = synth_corpus(truth, 40, 11).corpus;
  std::stringstream buffer;
  write_corpus(buffer, original);
  const Corpus back = read_corpus(buffer);
  ASSERT_EQ(back.size(), original.size());
  EXPECT_TRUE(back.synthetic);
  for (int w = 0; w < back.size(); ++w) {
    EXPECT_EQ(back.signs[w].true_length, original.signs[w].true_length);
    EXPECT_EQ(back.signs[w].features, original.signs[w].features);
  }
}

TEST(SynthCorpus, EndOnlyStartGivesAllZeroSigns) {
  ModelParams truth = random_truth(3, 4, 1);
  truth.pi.setZero();
  truth.pi[0] = 1.0;
  const LabeledCorpus data = synth_corpus(truth, 20, 5);
  for (const SignSequence& s : data.corpus.signs) {
    EXPECT_TRUE(s.features.isZero(0.0));
    EXPECT_EQ(s.true_length, 0);
  }
  EXPECT_TRUE(data.labels.isZero());
}

TEST(SynthCorpus, SameSeedSameCorpus) {
  const ModelParams truth = random_truth(5, 14, 2);
  const LabeledCorpus a = synth_corpus(truth, 50, 99);
  const LabeledCorpus b = synth_corpus(truth, 50, 99);
  for (int w = 0; w < 50; ++w) {
    EXPECT_EQ(a.corpus.signs[w].features, b.corpus.signs[w].features);
  }
  EXPECT_EQ(a.labels, b.labels);
  const LabeledCorpus c = synth_corpus(truth, 50, 100);
  EXPECT_NE(a.labels, c.labels);
}

TEST(SynthCorpus, ZeroRowsFormSuffix) {
  const ModelParams truth = random_truth(5, 6, 8);
  const LabeledCorpus data = synth_corpus(truth, 200, 4, 25);
  EXPECT_NO_THROW(validate_corpus(data.corpus));
  for (int w = 0; w < data.corpus.size(); ++w) {
    const SignSequence& s = data.corpus.signs[w];
    EXPECT_EQ(zero_suffix_start(s.features), s.true_length);
    for (int f = 0; f < s.frames(); ++f) {
      EXPECT_EQ(data.labels(w, f) == 0, f >= s.true_length);
    }
  }
}

// Per-state frame counts of sampled signs against sum_{i<P} (pi T^i)[j].
TEST(SynthCorpus, StateFrequenciesMatchChainMarginals) {
  const int n = 5, m = 500, frames = 25;
  const ModelParams truth = random_truth(n, 14, 21, {.sigma = 0.05});
  const LabeledCorpus data = synth_corpus(truth, m, 22, frames);

  Eigen::RowVectorXd marginal = truth.pi.transpose();
  Eigen::RowVectorXd expected = Eigen::RowVectorXd::Zero(n);
  for (int i = 0; i < frames; ++i) {
    expected += marginal;
    marginal = marginal * truth.trans;
  }
  for (int j = 0; j < n; ++j) {
    std::vector<double> counts;
    for (int w = 0; w < m; ++w) counts.push_back((data.labels.row(w).array() == j).count());
    const auto stats = testing::mean_and_error(counts);
    EXPECT_LE(std::abs(stats.mean - expected[j]), 3 * stats.standard_error)
        << "state " << j << " mean " << stats.mean << " expected " << expected[j];
  }
}

}  // namespace
}  // namespace mhphone
