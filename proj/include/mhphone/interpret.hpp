#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "mhphone/model_params.hpp"

namespace mhphone {

/// Mean run length of state i under its self-transition probability,
/// 1 / (1 - T[i,i]). Throws AbsorbingState when T[i,i] == 1.
double expected_hold_length(const ModelParams& params, int state);

/// Expected number of frames spent in each state over the first
/// `horizon` frames of a sign: sum_{k<horizon} (pi T^k)[j].
Eigen::VectorXd expected_counts(const ModelParams& params, int horizon = 20);

struct InterpretConfig {
  double frame_ms = 98.0;
  int horizon = 20;
  int sign_frames = 25;               // P, only reported alongside the horizon
  bool include_end_in_ranking = false;
  std::vector<std::string> feature_order;  // one name per dimension
};

struct InterpretReport {
  std::vector<double> hold_lengths_frames;  // +inf for absorbing states
  std::vector<double> hold_lengths_ms;
  double hold_mean_frames = 0.0;  // over finite prototype holds, end state excluded
  double hold_std_frames = 0.0;   // population std of the same
  Eigen::VectorXd expected_counts;
  int horizon = 0;
  std::vector<int> start_ranking;  // by pi descending, ties by index
  std::vector<int> end_ranking;    // by T[i,0] descending, ties by index
  Eigen::VectorXd end_prob;        // T[i,0]
  std::vector<std::pair<std::string, double>> dispersion_by_joint;
  std::vector<std::string> dispersion_ranking;  // most variable joint first
  std::string horizon_note;
  InterpretConfig config;
};

/// Pure function of (params, config).
InterpretReport summarize(const ModelParams& params, const InterpretConfig& config);

nlohmann::json to_json(const InterpretReport& report);

/// Human-readable summary table.
std::string format_report(const InterpretReport& report);

}  // namespace mhphone
