#include "mhphone/interpret.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "mhphone/error.hpp"

namespace mhphone {
namespace {

std::vector<int> rank_descending(const Eigen::VectorXd& values, bool include_end) {
  std::vector<int> order;
  for (int i = include_end ? 0 : 1; i < values.size(); ++i) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[a] > values[b]; });
  return order;
}

std::string joint_of(const std::string& feature) {
  const auto dot = feature.rfind('.');
  return dot == std::string::npos ? feature : feature.substr(0, dot);
}

nlohmann::json finite_or_inf(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

}  // namespace

double expected_hold_length(const ModelParams& params, int state) {
  const double stay = params.trans(state, state);
  if (stay >= 1.0) {
    throw Error(ErrorKind::kAbsorbingState,
                "state " + std::to_string(state) + " never leaves");
  }
  return 1.0 / (1.0 - stay);
}

Eigen::VectorXd expected_counts(const ModelParams& params, int horizon) {
  if (horizon < 0) throw Error(ErrorKind::kInvalidParams, "horizon must be >= 0");
  Eigen::RowVectorXd marginal = params.pi.transpose();
  Eigen::RowVectorXd total = Eigen::RowVectorXd::Zero(params.n_states());
  for (int k = 0; k < horizon; ++k) {
    total += marginal;
    marginal = marginal * params.trans;
  }
  return total.transpose();
}

InterpretReport summarize(const ModelParams& params, const InterpretConfig& config) {
  validate_params(params);
  const int n = params.n_states();
  InterpretReport report;
  report.config = config;
  report.horizon = config.horizon;

  std::vector<double> finite_holds;
  for (int i = 0; i < n; ++i) {
    double frames = std::numeric_limits<double>::infinity();
    try {
      frames = expected_hold_length(params, i);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kAbsorbingState) throw;
    }
    report.hold_lengths_frames.push_back(frames);
    report.hold_lengths_ms.push_back(frames * config.frame_ms);
    if (i > 0 && std::isfinite(frames)) finite_holds.push_back(frames);
  }
  if (!finite_holds.empty()) {
    const double k = static_cast<double>(finite_holds.size());
    report.hold_mean_frames =
        std::accumulate(finite_holds.begin(), finite_holds.end(), 0.0) / k;
    double ss = 0.0;
    for (double h : finite_holds) ss += (h - report.hold_mean_frames) * (h - report.hold_mean_frames);
    report.hold_std_frames = std::sqrt(ss / k);
  }

  report.expected_counts = expected_counts(params, config.horizon);
  report.end_prob = params.trans.col(0);
  report.start_ranking = rank_descending(params.pi, config.include_end_in_ranking);
  report.end_ranking = rank_descending(report.end_prob, config.include_end_in_ranking);

  const auto& names = config.feature_order;
  if (static_cast<int>(names.size()) == params.dim() && params.dim() % 2 == 0) {
    Eigen::VectorXd spread(params.dim() / 2);
    for (int j = 0; j < params.dim() / 2; ++j) {
      spread[j] = 0.5 * (params.sigma[2 * j] + params.sigma[2 * j + 1]);
      report.dispersion_by_joint.emplace_back(joint_of(names[2 * j]), spread[j]);
    }
    for (int j : rank_descending(spread, /*include_end=*/true)) {
      report.dispersion_ranking.push_back(report.dispersion_by_joint[j].first);
    }
  }

  if (config.horizon != config.sign_frames) {
    report.horizon_note = fmt::format(
        "expected counts sum frames 0..{} while signs have P={} frames",
        config.horizon - 1, config.sign_frames);
  }
  return report;
}

nlohmann::json to_json(const InterpretReport& report) {
  using nlohmann::json;
  json holds = json::array();
  json holds_ms = json::array();
  for (std::size_t i = 0; i < report.hold_lengths_frames.size(); ++i) {
    holds.push_back(finite_or_inf(report.hold_lengths_frames[i]));
    holds_ms.push_back(finite_or_inf(report.hold_lengths_ms[i]));
  }
  json dispersion = json::object();
  for (const auto& [joint, value] : report.dispersion_by_joint) dispersion[joint] = value;
  const std::vector<double> counts(report.expected_counts.begin(),
                                   report.expected_counts.end());
  const std::vector<double> end_prob(report.end_prob.begin(), report.end_prob.end());
  return {{"hold_lengths_frames", holds},
          {"hold_lengths_ms", holds_ms},
          {"hold_mean_frames", report.hold_mean_frames},
          {"hold_std_frames", report.hold_std_frames},
          {"expected_counts", counts},
          {"horizon", report.horizon},
          {"start_ranking", report.start_ranking},
          {"end_ranking", report.end_ranking},
          {"end_prob", end_prob},
          {"dispersion_by_joint", dispersion},
          {"dispersion_ranking", report.dispersion_ranking},
          {"horizon_note", report.horizon_note},
          {"config",
           {{"frame_ms", report.config.frame_ms},
            {"horizon", report.config.horizon},
            {"sign_frames", report.config.sign_frames},
            {"include_end_in_ranking", report.config.include_end_in_ranking}}}};
}

std::string format_report(const InterpretReport& report) {
  std::ostringstream out;
  out << fmt::format("{:>5} {:>10} {:>12} {:>12} {:>10}\n", "state", "hold(fr)",
                     "hold(ms)", "E[count]", "P(end)");
  for (std::size_t i = 0; i < report.hold_lengths_frames.size(); ++i) {
    out << fmt::format("{:>5} {:>10.3f} {:>12.1f} {:>12.3f} {:>10.4f}\n", i,
                       report.hold_lengths_frames[i], report.hold_lengths_ms[i],
                       report.expected_counts[static_cast<Eigen::Index>(i)],
                       report.end_prob[static_cast<Eigen::Index>(i)]);
  }
  out << fmt::format("mean hold {:.3f} frames (std {:.3f})\n", report.hold_mean_frames,
                     report.hold_std_frames);
  out << "start ranking:";
  for (int s : report.start_ranking) out << ' ' << s;
  out << "\nend ranking:";
  for (int s : report.end_ranking) out << ' ' << s;
  out << '\n';
  if (!report.dispersion_by_joint.empty()) {
    out << "dispersion by joint:\n";
    for (const auto& [joint, value] : report.dispersion_by_joint) {
      out << fmt::format("  {:<16} {:.4f}\n", joint, value);
    }
  }
  if (!report.horizon_note.empty()) out << "note: " << report.horizon_note << '\n';
  return out.str();
}

}  // namespace mhphone
