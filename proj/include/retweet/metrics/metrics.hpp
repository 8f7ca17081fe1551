#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace retweet::metrics {

// Errors are actual - predicted throughout.
double mae(std::span<const double> actual, std::span<const double> predicted);
double mbe(std::span<const double> actual, std::span<const double> predicted);
double rmse(std::span<const double> actual, std::span<const double> predicted);

// metric / mean(predicted) * 100. Normalizes by the mean of the predictions,
// not of the actual values. Throws MetricError when that mean is zero.
double relative(double metric_value, std::span<const double> predicted);

// 1 - RSS / TSS. Throws MetricError when the actual values are constant.
double r2(std::span<const double> actual, std::span<const double> predicted);

struct MetricsReport {
  std::size_t n = 0;
  double mae = 0.0;
  std::optional<double> rmae;
  double mbe = 0.0;
  std::optional<double> rmbe;
  double rmse = 0.0;
  std::optional<double> rrmse;
  std::optional<double> r2;
  std::vector<std::string> warnings;

  // Keys: n, mae, rmae, mbe, rmbe, rmse, rrmse, r2, warnings. Undefined
  // values serialize as null.
  nlohmann::json to_json() const;
  static MetricsReport from_json(const nlohmann::json& doc);

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

MetricsReport compute_report(std::span<const double> actual, std::span<const double> predicted);

}  // namespace retweet::metrics
