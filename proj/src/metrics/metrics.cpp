#include "retweet/metrics/metrics.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "retweet/errors.hpp"

namespace retweet::metrics {

namespace {

void check(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.empty()) throw MetricError("metrics need at least one sample");
  if (actual.size() != predicted.size())
    throw MetricError("metrics: " + std::to_string(actual.size()) + " actual values vs " +
                      std::to_string(predicted.size()) + " predictions");
  for (std::size_t i = 0; i < actual.size(); ++i)
    if (!std::isfinite(actual[i]) || !std::isfinite(predicted[i]))
      throw MetricError("metrics: non-finite value at position " + std::to_string(i));
}

double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

double mae(std::span<const double> actual, std::span<const double> predicted) {
  check(actual, predicted);
  double s = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) s += std::abs(actual[i] - predicted[i]);
  return s / static_cast<double>(actual.size());
}

double mbe(std::span<const double> actual, std::span<const double> predicted) {
  check(actual, predicted);
  double s = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) s += actual[i] - predicted[i];
  return s / static_cast<double>(actual.size());
}

double rmse(std::span<const double> actual, std::span<const double> predicted) {
  check(actual, predicted);
  double s = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = actual[i] - predicted[i];
    s += e * e;
  }
  return std::sqrt(s / static_cast<double>(actual.size()));
}

double relative(double metric_value, std::span<const double> predicted) {
  if (predicted.empty()) throw MetricError("relative metric needs predictions");
  const double m = mean(predicted);
  if (m == 0.0) throw MetricError("relative metric undefined: mean prediction is zero");
  return metric_value / m * 100.0;
}

double r2(std::span<const double> actual, std::span<const double> predicted) {
  check(actual, predicted);
  const double m = mean(actual);
  double rss = 0.0, tss = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    rss += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    tss += (actual[i] - m) * (actual[i] - m);
  }
  if (tss == 0.0) throw MetricError("r2 undefined: actual values are constant");
  return 1.0 - rss / tss;
}

MetricsReport compute_report(std::span<const double> actual, std::span<const double> predicted) {
  MetricsReport r;
  r.n = actual.size();
  r.mae = mae(actual, predicted);
  r.mbe = mbe(actual, predicted);
  r.rmse = rmse(actual, predicted);
  try {
    r.rmae = relative(r.mae, predicted);
    r.rmbe = relative(r.mbe, predicted);
    r.rrmse = relative(r.rmse, predicted);
  } catch (const MetricError& e) {
    r.warnings.emplace_back(e.what());
  }
  try {
    r.r2 = metrics::r2(actual, predicted);
  } catch (const MetricError& e) {
    r.warnings.emplace_back(e.what());
  }
  return r;
}

nlohmann::json MetricsReport::to_json() const {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  return {{"n", n},         {"mae", mae},         {"rmae", opt(rmae)}, {"mbe", mbe},
          {"rmbe", opt(rmbe)}, {"rmse", rmse},    {"rrmse", opt(rrmse)}, {"r2", opt(r2)},
          {"warnings", warnings}};
}

MetricsReport MetricsReport::from_json(const nlohmann::json& doc) {
  auto opt = [&](const char* k) -> std::optional<double> {
    const auto& v = doc.at(k);
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
  };
  MetricsReport r;
  r.n = doc.at("n").get<std::size_t>();
  r.mae = doc.at("mae").get<double>();
  r.rmae = opt("rmae");
  r.mbe = doc.at("mbe").get<double>();
  r.rmbe = opt("rmbe");
  r.rmse = doc.at("rmse").get<double>();
  r.rrmse = opt("rrmse");
  r.r2 = opt("r2");
  r.warnings = doc.at("warnings").get<std::vector<std::string>>();
  return r;
}

}  // namespace retweet::metrics
