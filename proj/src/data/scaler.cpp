#include "retweet/data/scaler.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "retweet/errors.hpp"

namespace retweet::data {

namespace {
constexpr std::string_view kScalerFormat = "retweet-reg-scaler";
}

FeatureVector Scaler::apply(const FeatureVector& x) const {
  FeatureVector out{};
  for (std::size_t i = 0; i < kNumericFeatureCount; ++i) out[i] = (x[i] - mean[i]) / stddev[i];
  return out;
}

nlohmann::json Scaler::to_json() const {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t i = 0; i < kNumericFeatureCount; ++i)
    features.push_back({{"name", kNumericFeatureNames[i]}, {"mean", mean[i]}, {"std", stddev[i]}});
  return {{"format", kScalerFormat}, {"version", 1}, {"features", features}};
}

Scaler Scaler::from_json(const nlohmann::json& doc) {
  if (doc.value("format", "") != kScalerFormat || doc.value("version", 0) != 1)
    throw DataError("not a version-1 scaler file");
  const auto& features = doc.at("features");
  if (features.size() != kNumericFeatureCount)
    throw DataError("scaler file has " + std::to_string(features.size()) + " features, expected " +
                    std::to_string(kNumericFeatureCount));
  Scaler s;
  for (std::size_t i = 0; i < kNumericFeatureCount; ++i) {
    if (features[i].at("name").get<std::string>() != kNumericFeatureNames[i])
      throw DataError("scaler feature " + std::to_string(i) + " is out of order");
    s.mean[i] = features[i].at("mean").get<double>();
    s.stddev[i] = features[i].at("std").get<double>();
    if (!(s.stddev[i] > 0.0)) throw DataError("scaler std must be positive");
  }
  return s;
}

Scaler fit_scaler(std::span<const FeatureVector> examples) {
  if (examples.empty()) throw DataError("fit_scaler: no examples");
  const auto n = static_cast<double>(examples.size());
  Scaler s;
  for (std::size_t i = 0; i < kNumericFeatureCount; ++i) {
    const double first = examples.front()[i];
    const bool constant = std::all_of(examples.begin(), examples.end(),
                                      [&](const FeatureVector& x) { return x[i] == first; });
    if (constant) {
      s.mean[i] = first;
      s.stddev[i] = 1.0;
      continue;
    }
    double sum = 0.0;
    for (const auto& x : examples) sum += x[i];
    const double mean = sum / n;
    double sq = 0.0;
    for (const auto& x : examples) sq += (x[i] - mean) * (x[i] - mean);
    s.mean[i] = mean;
    s.stddev[i] = std::sqrt(sq / n);
  }
  return s;
}

Scaler fit_scaler(std::span<const NumericFeatures> examples) {
  std::vector<FeatureVector> rows;
  rows.reserve(examples.size());
  for (const auto& f : examples) rows.push_back(f.to_array());
  return fit_scaler(std::span<const FeatureVector>(rows));
}

FeatureVector apply_scaler(const Scaler& scaler, const NumericFeatures& features) {
  return scaler.apply(features.to_array());
}

}  // namespace retweet::data
