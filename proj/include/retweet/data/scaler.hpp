#pragma once

#include <span>

#include <nlohmann/json_fwd.hpp>

#include "retweet/data/features.hpp"

namespace retweet::data {

// Per-feature z-score with the population standard deviation (divide by N).
// Constant columns get std 1.0 so they scale to exactly zero.
struct Scaler {
  FeatureVector mean{};
  FeatureVector stddev{};

  FeatureVector apply(const FeatureVector& x) const;

  nlohmann::json to_json() const;
  static Scaler from_json(const nlohmann::json& doc);

  friend bool operator==(const Scaler&, const Scaler&) = default;
};

Scaler fit_scaler(std::span<const FeatureVector> examples);
Scaler fit_scaler(std::span<const NumericFeatures> examples);

FeatureVector apply_scaler(const Scaler& scaler, const NumericFeatures& features);

}  // namespace retweet::data
