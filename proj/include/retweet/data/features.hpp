#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "retweet/data/record.hpp"

namespace retweet::data {

struct TimeParts {
  unsigned month;        // 1-12
  unsigned iso_week;     // 1-53, ISO-8601
  unsigned day;          // 1-31
  unsigned hour;         // 0-23
  unsigned minute;       // 0-59
  unsigned day_of_week;  // 0-6, Monday = 0

  friend bool operator==(const TimeParts&, const TimeParts&) = default;
};

TimeParts decompose_timestamp(const CivilTime& ts);

struct Sentiment {
  int positive;  // 1..5
  int negative;  // -5..-1

  friend bool operator==(const Sentiment&, const Sentiment&) = default;
};

Sentiment parse_sentiment(std::string_view text);

// Whitespace-separated names; empty input or the empty marker counts 0.
std::uint64_t count_mentions(std::string_view text);

inline constexpr std::size_t kNumericFeatureCount = 12;
using FeatureVector = std::array<double, kNumericFeatureCount>;

// Serialization order is the declaration order below and never changes.
struct NumericFeatures {
  unsigned month = 1;
  unsigned iso_week = 1;
  unsigned day = 1;
  unsigned hour = 0;
  unsigned minute = 0;
  unsigned day_of_week = 0;
  std::uint64_t followers = 0;
  std::uint64_t friends = 0;
  std::uint64_t favorites = 0;
  int sentiment_pos = 1;
  int sentiment_neg = -1;
  std::uint64_t mention_count = 0;

  FeatureVector to_array() const;
  friend bool operator==(const NumericFeatures&, const NumericFeatures&) = default;
};

extern const std::array<std::string_view, kNumericFeatureCount> kNumericFeatureNames;

NumericFeatures engineer_features(const TweetRecord& record);

}  // namespace retweet::data
