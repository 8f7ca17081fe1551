#include "retweet/data/features.hpp"

#include <cctype>
#include <charconv>
#include <chrono>
#include <string>

#include "retweet/errors.hpp"

namespace retweet::data {

const std::array<std::string_view, kNumericFeatureCount> kNumericFeatureNames = {
    "month",     "iso_week",  "day",           "hour",          "minute",       "day_of_week",
    "followers", "friends",   "favorites",     "sentiment_pos", "sentiment_neg", "mention_count"};

TimeParts decompose_timestamp(const CivilTime& ts) {
  using namespace std::chrono;
  const sys_days date{year{ts.year} / month{ts.month} / day{ts.day}};
  const unsigned dow = weekday{date}.iso_encoding() - 1;

  // The ISO week belongs to the year holding its Thursday.
  const sys_days thursday = date + days{3 - static_cast<int>(dow)};
  const year iso_year = year_month_day{thursday}.year();
  const sys_days jan1{iso_year / January / 1};
  const auto week = static_cast<unsigned>((thursday - jan1).count() / 7 + 1);

  return {ts.month, week, ts.day, ts.hour, ts.minute, dow};
}

Sentiment parse_sentiment(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) parts.push_back(text.substr(i, j - i));
    i = j;
  }
  if (parts.size() != 2)
    throw ValidationError("sentiment '" + std::string(text) +
                          "': expected two whitespace-separated integers");
  int scores[2] = {0, 0};
  for (int k = 0; k < 2; ++k) {
    const auto p = parts[static_cast<std::size_t>(k)];
    const auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), scores[k]);
    if (ec != std::errc() || ptr != p.data() + p.size())
      throw ValidationError("sentiment '" + std::string(text) + "': '" + std::string(p) +
                            "' is not an integer");
  }
  if (scores[0] < 1 || scores[0] > 5)
    throw ValidationError("positive sentiment " + std::to_string(scores[0]) +
                          " outside [1, 5]");
  if (scores[1] < -5 || scores[1] > -1)
    throw ValidationError("negative sentiment " + std::to_string(scores[1]) +
                          " outside [-5, -1]");
  return {scores[0], scores[1]};
}

std::uint64_t count_mentions(std::string_view text) {
  if (text == kEmptyMarker) return 0;
  std::uint64_t n = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

FeatureVector NumericFeatures::to_array() const {
  return {static_cast<double>(month),         static_cast<double>(iso_week),
          static_cast<double>(day),           static_cast<double>(hour),
          static_cast<double>(minute),        static_cast<double>(day_of_week),
          static_cast<double>(followers),     static_cast<double>(friends),
          static_cast<double>(favorites),     static_cast<double>(sentiment_pos),
          static_cast<double>(sentiment_neg), static_cast<double>(mention_count)};
}

NumericFeatures engineer_features(const TweetRecord& record) {
  const TimeParts t = decompose_timestamp(record.timestamp.civil);
  const Sentiment s = parse_sentiment(record.sentiment_raw);
  NumericFeatures f;
  f.month = t.month;
  f.iso_week = t.iso_week;
  f.day = t.day;
  f.hour = t.hour;
  f.minute = t.minute;
  f.day_of_week = t.day_of_week;
  f.followers = record.followers;
  f.friends = record.friends;
  f.favorites = record.favorites;
  f.sentiment_pos = s.positive;
  f.sentiment_neg = s.negative;
  f.mention_count = count_mentions(record.mentions_raw);
  return f;
}

}  // namespace retweet::data
