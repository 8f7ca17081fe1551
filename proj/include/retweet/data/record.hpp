#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace retweet::data {

// Wall-clock fields as written in the source (TweetsCOV19 timestamps carry a
// zone abbreviation which is kept verbatim but not applied).
struct CivilTime {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;
  unsigned hour = 0;
  unsigned minute = 0;
  unsigned second = 0;

  friend bool operator==(const CivilTime&, const CivilTime&) = default;
};

struct Timestamp {
  std::string raw;
  CivilTime civil;

  friend bool operator==(const Timestamp&, const Timestamp&) = default;
};

// Accepts "EEE MMM dd HH:mm:ss zzz yyyy" (e.g. "Thu Oct 03 21:12:56 CEST 2019")
// or non-negative integer epoch seconds, interpreted as UTC.
Timestamp parse_timestamp(std::string_view text);

// Inverse of the textual form: "Thu Oct 03 21:12:56 UTC 2019".
std::string format_timestamp(const CivilTime& civil, std::string_view zone = "UTC");
CivilTime civil_from_epoch(std::int64_t seconds);

struct TweetRecord {
  std::string tweet_id;
  std::string username;
  Timestamp timestamp;
  std::uint64_t followers = 0;
  std::uint64_t friends = 0;
  std::uint64_t favorites = 0;
  std::string entities;
  std::string sentiment_raw;
  std::string mentions_raw;
  std::string hashtags_raw;
  std::string urls_raw;
  std::optional<std::uint64_t> retweets;
  std::optional<std::string> text;

  friend bool operator==(const TweetRecord&, const TweetRecord&) = default;
};

// Column order of a TSV file. Recognized names: tweet_id, username, timestamp,
// followers, friends, favorites, entities, sentiment, mentions, hashtags,
// urls, retweets, text. All but text are required.
struct Schema {
  std::vector<std::string> columns;

  std::size_t field_count() const noexcept { return columns.size(); }
  bool has(std::string_view column) const;
};

Schema default_schema();
Schema schema_from_columns(std::vector<std::string> columns);
// One-line JSON sidecar: {"columns": [...]} or a bare array of names.
Schema load_schema_sidecar(const std::filesystem::path& path);

inline constexpr std::string_view kEmptyMarker = "null;";

struct ParseOptions {
  // Allow an empty retweets field (prediction inputs).
  bool label_optional = false;
};

// A line may leave out the text field entirely when text is the last
// column. line_number is only used in error messages.
TweetRecord parse_tsv_line(std::string_view line, const Schema& schema, std::size_t line_number = 0,
                           const ParseOptions& options = {});

// Empty opaque fields are written as the empty marker; tabs and newlines
// inside text are replaced by spaces.
std::string format_tsv_line(const TweetRecord& record, const Schema& schema);

struct LoadedTsv {
  std::vector<TweetRecord> records;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each record
  std::size_t dropped = 0;
  std::vector<std::string> problems;      // one message per dropped line
};

// Reads every line, skipping blank lines and a header row that repeats the
// schema's column names. Malformed lines are dropped and counted.
LoadedTsv read_tsv(const std::filesystem::path& path, const Schema& schema,
                   const ParseOptions& options = {});

}  // namespace retweet::data
