#include "retweet/data/record.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "retweet/data/features.hpp"
#include "retweet/errors.hpp"

namespace retweet::data {

namespace {

constexpr std::array<std::string_view, 12> kMonthNames = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                           "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
constexpr std::array<std::string_view, 7> kDayNames = {"Mon", "Tue", "Wed", "Thu",
                                                       "Fri", "Sat", "Sun"};

constexpr std::array<std::string_view, 13> kKnownColumns = {
    "tweet_id", "username", "timestamp", "followers", "friends",  "favorites", "entities",
    "sentiment", "mentions", "hashtags", "urls",      "retweets", "text"};

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

unsigned parse_unit(std::string_view s, unsigned lo, unsigned hi, const char* what,
                    std::string_view whole) {
  unsigned v = 0;
  if (!parse_int(s, v) || v < lo || v > hi)
    throw ValidationError("timestamp '" + std::string(whole) + "': bad " + what + " '" +
                          std::string(s) + "'");
  return v;
}

}  // namespace

CivilTime civil_from_epoch(std::int64_t seconds) {
  using namespace std::chrono;
  const sys_seconds tp{std::chrono::seconds{seconds}};
  const auto day_point = floor<days>(tp);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{tp - day_point};
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
          static_cast<unsigned>(ymd.day()), static_cast<unsigned>(hms.hours().count()),
          static_cast<unsigned>(hms.minutes().count()),
          static_cast<unsigned>(hms.seconds().count())};
}

std::string format_timestamp(const CivilTime& c, std::string_view zone) {
  using namespace std::chrono;
  const year_month_day ymd{year{c.year}, month{c.month}, day{c.day}};
  if (!ymd.ok()) throw ValidationError("format_timestamp: invalid date");
  const unsigned dow = weekday{sys_days{ymd}}.iso_encoding() - 1;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s %s %02u %02u:%02u:%02u %.*s %04d",
                std::string(kDayNames[dow]).c_str(), std::string(kMonthNames[c.month - 1]).c_str(),
                c.day, c.hour, c.minute, c.second, static_cast<int>(zone.size()), zone.data(),
                c.year);
  return buf;
}

namespace {

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::string opaque(std::string_view field) {
  return field == kEmptyMarker ? std::string() : std::string(field);
}

std::uint64_t count_field(std::string_view field, const std::string& column) {
  std::uint64_t v = 0;
  if (!parse_int(field, v))
    throw FieldError(column, "expected a non-negative integer, got '" + std::string(field) + "'");
  return v;
}

std::string clean_text(const std::string& s) {
  std::string out = s;
  std::replace_if(out.begin(), out.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; },
                  ' ');
  return out;
}

std::string marker_if_empty(const std::string& s) {
  return s.empty() ? std::string(kEmptyMarker) : s;
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  Timestamp ts{std::string(text), {}};
  if (!text.empty() && std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    std::int64_t seconds = 0;
    if (!parse_int(text, seconds))
      throw ValidationError("timestamp '" + std::string(text) + "': epoch seconds out of range");
    ts.civil = civil_from_epoch(seconds);
    return ts;
  }

  const auto parts = split_ws(text);
  if (parts.size() != 6)
    throw ValidationError("timestamp '" + std::string(text) +
                          "': expected 'EEE MMM dd HH:mm:ss zzz yyyy' or epoch seconds");
  const auto day_it = std::find(kDayNames.begin(), kDayNames.end(), parts[0]);
  const auto mon_it = std::find(kMonthNames.begin(), kMonthNames.end(), parts[1]);
  if (day_it == kDayNames.end() || mon_it == kMonthNames.end())
    throw ValidationError("timestamp '" + std::string(text) + "': unknown day or month name");

  CivilTime& c = ts.civil;
  c.month = static_cast<unsigned>(mon_it - kMonthNames.begin()) + 1;
  c.day = parse_unit(parts[2], 1, 31, "day", text);
  const auto clock = parts[3];
  if (clock.size() != 8 || clock[2] != ':' || clock[5] != ':')
    throw ValidationError("timestamp '" + std::string(text) + "': bad time of day");
  c.hour = parse_unit(clock.substr(0, 2), 0, 23, "hour", text);
  c.minute = parse_unit(clock.substr(3, 2), 0, 59, "minute", text);
  c.second = parse_unit(clock.substr(6, 2), 0, 60, "second", text);
  if (!parse_int(parts[5], c.year) || c.year < 1 || c.year > 9999)
    throw ValidationError("timestamp '" + std::string(text) + "': bad year");

  const year_month_day ymd{year{c.year}, month{c.month}, day{c.day}};
  if (!ymd.ok()) throw ValidationError("timestamp '" + std::string(text) + "': no such date");
  const unsigned dow = weekday{sys_days{ymd}}.iso_encoding() - 1;
  if (dow != static_cast<unsigned>(day_it - kDayNames.begin()))
    throw ValidationError("timestamp '" + std::string(text) + "': day name does not match date");
  return ts;
}

bool Schema::has(std::string_view column) const {
  return std::find(columns.begin(), columns.end(), column) != columns.end();
}

Schema default_schema() {
  return Schema{{kKnownColumns.begin(), kKnownColumns.end()}};
}

Schema schema_from_columns(std::vector<std::string> columns) {
  Schema schema{std::move(columns)};
  for (const auto& c : schema.columns) {
    if (std::find(kKnownColumns.begin(), kKnownColumns.end(), c) == kKnownColumns.end())
      throw ConfigError("schema: unknown column '" + c + "'");
    if (std::count(schema.columns.begin(), schema.columns.end(), c) > 1)
      throw ConfigError("schema: duplicate column '" + c + "'");
  }
  for (const auto& required : kKnownColumns) {
    if (required != "text" && !schema.has(required))
      throw ConfigError("schema: missing column '" + std::string(required) + "'");
  }
  return schema;
}

Schema load_schema_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schema sidecar " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("schema sidecar " + path.string() + ": " + e.what());
  }
  const auto& cols = doc.is_object() ? doc.at("columns") : doc;
  return schema_from_columns(cols.get<std::vector<std::string>>());
}

TweetRecord parse_tsv_line(std::string_view line, const Schema& schema, std::size_t line_number,
                           const ParseOptions& options) {
  const auto fields = split_tabs(strip_cr(line));
  const bool text_omitted = !schema.columns.empty() && schema.columns.back() == "text" &&
                            fields.size() + 1 == schema.field_count();
  if (fields.size() != schema.field_count() && !text_omitted)
    throw FormatError(line_number, "expected " + std::to_string(schema.field_count()) +
                                       " tab-separated fields, got " +
                                       std::to_string(fields.size()));
  TweetRecord r;
  try {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const std::string& col = schema.columns[i];
      const std::string_view f = fields[i];
      if (col == "tweet_id") r.tweet_id = f;
      else if (col == "username") r.username = f;
      else if (col == "timestamp") {
        try {
          r.timestamp = parse_timestamp(f);
        } catch (const ValidationError& e) {
          throw FieldError(col, e.what());
        }
      } else if (col == "followers") r.followers = count_field(f, col);
      else if (col == "friends") r.friends = count_field(f, col);
      else if (col == "favorites") r.favorites = count_field(f, col);
      else if (col == "entities") r.entities = opaque(f);
      else if (col == "sentiment") {
        try {
          parse_sentiment(f);
        } catch (const ValidationError& e) {
          throw FieldError(col, e.what());
        }
        r.sentiment_raw = f;
      } else if (col == "mentions") r.mentions_raw = opaque(f);
      else if (col == "hashtags") r.hashtags_raw = opaque(f);
      else if (col == "urls") r.urls_raw = opaque(f);
      else if (col == "retweets") {
        if ((f.empty() || f == kEmptyMarker) && options.label_optional) r.retweets.reset();
        else r.retweets = count_field(f, col);
      } else if (col == "text") {
        auto t = opaque(f);
        if (!t.empty()) r.text = std::move(t);
      }
    }
  } catch (const FieldError& e) {
    throw FieldError(e.column(), e.detail(), line_number);
  }
  return r;
}

std::string format_tsv_line(const TweetRecord& r, const Schema& schema) {
  std::string out;
  for (std::size_t i = 0; i < schema.columns.size(); ++i) {
    if (i) out += '\t';
    const std::string& col = schema.columns[i];
    if (col == "tweet_id") out += r.tweet_id;
    else if (col == "username") out += r.username;
    else if (col == "timestamp") out += r.timestamp.raw;
    else if (col == "followers") out += std::to_string(r.followers);
    else if (col == "friends") out += std::to_string(r.friends);
    else if (col == "favorites") out += std::to_string(r.favorites);
    else if (col == "entities") out += marker_if_empty(r.entities);
    else if (col == "sentiment") out += r.sentiment_raw;
    else if (col == "mentions") out += marker_if_empty(r.mentions_raw);
    else if (col == "hashtags") out += marker_if_empty(r.hashtags_raw);
    else if (col == "urls") out += marker_if_empty(r.urls_raw);
    else if (col == "retweets") out += r.retweets ? std::to_string(*r.retweets) : std::string();
    else if (col == "text") out += r.text ? clean_text(*r.text) : std::string();
  }
  return out;
}

LoadedTsv read_tsv(const std::filesystem::path& path, const Schema& schema,
                   const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  LoadedTsv loaded;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string_view view = strip_cr(line);
    if (view.find_first_not_of(" \t") == std::string_view::npos) continue;
    if (number == 1) {
      const auto fields = split_tabs(view);
      if (std::equal(fields.begin(), fields.end(), schema.columns.begin(), schema.columns.end()))
        continue;
    }
    try {
      loaded.records.push_back(parse_tsv_line(view, schema, number, options));
      loaded.line_numbers.push_back(number);
    } catch (const DataError& e) {
      ++loaded.dropped;
      loaded.problems.emplace_back(e.what());
    }
  }
  return loaded;
}

}  // namespace retweet::data
