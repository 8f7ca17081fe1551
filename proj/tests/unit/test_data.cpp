#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "retweet/data/dataset.hpp"
#include "retweet/errors.hpp"
#include "retweet/rng.hpp"

using namespace retweet;
using namespace retweet::data;

namespace {

const std::string kLine =
    "1178791636307075073\tsomeuser\tThu Oct 03 21:12:56 CEST 2019\t10\t5\t2\tnull;\t2 -1\talice\t"
    "null;\tnull;\t7\tHow's self-quarantine going?";

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
  const auto path = std::filesystem::temp_directory_path() / ("retweet_test_" + name);
  std::ofstream(path, std::ios::binary) << contents;
  return path;
}

}  // namespace

TEST_CASE("parse a full TSV line") {
  const auto r = parse_tsv_line(kLine, default_schema());
  CHECK(r.tweet_id == "1178791636307075073");
  CHECK(r.username == "someuser");
  CHECK(r.followers == 10);
  CHECK(r.friends == 5);
  CHECK(r.favorites == 2);
  CHECK(r.sentiment_raw == "2 -1");
  CHECK(r.mentions_raw == "alice");
  CHECK(r.retweets == 7u);
  REQUIRE(r.text);
  CHECK(*r.text == "How's self-quarantine going?");
  CHECK(r.timestamp.civil == CivilTime{2019, 10, 3, 21, 12, 56});
}

TEST_CASE("sentiment field is kept raw and parsed later") {
  auto line = kLine;
  line.replace(line.find("2 -1"), 4, "3 -1");
  const auto r = parse_tsv_line(line, default_schema());
  CHECK(r.sentiment_raw == "3 -1");
  CHECK(parse_sentiment(r.sentiment_raw) == Sentiment{3, -1});
}

TEST_CASE("field count and field value errors") {
  const std::string twelve = kLine.substr(0, kLine.rfind('\t'));
  CHECK_THROWS_AS(parse_tsv_line(kLine + "\textra", default_schema(), 4), FormatError);
  CHECK_THROWS_AS(parse_tsv_line(twelve.substr(0, twelve.rfind('\t')), default_schema(), 4), FormatError);
  try {
    parse_tsv_line(twelve.substr(0, twelve.rfind('\t')), default_schema(), 4);
  } catch (const FormatError& e) {
    CHECK(e.line() == 4);
  }

  auto bad = kLine;
  bad.replace(bad.find("\t10\t"), 4, "\tx\t");
  try {
    parse_tsv_line(bad, default_schema(), 9);
    FAIL("expected FieldError");
  } catch (const FieldError& e) {
    CHECK(e.column() == "followers");
    CHECK(std::string(e.what()).find("line 9") != std::string::npos);
  }
}

TEST_CASE("text column is optional and labels can be optional") {
  const std::string twelve = kLine.substr(0, kLine.rfind('\t'));
  CHECK_FALSE(parse_tsv_line(twelve, default_schema()).text);
  CHECK_FALSE(parse_tsv_line(twelve + "\t", default_schema()).text);
  CHECK_FALSE(parse_tsv_line(twelve + "\tnull;", default_schema()).text);

  auto unlabeled = kLine;
  unlabeled.replace(unlabeled.find("\t7\t"), 3, "\t\t");
  CHECK_THROWS_AS(parse_tsv_line(unlabeled, default_schema()), FieldError);
  ParseOptions opts;
  opts.label_optional = true;
  CHECK_FALSE(parse_tsv_line(unlabeled, default_schema(), 0, opts).retweets);
}

TEST_CASE("TSV format and parse round trip") {
  const auto schema = default_schema();
  for (const auto& r : synthetic_records(200, 5)) {
    const auto line = format_tsv_line(r, schema);
    CHECK(parse_tsv_line(line, schema) == r);
  }
}

TEST_CASE("custom column order through a schema sidecar") {
  auto columns = default_schema().columns;
  std::swap(columns[0], columns[1]);
  const auto path = temp_file("schema.json", nlohmann::json{{"columns", columns}}.dump());
  const auto schema = load_schema_sidecar(path);
  CHECK(schema.columns == columns);
  const auto r = synthetic_records(1, 2).front();
  CHECK(parse_tsv_line(format_tsv_line(r, schema), schema) == r);

  CHECK_THROWS_AS(schema_from_columns({"tweet_id", "bogus"}), ConfigError);
  CHECK_THROWS_AS(schema_from_columns({"tweet_id", "tweet_id"}), ConfigError);
}

TEST_CASE("read_tsv drops and counts malformed lines") {
  const auto loaded = read_tsv(std::filesystem::path(RETWEET_TEST_DATA) / "fixture_bad_line.tsv", default_schema());
  CHECK(loaded.records.size() == 10);
  CHECK(loaded.dropped == 1);
  REQUIRE(loaded.problems.size() == 1);
  CHECK(loaded.problems[0].find("line 6") != std::string::npos);
  CHECK(loaded.line_numbers[5] == 7);
}

TEST_CASE("read_tsv skips a header row and blank lines") {
  std::string contents;
  for (const auto& c : default_schema().columns) contents += (contents.empty() ? "" : "\t") + c;
  contents += "\n" + kLine + "\n\n" + kLine + "\n";
  const auto loaded = read_tsv(temp_file("header.tsv", contents), default_schema());
  CHECK(loaded.records.size() == 2);
  CHECK(loaded.dropped == 0);
  CHECK_THROWS_AS(read_tsv("/nonexistent/file.tsv", default_schema()), DataError);
}

TEST_CASE("timestamp parsing") {
  const auto t = parse_timestamp("Thu Oct 03 21:12:56 CEST 2019");
  CHECK(t.raw == "Thu Oct 03 21:12:56 CEST 2019");
  CHECK(t.civil == CivilTime{2019, 10, 3, 21, 12, 56});
  CHECK(parse_timestamp("0").civil == CivilTime{1970, 1, 1, 0, 0, 0});
  CHECK(parse_timestamp("1578268800").civil == CivilTime{2020, 1, 6, 0, 0, 0});
  CHECK_THROWS_AS(parse_timestamp("Fri Oct 03 21:12:56 CEST 2019"), ValidationError);
  CHECK_THROWS_AS(parse_timestamp("Thu Feb 30 21:12:56 CEST 2019"), ValidationError);
  CHECK_THROWS_AS(parse_timestamp("yesterday"), ValidationError);
  CHECK(format_timestamp({2019, 10, 3, 21, 12, 56}) == "Thu Oct 03 21:12:56 UTC 2019");
}

TEST_CASE("timestamp decomposition examples") {
  const auto a = decompose_timestamp(parse_timestamp("Thu Oct 03 21:12:56 CEST 2019").civil);
  CHECK(a == TimeParts{10, 40, 3, 21, 12, 3});
  const auto b = decompose_timestamp(parse_timestamp("Mon Jan 06 00:00:00 UTC 2020").civil);
  CHECK(b == TimeParts{1, 2, 6, 0, 0, 0});
}

TEST_CASE("timestamp decomposition agrees with a day-counting calendar") {
  Rng rng(21);
  for (int i = 0; i < 3000; ++i) {
    const auto c = civil_from_epoch(static_cast<std::int64_t>(rng.below(2000000000ULL)));
    const auto p = decompose_timestamp(c);
    CHECK(p.month == c.month);
    CHECK(p.day == c.day);
    CHECK(static_cast<int>(p.day_of_week) == oracle::weekday(c.year, c.month, c.day));
    CHECK(static_cast<int>(p.iso_week) == oracle::iso_week(c.year, c.month, c.day));
  }
  // Year boundaries where the ISO week belongs to the neighbouring year.
  CHECK(decompose_timestamp({2021, 1, 1, 0, 0, 0}).iso_week == 53);
  CHECK(decompose_timestamp({2019, 12, 30, 0, 0, 0}).iso_week == 1);
}

TEST_CASE("sentiment parsing") {
  CHECK(parse_sentiment("3 -1") == Sentiment{3, -1});
  CHECK(parse_sentiment("5 -5") == Sentiment{5, -5});
  CHECK(parse_sentiment("1 -1") == Sentiment{1, -1});
  CHECK_THROWS_AS(parse_sentiment("0 -1"), ValidationError);
  CHECK_THROWS_AS(parse_sentiment("3 1"), ValidationError);
  CHECK_THROWS_AS(parse_sentiment("3"), ValidationError);
  CHECK_THROWS_AS(parse_sentiment("a b"), ValidationError);
}

TEST_CASE("mention counting") {
  CHECK(count_mentions("alice bob carol") == 3);
  CHECK(count_mentions("") == 0);
  CHECK(count_mentions("null;") == 0);
  CHECK(count_mentions("  alice   bob ") == 2);
}

TEST_CASE("feature engineering") {
  auto r = parse_tsv_line(kLine, default_schema());
  CHECK(engineer_features(r).to_array() == FeatureVector{10, 40, 3, 21, 12, 3, 10, 5, 2, 2, -1, 1});
  CHECK(engineer_features(r) == engineer_features(r));
  r.followers = r.friends = r.favorites = 0;
  const auto f = engineer_features(r).to_array();
  CHECK(f[6] == 0.0);
  CHECK(f[7] == 0.0);
  CHECK(f[8] == 0.0);
  CHECK(kNumericFeatureNames[0] == "month");
  CHECK(kNumericFeatureNames[11] == "mention_count");
}

TEST_CASE("scaler examples") {
  const std::vector<FeatureVector> one{FeatureVector{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}};
  const auto s1 = fit_scaler(one);
  for (double v : s1.apply(one[0])) CHECK(v == 0.0);

  FeatureVector lo{}, hi{};
  hi[0] = 2.0;
  const std::vector<FeatureVector> two{lo, hi};
  const auto s = fit_scaler(two);
  CHECK(s.mean[0] == 1.0);
  CHECK(s.stddev[0] == 1.0);
  CHECK(s.apply(lo)[0] == -1.0);
  CHECK(s.apply(hi)[0] == 1.0);
  CHECK(s.stddev[1] == 1.0);  // constant column
  CHECK(s.apply(hi)[1] == 0.0);
}

TEST_CASE("scaled training features have mean 0 and population std 1") {
  std::vector<NumericFeatures> feats;
  for (const auto& r : synthetic_records(300, 8)) feats.push_back(engineer_features(r));
  const auto s = fit_scaler(feats);
  for (std::size_t j = 0; j < kNumericFeatureCount; ++j) {
    double sum = 0.0, sq = 0.0;
    for (const auto& f : feats) sum += apply_scaler(s, f)[j];
    const double m = sum / feats.size();
    for (const auto& f : feats) sq += (apply_scaler(s, f)[j] - m) * (apply_scaler(s, f)[j] - m);
    CHECK(std::fabs(m) < 1e-9);
    const double sd = std::sqrt(sq / feats.size());
    CHECK((std::fabs(sd - 1.0) < 1e-9 || sd == 0.0));
  }
  CHECK(Scaler::from_json(s.to_json()) == s);
}

TEST_CASE("tokenizer") {
  CHECK(tokenize("How's self-quarantine going?") == std::vector<std::string>{"how's", "self-quarantine", "going"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("Check https://x.co NOW") == std::vector<std::string>{"check", "<url>", "now"});
  CHECK(tokenize("!!! ...").empty());
}

TEST_CASE("vocabulary") {
  const auto v = build_vocab({{"a", "b"}, {"b", "c"}});
  CHECK(v.size() == 5);
  CHECK(v.id_of("a") == 2);
  CHECK(v.id_of("b") == 3);
  CHECK(v.id_of("c") == 4);
  CHECK(v.id_of("zzz") == Vocabulary::kOovId);
  CHECK(build_vocab({}).size() == 2);
  CHECK(build_vocab({{"a", "b"}, {"b", "c"}}) == v);
  CHECK(Vocabulary::from_json(v.to_json()) == v);
}

TEST_CASE("text encoding truncates and right-pads") {
  std::vector<std::string> many;
  for (int i = 0; i < 35; ++i) many.push_back("t" + std::to_string(i));
  const auto v = build_vocab({many});
  const auto ids = encode_text(many, v);
  REQUIRE(ids.size() == 30);
  for (std::size_t i = 0; i < 30; ++i) CHECK(ids[i] == i + 2);

  const auto short_ids = encode_text({"t0", "t1", "t2"}, v);
  CHECK(short_ids.size() == 30);
  CHECK(short_ids[2] == 4);
  for (std::size_t i = 3; i < 30; ++i) CHECK(short_ids[i] == Vocabulary::kPadId);

  CHECK(encode_text({"t0", "unknown"}, v)[1] == Vocabulary::kOovId);
}

TEST_CASE("split sizes") {
  auto sizes = [](std::size_t n) {
    const auto s = split_indices(n, 1);
    return std::array<std::size_t, 3>{s.train.size(), s.validation.size(), s.test.size()};
  };
  CHECK(sizes(60000) == std::array<std::size_t, 3>{40000, 10000, 10000});
  CHECK(sizes(6) == std::array<std::size_t, 3>{4, 1, 1});
  CHECK(sizes(120) == std::array<std::size_t, 3>{80, 20, 20});
  CHECK(sizes(8) == std::array<std::size_t, 3>{6, 1, 1});
}

TEST_CASE("split is a seeded partition") {
  const auto a = split_indices(500, 9);
  CHECK(a == split_indices(500, 9));
  CHECK_FALSE(a == split_indices(500, 10));
  std::vector<std::size_t> all;
  for (const auto* part : {&a.train, &a.validation, &a.test}) {
    CHECK(std::is_sorted(part->begin(), part->end()));
    all.insert(all.end(), part->begin(), part->end());
  }
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
  CHECK(SplitIndex::from_json(a.to_json()) == a);
}

TEST_CASE("preprocessing is fitted on the training split only") {
  auto records = synthetic_records(20, 4);
  records[0].text = "zebra";
  const auto prep = fit_preprocessing(records, {1, 2, 3});
  CHECK_FALSE(prep.vocab.contains("zebra"));
  const auto ex = encode_record(records[0], prep.scaler, prep.vocab);
  CHECK(ex.token_ids[0] == Vocabulary::kOovId);
  CHECK(ex.has_text);
  CHECK(ex.has_label);
  CHECK(ex.label == static_cast<double>(*records[0].retweets));
}

TEST_CASE("synthetic records are deterministic and follow the label rule") {
  const auto a = synthetic_records(100, 3);
  CHECK(a == synthetic_records(100, 3));
  for (const auto& r : a) {
    const auto f = engineer_features(r);
    const bool keyword = r.text && r.text->find("vaccine") != std::string::npos;
    const double expected = std::round(std::exp(0.25 * f.sentiment_pos + 0.3 * f.mention_count + 0.05 * f.hour)) +
                            (keyword ? 20.0 : 0.0);
    CHECK(static_cast<double>(*r.retweets) == expected);
  }
}
