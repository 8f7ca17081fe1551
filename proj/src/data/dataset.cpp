#include "retweet/data/dataset.hpp"

#include <array>
#include <cmath>
#include <string_view>

#include "retweet/rng.hpp"

namespace retweet::data {

EncodedExample encode_record(const TweetRecord& record, const Scaler& scaler,
                             const Vocabulary& vocab, std::size_t sequence_length) {
  EncodedExample ex;
  ex.numeric = apply_scaler(scaler, engineer_features(record));
  ex.has_text = record.text.has_value();
  ex.token_ids = encode_text(ex.has_text ? tokenize(*record.text) : std::vector<std::string>{},
                             vocab, sequence_length);
  ex.has_label = record.retweets.has_value();
  ex.label = ex.has_label ? static_cast<double>(*record.retweets) : 0.0;
  return ex;
}

std::vector<EncodedExample> encode_records(const std::vector<TweetRecord>& records,
                                           const Scaler& scaler, const Vocabulary& vocab,
                                           std::size_t sequence_length) {
  std::vector<EncodedExample> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(encode_record(r, scaler, vocab, sequence_length));
  return out;
}

Preprocessing fit_preprocessing(const std::vector<TweetRecord>& records,
                                const std::vector<std::size_t>& train_ordinals) {
  std::vector<std::vector<std::string>> corpus;
  std::vector<NumericFeatures> features;
  for (auto i : train_ordinals) {
    const auto& r = records.at(i);
    if (r.text) corpus.push_back(tokenize(*r.text));
    features.push_back(engineer_features(r));
  }
  return {build_vocab(corpus), fit_scaler(std::span<const NumericFeatures>(features))};
}

namespace {

constexpr std::array<std::string_view, 40> kWords = {
    "covid",    "lockdown", "stay",    "home",     "masks",   "cases",    "today",  "new",
    "health",   "workers",  "thank",   "you",      "please",  "wash",     "hands",  "news",
    "update",   "people",   "hospital", "testing", "spread",  "virus",    "world",  "week",
    "school",   "closed",   "support", "local",    "family",  "friends",  "safe",   "together",
    "pandemic", "crisis",   "economy", "jobs",     "social",  "distance", "quarantine", "going"};

constexpr std::array<std::string_view, 6> kHandles = {"alice", "bob", "carol", "dave", "erin", "frank"};

}  // namespace

std::vector<TweetRecord> synthetic_records(std::size_t n, std::uint64_t seed,
                                           const SyntheticOptions& opt) {
  Rng rng(seed);
  std::vector<TweetRecord> out;
  out.reserve(n);
  // 2019-10-01T00:00:00Z .. 2020-05-01T00:00:00Z
  constexpr std::int64_t kStart = 1569888000, kSpan = 18403200;
  for (std::size_t i = 0; i < n; ++i) {
    TweetRecord r;
    r.tweet_id = std::to_string(1000000 + i);
    r.username = "u" + std::to_string(rng.below(1u << 20));
    const auto epoch = kStart + static_cast<std::int64_t>(rng.below(kSpan));
    const CivilTime civil = civil_from_epoch(epoch);
    r.timestamp = parse_timestamp(format_timestamp(civil));
    r.followers = static_cast<std::uint64_t>(std::exp(rng.uniform(2.0, 10.0)));
    r.friends = static_cast<std::uint64_t>(std::exp(rng.uniform(1.0, 7.0)));
    r.favorites = rng.below(50);
    const int pos = 1 + static_cast<int>(rng.below(5));
    const int neg = -1 - static_cast<int>(rng.below(5));
    r.sentiment_raw = std::to_string(pos) + " " + std::to_string(neg);
    const auto mentions = rng.below(5);
    for (std::uint64_t m = 0; m < mentions; ++m) {
      if (m) r.mentions_raw += ' ';
      r.mentions_raw += kHandles[rng.below(kHandles.size())];
    }

    const std::size_t n_words = 6 + rng.below(15);
    const bool keyword = rng.unit() < opt.keyword_probability;
    const std::size_t keyword_at = rng.below(n_words);
    std::string text;
    for (std::size_t w = 0; w < n_words; ++w) {
      if (w) text += ' ';
      text += keyword && w == keyword_at ? std::string_view(opt.keyword)
                                         : kWords[rng.below(kWords.size())];
    }
    r.text = std::move(text);

    const double linear = opt.intercept + opt.w_sentiment_pos * pos +
                          opt.w_mentions * static_cast<double>(mentions) +
                          opt.w_hour * static_cast<double>(civil.hour);
    const double label = std::round(std::exp(linear)) + (keyword ? opt.keyword_bonus : 0.0);
    r.retweets = static_cast<std::uint64_t>(label);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace retweet::data
