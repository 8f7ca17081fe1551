#pragma once

#include <cstdint>
#include <vector>

#include "retweet/data/features.hpp"
#include "retweet/data/record.hpp"
#include "retweet/data/scaler.hpp"
#include "retweet/data/split.hpp"
#include "retweet/data/text.hpp"

namespace retweet::data {

// Model-ready example: standardized numeric features, fixed-length token
// ids and the raw retweet count.
struct EncodedExample {
  FeatureVector numeric{};
  std::vector<std::size_t> token_ids;
  double label = 0.0;
  bool has_text = false;
  bool has_label = false;

  friend bool operator==(const EncodedExample&, const EncodedExample&) = default;
};

EncodedExample encode_record(const TweetRecord& record, const Scaler& scaler,
                             const Vocabulary& vocab,
                             std::size_t sequence_length = kDefaultSequenceLength);

std::vector<EncodedExample> encode_records(const std::vector<TweetRecord>& records,
                                           const Scaler& scaler, const Vocabulary& vocab,
                                           std::size_t sequence_length = kDefaultSequenceLength);

// Vocabulary and scaler fitted on the training split only.
struct Preprocessing {
  Vocabulary vocab;
  Scaler scaler;
};

Preprocessing fit_preprocessing(const std::vector<TweetRecord>& records,
                                const std::vector<std::size_t>& train_ordinals);

// Synthetic records whose label is round(exp(linear in sentiment_pos,
// mention_count, hour)) plus a fixed bonus when the keyword appears in the
// text. Used for smoke training and the bundled fixture.
struct SyntheticOptions {
  std::string keyword = "vaccine";
  double keyword_bonus = 20.0;
  double keyword_probability = 0.5;
  double intercept = 0.0;
  double w_sentiment_pos = 0.25;
  double w_mentions = 0.3;
  double w_hour = 0.05;
};

std::vector<TweetRecord> synthetic_records(std::size_t n, std::uint64_t seed,
                                           const SyntheticOptions& options = {});

}  // namespace retweet::data
