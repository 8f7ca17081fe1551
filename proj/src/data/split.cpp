#include "retweet/data/split.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "retweet/errors.hpp"
#include "retweet/rng.hpp"

namespace retweet::data {

namespace {
constexpr std::string_view kSplitFormat = "retweet-reg-splits";
}

SplitIndex split_indices(std::size_t n, std::uint64_t seed, const SplitRatios& ratios) {
  if (n == 0) throw DataError("split_dataset: no records");
  const std::size_t total = ratios.train + ratios.validation + ratios.test;
  if (total == 0 || ratios.train == 0) throw ConfigError("split ratios need a positive train share");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);

  const std::size_t n_valid = n * ratios.validation / total;
  const std::size_t n_test = n * ratios.test / total;
  const std::size_t n_train = n - n_valid - n_test;

  SplitIndex idx;
  const auto first = order.begin();
  idx.train.assign(first, first + static_cast<std::ptrdiff_t>(n_train));
  idx.validation.assign(first + static_cast<std::ptrdiff_t>(n_train),
                        first + static_cast<std::ptrdiff_t>(n_train + n_valid));
  idx.test.assign(first + static_cast<std::ptrdiff_t>(n_train + n_valid), order.end());
  std::sort(idx.train.begin(), idx.train.end());
  std::sort(idx.validation.begin(), idx.validation.end());
  std::sort(idx.test.begin(), idx.test.end());
  return idx;
}

nlohmann::json SplitIndex::to_json() const {
  return {{"format", kSplitFormat},
          {"version", 1},
          {"train", train},
          {"validation", validation},
          {"test", test}};
}

SplitIndex SplitIndex::from_json(const nlohmann::json& doc) {
  if (doc.value("format", "") != kSplitFormat || doc.value("version", 0) != 1)
    throw DataError("not a version-1 split index file");
  return {doc.at("train").get<std::vector<std::size_t>>(),
          doc.at("validation").get<std::vector<std::size_t>>(),
          doc.at("test").get<std::vector<std::size_t>>()};
}

}  // namespace retweet::data
