#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace retweet::data {

struct SplitRatios {
  unsigned train = 4;
  unsigned validation = 1;
  unsigned test = 1;
};

// Ordinals into the source record list, ascending within each split.
struct SplitIndex {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;

  nlohmann::json to_json() const;
  static SplitIndex from_json(const nlohmann::json& doc);

  friend bool operator==(const SplitIndex&, const SplitIndex&) = default;
};

// Seeded shuffle, then floor(n * r / total) records each for validation and
// test; the remainder goes to train.
SplitIndex split_indices(std::size_t n, std::uint64_t seed, const SplitRatios& ratios = {});

template <typename T>
struct Splits {
  std::vector<T> train;
  std::vector<T> validation;
  std::vector<T> test;
};

template <typename T>
std::vector<T> select(const std::vector<T>& items, const std::vector<std::size_t>& ordinals) {
  std::vector<T> out;
  out.reserve(ordinals.size());
  for (auto i : ordinals) out.push_back(items.at(i));
  return out;
}

template <typename T>
Splits<T> split_dataset(const std::vector<T>& records, std::uint64_t seed,
                        const SplitRatios& ratios = {}) {
  const SplitIndex idx = split_indices(records.size(), seed, ratios);
  return {select(records, idx.train), select(records, idx.validation), select(records, idx.test)};
}

}  // namespace retweet::data
