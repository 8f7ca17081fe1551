#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include <nlohmann/json_fwd.hpp>

#include "retweet/data/split.hpp"
#include "retweet/model/config.hpp"
#include "retweet/optim/adam.hpp"
#include "retweet/optim/trainer.hpp"

namespace retweet::cli {

// Everything a run depends on besides the dataset itself. All randomness is
// derived from `seed` through named sub-seeds.
struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path out_dir = "run";
  std::optional<std::filesystem::path> schema;  // one-line JSON column-order sidecar
  std::uint64_t seed = 42;
  data::SplitRatios split;
  model::ModelConfig model;
  optim::AdamConfig adam;
  std::size_t epochs = 100;
  std::size_t batch = 64;
  optim::TargetTransform target_transform = optim::TargetTransform::none;

  nlohmann::json to_json() const;
  // Missing keys keep the values of `base`.
  static RunConfig from_json(const nlohmann::json& doc, RunConfig base);
  static RunConfig from_json(const nlohmann::json& doc);
  // Relative dataset and schema paths are taken relative to the file.
  static RunConfig load(const std::filesystem::path& path);
};

inline constexpr const char* kOutDirEnv = "RETWEET_REG_OUT";

// Applies RETWEET_REG_OUT when set and non-empty.
void apply_environment(RunConfig& config);

}  // namespace retweet::cli
