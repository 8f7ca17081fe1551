#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "retweet/model/config.hpp"

namespace retweet::cli {

// Central differences use this step; errors are |a - n| / max(|a|, |n|, floor)
// so gradients below the floor are compared on an absolute scale.
inline constexpr double kFiniteDifferenceStep = 1e-6;
inline constexpr double kRelativeErrorFloor = 1e-3;
inline constexpr double kGradcheckThreshold = 1e-4;

double relative_error(double analytic, double numeric);

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  // Coordinates where a +/- step changes a k-max selection or relu pattern.
  std::size_t skipped = 0;
  bool passed = false;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double seconds = 0.0;

  bool passed() const;
  nlohmann::json to_json() const;
};

// The small configuration used for end-to-end checks: vocabulary 20,
// 8-d embeddings over 6 tokens padded by 2, 4 filters of width 3, k = 2,
// 4 hidden units.
model::ModelConfig miniature_config(model::Arch arch, model::InputMode mode);

// Every building block on random small shapes, then the full loss of both
// architectures in all three input modes.
GradCheckReport run_gradcheck(std::uint64_t seed, double threshold = kGradcheckThreshold);

}  // namespace retweet::cli
