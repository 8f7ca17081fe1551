#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "retweet/data/dataset.hpp"
#include "retweet/metrics/metrics.hpp"
#include "retweet/model/model.hpp"
#include "retweet/optim/adam.hpp"

namespace retweet::optim {

enum class TargetTransform { none, log1p };

TargetTransform parse_target_transform(std::string_view name);
std::string_view target_transform_name(TargetTransform t);

double to_target(double count, TargetTransform t);
double from_target(double value, TargetTransform t);

// Predictions on the retweet-count scale.
std::vector<double> predict_counts(const model::Model& model,
                                   std::span<const data::EncodedExample> examples,
                                   TargetTransform transform);

metrics::MetricsReport evaluate(const model::Model& model,
                                std::span<const data::EncodedExample> examples,
                                TargetTransform transform);

struct FitOptions {
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  std::uint64_t shuffle_seed = 0;
  AdamConfig adam;
  TargetTransform transform = TargetTransform::none;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // example-weighted mean of the batch losses
  std::size_t batches = 0;
  std::optional<metrics::MetricsReport> validation;

  nlohmann::json to_json() const;
};

struct FitResult {
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  // Parameters from the epoch with the lowest validation MAE (the last epoch
  // when there is no validation set).
  model::Model best;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Each epoch shuffles the training set with a seeded generator and runs one
// Adam step per sequential mini-batch; the final partial batch is kept.
FitResult fit(model::Model& model, std::span<const data::EncodedExample> train,
              std::span<const data::EncodedExample> validation, const FitOptions& options,
              const EpochCallback& on_epoch = {});

}  // namespace retweet::optim
