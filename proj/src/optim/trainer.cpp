#include "retweet/optim/trainer.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "retweet/errors.hpp"
#include "retweet/rng.hpp"

namespace retweet::optim {

TargetTransform parse_target_transform(std::string_view name) {
  if (name == "none") return TargetTransform::none;
  if (name == "log1p") return TargetTransform::log1p;
  throw ConfigError("unknown target_transform '" + std::string(name) + "' (expected none or log1p)");
}

std::string_view target_transform_name(TargetTransform t) {
  return t == TargetTransform::none ? "none" : "log1p";
}

double to_target(double count, TargetTransform t) {
  return t == TargetTransform::log1p ? std::log1p(count) : count;
}

double from_target(double value, TargetTransform t) {
  return t == TargetTransform::log1p ? std::expm1(value) : value;
}

std::vector<double> predict_counts(const model::Model& model,
                                   std::span<const data::EncodedExample> examples,
                                   TargetTransform transform) {
  std::vector<double> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(from_target(model.predict(ex), transform));
  return out;
}

metrics::MetricsReport evaluate(const model::Model& model,
                                std::span<const data::EncodedExample> examples,
                                TargetTransform transform) {
  std::vector<double> actual;
  actual.reserve(examples.size());
  for (const auto& ex : examples) actual.push_back(ex.label);
  const auto predicted = predict_counts(model, examples, transform);
  return metrics::compute_report(actual, predicted);
}

nlohmann::json EpochLog::to_json() const {
  return {{"epoch", epoch},
          {"train_loss", train_loss},
          {"batches", batches},
          {"validation", validation ? validation->to_json() : nlohmann::json()}};
}

FitResult fit(model::Model& model, std::span<const data::EncodedExample> train,
              std::span<const data::EncodedExample> validation, const FitOptions& options,
              const EpochCallback& on_epoch) {
  if (train.empty()) throw DataError("fit: empty training set");
  if (options.batch_size == 0) throw ConfigError("batch size must be positive");

  AdamState adam{options.adam, {}, {}, 0};
  Rng rng(options.shuffle_seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  FitResult result{{}, 0, model};
  double best_mae = INFINITY;
  std::vector<data::EncodedExample> batch;
  std::vector<double> targets;
  model.zero_grad();

  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    rng.shuffle(order);
    EpochLog log;
    log.epoch = epoch;
    double weighted = 0.0;
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      batch.clear();
      targets.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(train[order[i]]);
        targets.push_back(to_target(train[order[i]].label, options.transform));
      }
      weighted += model.accumulate_gradients(batch, targets) * static_cast<double>(batch.size());
      adam_step(adam, model.params());
      ++log.batches;
    }
    log.train_loss = weighted / static_cast<double>(train.size());
    if (!std::isfinite(log.train_loss)) throw NumericError("training loss is not finite");

    if (!validation.empty()) {
      log.validation = evaluate(model, validation, options.transform);
      if (log.validation->mae < best_mae) {
        best_mae = log.validation->mae;
        result.best = model;
        result.best_epoch = epoch;
      }
    } else {
      result.best = model;
      result.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(log);
    result.log.push_back(std::move(log));
  }
  return result;
}

}  // namespace retweet::optim
