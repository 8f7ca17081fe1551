#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "retweet/data/dataset.hpp"
#include "retweet/model/config.hpp"
#include "retweet/tensor.hpp"

namespace retweet::model {

struct ParamSlot {
  std::string name;
  Tensor value;
  Tensor grad;  // same shape as value
  bool trainable = true;
  bool grad_ready = false;  // set by a backward pass, cleared by the optimizer
};

// Shapes of the intermediate tensors of one forward pass, in execution order.
using ShapeTrace = std::vector<std::pair<std::string, Shape>>;

struct LossResult {
  double loss;
  Tensor grad;  // d loss / d pred
};

// Mean squared error and its gradient 2 (pred - target) / n.
LossResult loss_mse(const Tensor& pred, const Tensor& target);

// CNN or RNN regressor over numeric features, text, or both. Branch outputs
// are flattened and concatenated (numeric first) before a single dense
// output unit.
class Model {
 public:
  const ModelConfig& config() const noexcept { return config_; }

  std::vector<ParamSlot>& params() noexcept { return params_; }
  const std::vector<ParamSlot>& params() const noexcept { return params_; }
  ParamSlot& param(std::string_view name);
  const ParamSlot& param(std::string_view name) const;
  bool has_param(std::string_view name) const;
  std::size_t parameter_count() const;
  // Length of the concatenated vector fed to the output layer.
  std::size_t dense_input_size() const;

  double predict(const data::EncodedExample& example) const;
  Tensor forward(std::span<const data::EncodedExample> batch) const;

  // Mean squared error over the batch without touching gradients.
  double loss(std::span<const data::EncodedExample> batch, std::span<const double> targets) const;

  // Forward, MSE and backward. Adds the batch gradient to every trainable
  // slot (examples in batch order) and marks it ready. Returns the loss.
  double accumulate_gradients(std::span<const data::EncodedExample> batch,
                              std::span<const double> targets);

  void zero_grad();

  ShapeTrace trace(const data::EncodedExample& example) const;

  // k-max selections and relu on/off pattern of a forward pass. Two
  // parameter settings with equal signatures lie on the same smooth piece.
  std::vector<std::size_t> routing_signature(const data::EncodedExample& example) const;

  nlohmann::json to_json() const;
  static Model from_json(const nlohmann::json& doc);
  void save(const std::filesystem::path& path) const;
  static Model load(const std::filesystem::path& path);

 private:
  friend Model build_cnn(const ModelConfig&, std::uint64_t);
  friend Model build_rnn(const ModelConfig&, std::uint64_t);
  friend Model build_model(const ModelConfig&, std::uint64_t);
  struct Forward;

  explicit Model(ModelConfig config);
  std::size_t add_param(std::string name, Shape shape);
  void register_params();
  void initialize(std::uint64_t seed);
  void check_example(const data::EncodedExample& example) const;
  Forward run(const data::EncodedExample& example, ShapeTrace* trace) const;
  void backward(const data::EncodedExample& example, const Forward& fwd, double upstream);

  ModelConfig config_;
  std::vector<ParamSlot> params_;
};

Model build_cnn(const ModelConfig& config, std::uint64_t init_seed);
Model build_rnn(const ModelConfig& config, std::uint64_t init_seed);
Model build_model(const ModelConfig& config, std::uint64_t init_seed);

}  // namespace retweet::model
