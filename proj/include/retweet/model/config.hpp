#pragma once

#include <cstddef>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "retweet/nn/layers.hpp"

namespace retweet::model {

enum class Arch { cnn, rnn };
enum class InputMode { numeric_only, text_only, combined };

Arch parse_arch(std::string_view name);
std::string_view arch_name(Arch arch);
InputMode parse_mode(std::string_view name);
std::string_view mode_name(InputMode mode);

inline bool uses_text(InputMode m) { return m != InputMode::numeric_only; }
inline bool uses_numeric(InputMode m) { return m != InputMode::text_only; }

// Defaults: 100-d embeddings over 30 tokens padded
// by 49 on each side (128 columns), two 64-filter convolutions with 5-max
// pooling, and a 32-unit recurrent layer.
struct ModelConfig {
  Arch arch = Arch::cnn;
  InputMode mode = InputMode::combined;
  std::size_t vocab_size = 2;
  std::size_t embed_dim = 100;
  std::size_t seq_len = 30;
  std::size_t pad = 49;
  std::size_t filters_l1 = 64;
  std::size_t filters_l2 = 64;
  std::size_t filter_width = 3;
  std::size_t k_pool = 5;
  std::size_t rnn_hidden = 32;
  std::size_t numeric_dim = 12;
  nn::Activation cnn_activation = nn::Activation::relu;
  nn::Activation rnn_activation = nn::Activation::tanh;

  // Zero padding before the second convolution and before the numeric
  // branch's first convolution.
  std::size_t inner_pad() const noexcept { return filter_width - 1; }

  // Throws ConfigError when a size is zero or a pooling site is too short.
  void validate() const;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& doc);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Column counts at each stage of a CNN branch for an input of `length`
// positions padded by `first_pad`.
struct CnnGeometry {
  std::size_t padded;       // length + 2 * first_pad
  std::size_t conv1;        // after the first convolution
  std::size_t pool1;        // k
  std::size_t conv2;        // after the second (padded) convolution
  std::size_t pool2;        // min(k, conv2)
  std::size_t folded_rows;  // filters_l2 / 2
  std::size_t flat;         // folded_rows * pool2
};

CnnGeometry cnn_geometry(const ModelConfig& cfg, std::size_t length, std::size_t first_pad);

}  // namespace retweet::model
