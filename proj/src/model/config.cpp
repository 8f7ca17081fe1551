#include "retweet/model/config.hpp"

#include <algorithm>
#include <string>

#include <nlohmann/json.hpp>

#include "retweet/data/features.hpp"
#include "retweet/errors.hpp"

namespace retweet::model {

Arch parse_arch(std::string_view name) {
  if (name == "cnn") return Arch::cnn;
  if (name == "rnn") return Arch::rnn;
  throw ConfigError("unknown architecture '" + std::string(name) + "' (expected cnn or rnn)");
}

std::string_view arch_name(Arch arch) { return arch == Arch::cnn ? "cnn" : "rnn"; }

InputMode parse_mode(std::string_view name) {
  if (name == "numeric_only" || name == "numeric") return InputMode::numeric_only;
  if (name == "text_only" || name == "text") return InputMode::text_only;
  if (name == "combined") return InputMode::combined;
  throw ConfigError("unknown input mode '" + std::string(name) +
                    "' (expected numeric_only, text_only or combined)");
}

std::string_view mode_name(InputMode mode) {
  switch (mode) {
    case InputMode::numeric_only: return "numeric_only";
    case InputMode::text_only: return "text_only";
    case InputMode::combined: return "combined";
  }
  return "combined";
}

CnnGeometry cnn_geometry(const ModelConfig& cfg, std::size_t length, std::size_t first_pad) {
  CnnGeometry g{};
  g.padded = length + 2 * first_pad;
  if (cfg.filter_width > g.padded)
    throw ConfigError("filter width " + std::to_string(cfg.filter_width) +
                      " exceeds padded input length " + std::to_string(g.padded));
  g.conv1 = g.padded - cfg.filter_width + 1;
  if (cfg.k_pool > g.conv1)
    throw ConfigError("k_pool " + std::to_string(cfg.k_pool) + " exceeds first-layer length " +
                      std::to_string(g.conv1));
  g.pool1 = cfg.k_pool;
  g.conv2 = g.pool1 + 2 * cfg.inner_pad() - cfg.filter_width + 1;
  g.pool2 = std::min(cfg.k_pool, g.conv2);
  g.folded_rows = cfg.filters_l2 / 2;
  g.flat = g.folded_rows * g.pool2;
  return g;
}

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(embed_dim, "embed_dim");
  positive(seq_len, "seq_len");
  positive(filters_l1, "filters_l1");
  positive(filters_l2, "filters_l2");
  positive(filter_width, "filter_width");
  positive(k_pool, "k_pool");
  positive(rnn_hidden, "rnn_hidden");
  if (vocab_size < 2) throw ConfigError("vocab_size must include the two reserved ids");
  if (numeric_dim != data::kNumericFeatureCount)
    throw ConfigError("numeric_dim must be " + std::to_string(data::kNumericFeatureCount));
  if (arch == Arch::cnn) {
    if (filters_l2 % 2 != 0) throw ConfigError("filters_l2 must be even for folding");
    if (uses_text(mode)) cnn_geometry(*this, seq_len, pad);
    if (uses_numeric(mode)) cnn_geometry(*this, numeric_dim, inner_pad());
  }
}

nlohmann::json ModelConfig::to_json() const {
  return {{"arch", arch_name(arch)},
          {"mode", mode_name(mode)},
          {"vocab_size", vocab_size},
          {"embed_dim", embed_dim},
          {"seq_len", seq_len},
          {"pad", pad},
          {"filters_l1", filters_l1},
          {"filters_l2", filters_l2},
          {"filter_width", filter_width},
          {"k_pool", k_pool},
          {"rnn_hidden", rnn_hidden},
          {"numeric_dim", numeric_dim},
          {"cnn_activation", nn::activation_name(cnn_activation)},
          {"rnn_activation", nn::activation_name(rnn_activation)}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& doc) {
  ModelConfig c;
  if (doc.contains("arch")) c.arch = parse_arch(doc["arch"].get<std::string>());
  if (doc.contains("mode")) c.mode = parse_mode(doc["mode"].get<std::string>());
  auto read = [&](const char* key, std::size_t& field) {
    if (doc.contains(key)) field = doc[key].get<std::size_t>();
  };
  read("vocab_size", c.vocab_size);
  read("embed_dim", c.embed_dim);
  read("seq_len", c.seq_len);
  read("pad", c.pad);
  read("filters_l1", c.filters_l1);
  read("filters_l2", c.filters_l2);
  read("filter_width", c.filter_width);
  read("k_pool", c.k_pool);
  read("rnn_hidden", c.rnn_hidden);
  read("numeric_dim", c.numeric_dim);
  if (doc.contains("cnn_activation"))
    c.cnn_activation = nn::parse_activation(doc["cnn_activation"].get<std::string>());
  if (doc.contains("rnn_activation"))
    c.rnn_activation = nn::parse_activation(doc["rnn_activation"].get<std::string>());
  return c;
}

}  // namespace retweet::model
