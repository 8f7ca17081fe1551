#include "retweet/model/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "retweet/errors.hpp"
#include "retweet/nn/layers.hpp"
#include "retweet/rng.hpp"

namespace retweet::model {

namespace {

constexpr std::string_view kCheckpointFormat = "retweet-reg-checkpoint";

struct CnnCache {
  Tensor conv1;
  nn::KMaxResult pool1;
  Tensor pre1;
  Tensor act1;
  Tensor conv2;
  Tensor folded;
  nn::KMaxResult pool2;
  Tensor pre2;
  Tensor act2;
};

struct BranchCache {
  Tensor input;  // (channels x length)
  CnnCache cnn;
  nn::RnnState rnn;
  Tensor flat;
};

std::string key(std::string_view branch, std::string_view leaf) {
  return std::string(branch) + "." + std::string(leaf);
}

void record(ShapeTrace* trace, std::string_view branch, std::string_view what, Shape shape) {
  if (trace) trace->emplace_back(key(branch, what), std::move(shape));
}

}  // namespace

struct Model::Forward {
  BranchCache numeric;
  BranchCache text;
  Tensor features;
  double prediction = 0.0;
};

LossResult loss_mse(const Tensor& pred, const Tensor& target) {
  if (pred.empty()) throw Error("loss_mse: empty batch");
  if (pred.size() != target.size())
    throw DimensionError("loss_mse: " + shape_str(pred.shape()) + " predictions for " +
                         shape_str(target.shape()) + " targets");
  const auto n = static_cast<double>(pred.size());
  LossResult r{0.0, Tensor(pred.shape())};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double diff = pred[i] - target[i];
    r.loss += diff * diff;
    r.grad[i] = 2.0 * diff / n;
  }
  r.loss /= n;
  return r;
}

Model::Model(ModelConfig config) : config_(std::move(config)) {}

std::size_t Model::add_param(std::string name, Shape shape) {
  ParamSlot slot;
  slot.name = std::move(name);
  slot.value = Tensor(shape);
  slot.grad = Tensor(std::move(shape));
  params_.push_back(std::move(slot));
  return params_.size() - 1;
}

void Model::register_params() {
  const auto& c = config_;
  auto add_branch = [&](std::string_view branch, std::size_t channels) {
    if (c.arch == Arch::cnn) {
      add_param(key(branch, "conv1.filters"), {c.filters_l1, channels, c.filter_width});
      add_param(key(branch, "conv1.bias"), {c.filters_l1});
      add_param(key(branch, "conv2.filters"), {c.filters_l2, c.filters_l1, c.filter_width});
      add_param(key(branch, "conv2.bias"), {c.filters_l2 / 2});
    } else {
      add_param(key(branch, "rnn.w_xh"), {c.rnn_hidden, channels});
      add_param(key(branch, "rnn.w_hh"), {c.rnn_hidden, c.rnn_hidden});
      add_param(key(branch, "rnn.bias"), {c.rnn_hidden});
    }
  };
  if (uses_numeric(c.mode)) add_branch("numeric", 1);
  if (uses_text(c.mode)) {
    add_param("text.embedding", {c.vocab_size, c.embed_dim});
    add_branch("text", c.embed_dim);
  }
  add_param("output.weights", {1, dense_input_size()});
  add_param("output.bias", {1});
}

std::size_t Model::dense_input_size() const {
  const auto& c = config_;
  std::size_t n = 0;
  if (c.arch == Arch::cnn) {
    if (uses_numeric(c.mode)) n += cnn_geometry(c, c.numeric_dim, c.inner_pad()).flat;
    if (uses_text(c.mode)) n += cnn_geometry(c, c.seq_len, c.pad).flat;
  } else {
    if (uses_numeric(c.mode)) n += c.rnn_hidden * c.numeric_dim;
    if (uses_text(c.mode)) n += c.rnn_hidden * c.seq_len;
  }
  return n;
}

void Model::initialize(std::uint64_t seed) {
  Rng rng(seed);
  for (auto& p : params_) {
    const auto& shape = p.value.shape();
    const bool is_bias = p.name.ends_with("bias");
    if (is_bias) {
      p.value.fill(0.0);
      continue;
    }
    double limit = 0.05;
    if (!p.name.ends_with("embedding")) {
      // Glorot uniform; conv filters count the receptive field in both fans.
      const double receptive = shape.size() == 3 ? static_cast<double>(shape[2]) : 1.0;
      const double fan_in = static_cast<double>(shape[1]) * receptive;
      const double fan_out = static_cast<double>(shape[0]) * receptive;
      limit = std::sqrt(6.0 / (fan_in + fan_out));
    }
    for (auto& v : p.value.data()) v = rng.uniform(-limit, limit);
  }
}

ParamSlot& Model::param(std::string_view name) {
  for (auto& p : params_)
    if (p.name == name) return p;
  throw Error("model has no parameter '" + std::string(name) + "'");
}

const ParamSlot& Model::param(std::string_view name) const {
  return const_cast<Model*>(this)->param(name);
}

bool Model::has_param(std::string_view name) const {
  return std::any_of(params_.begin(), params_.end(), [&](const ParamSlot& p) { return p.name == name; });
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void Model::check_example(const data::EncodedExample& ex) const {
  if (uses_text(config_.mode) && ex.token_ids.size() != config_.seq_len)
    throw InferenceError("example has " + std::to_string(ex.token_ids.size()) +
                         " token ids, model expects " + std::to_string(config_.seq_len));
}

Model::Forward Model::run(const data::EncodedExample& ex, ShapeTrace* trace) const {
  check_example(ex);
  const auto& c = config_;
  Forward f;

  auto cnn_branch = [&](std::string_view branch, BranchCache& b, std::size_t first_pad) {
    CnnCache& k = b.cnn;
    record(trace, branch, "padded_input", {b.input.dim(0), b.input.dim(1) + 2 * first_pad});
    k.conv1 = nn::conv1d_wide(b.input, param(key(branch, "conv1.filters")).value, first_pad);
    record(trace, branch, "conv1", k.conv1.shape());
    k.pool1 = nn::kmax_pool(k.conv1, c.k_pool);
    record(trace, branch, "pool1", k.pool1.output.shape());
    k.pre1 = nn::add_row_bias(k.pool1.output, param(key(branch, "conv1.bias")).value);
    k.act1 = nn::activation(k.pre1, c.cnn_activation);
    record(trace, branch, "act1", k.act1.shape());
    record(trace, branch, "padded_act1", {k.act1.dim(0), k.act1.dim(1) + 2 * c.inner_pad()});
    k.conv2 = nn::conv1d_wide(k.act1, param(key(branch, "conv2.filters")).value, c.inner_pad());
    record(trace, branch, "conv2", k.conv2.shape());
    k.folded = nn::fold(k.conv2);
    record(trace, branch, "fold", k.folded.shape());
    k.pool2 = nn::kmax_pool(k.folded, std::min(c.k_pool, k.folded.dim(1)));
    record(trace, branch, "pool2", k.pool2.output.shape());
    k.pre2 = nn::add_row_bias(k.pool2.output, param(key(branch, "conv2.bias")).value);
    k.act2 = nn::activation(k.pre2, c.cnn_activation);
    record(trace, branch, "act2", k.act2.shape());
    b.flat = k.act2.reshaped({k.act2.size()});
    record(trace, branch, "flat", b.flat.shape());
    ensure_finite(b.flat, std::string(branch) + " branch output");
  };

  auto rnn_branch = [&](std::string_view branch, BranchCache& b) {
    b.rnn = nn::rnn_forward(b.input, param(key(branch, "rnn.w_xh")).value,
                            param(key(branch, "rnn.w_hh")).value,
                            param(key(branch, "rnn.bias")).value, c.rnn_activation);
    record(trace, branch, "hidden", b.rnn.hidden.shape());
    // Flatten time-major so each step's hidden vector stays contiguous.
    const std::size_t hidden = b.rnn.hidden.dim(0), steps = b.rnn.hidden.dim(1);
    b.flat = Tensor({hidden * steps});
    for (std::size_t t = 0; t < steps; ++t)
      for (std::size_t i = 0; i < hidden; ++i) b.flat[t * hidden + i] = b.rnn.hidden.at(i, t);
    record(trace, branch, "flat", b.flat.shape());
    ensure_finite(b.flat, std::string(branch) + " branch output");
  };

  std::vector<double> features;
  if (uses_numeric(c.mode)) {
    f.numeric.input = Tensor({1, c.numeric_dim}, std::vector<double>(ex.numeric.begin(), ex.numeric.end()));
    record(trace, "numeric", "input", f.numeric.input.shape());
    if (c.arch == Arch::cnn) cnn_branch("numeric", f.numeric, c.inner_pad());
    else rnn_branch("numeric", f.numeric);
    features.insert(features.end(), f.numeric.flat.values().begin(), f.numeric.flat.values().end());
  }
  if (uses_text(c.mode)) {
    f.text.input = nn::embedding_lookup(ex.token_ids, param("text.embedding").value);
    record(trace, "text", "embedding", f.text.input.shape());
    if (c.arch == Arch::cnn) cnn_branch("text", f.text, c.pad);
    else rnn_branch("text", f.text);
    features.insert(features.end(), f.text.flat.values().begin(), f.text.flat.values().end());
  }
  const std::size_t feature_count = features.size();
  f.features = Tensor({feature_count}, std::move(features));
  const Tensor out = nn::dense(f.features, param("output.weights").value, param("output.bias").value);
  record(trace, "output", "prediction", out.shape());
  f.prediction = out[0];
  if (!std::isfinite(f.prediction)) throw NumericError("non-finite prediction");
  return f;
}

void Model::backward(const data::EncodedExample& ex, const Forward& f, double upstream) {
  const auto& c = config_;
  auto accumulate = [&](const std::string& name, const Tensor& g) {
    auto& slot = param(name);
    if (slot.trainable) slot.grad += g;
  };

  ParamSlot& out_w = param("output.weights");
  const auto dense = nn::dense_backward(f.features, out_w.value, Tensor({1}, {upstream}));
  accumulate("output.weights", dense.weights);
  accumulate("output.bias", dense.bias);

  auto cnn_branch = [&](std::string_view branch, const BranchCache& b, std::size_t first_pad,
                        const Tensor& d_flat) -> Tensor {
    const CnnCache& k = b.cnn;
    const Tensor d_act2 = d_flat.reshaped(k.act2.shape());
    const Tensor d_pre2 = nn::activation_backward(k.pre2, d_act2, c.cnn_activation);
    accumulate(key(branch, "conv2.bias"), nn::row_bias_backward(d_pre2));
    const Tensor d_folded = nn::kmax_backward(k.pool2.indices, d_pre2, k.folded.dim(1));
    const Tensor d_conv2 = nn::fold_backward(d_folded);
    const auto& f2 = param(key(branch, "conv2.filters")).value;
    const auto g2 = nn::conv1d_backward(k.act1, f2, c.inner_pad(), d_conv2);
    accumulate(key(branch, "conv2.filters"), g2.filters);
    const Tensor d_pre1 = nn::activation_backward(k.pre1, g2.input, c.cnn_activation);
    accumulate(key(branch, "conv1.bias"), nn::row_bias_backward(d_pre1));
    const Tensor d_conv1 = nn::kmax_backward(k.pool1.indices, d_pre1, k.conv1.dim(1));
    const auto& f1 = param(key(branch, "conv1.filters")).value;
    auto g1 = nn::conv1d_backward(b.input, f1, first_pad, d_conv1);
    accumulate(key(branch, "conv1.filters"), g1.filters);
    return std::move(g1.input);
  };

  auto rnn_branch = [&](std::string_view branch, const BranchCache& b, const Tensor& d_flat) -> Tensor {
    const std::size_t hidden = b.rnn.hidden.dim(0), steps = b.rnn.hidden.dim(1);
    Tensor d_hidden({hidden, steps});
    for (std::size_t t = 0; t < steps; ++t)
      for (std::size_t i = 0; i < hidden; ++i) d_hidden.at(i, t) = d_flat[t * hidden + i];
    auto g = nn::rnn_backward(b.input, param(key(branch, "rnn.w_xh")).value,
                              param(key(branch, "rnn.w_hh")).value, b.rnn, d_hidden,
                              c.rnn_activation);
    accumulate(key(branch, "rnn.w_xh"), g.w_xh);
    accumulate(key(branch, "rnn.w_hh"), g.w_hh);
    accumulate(key(branch, "rnn.bias"), g.bias);
    return std::move(g.inputs);
  };

  std::size_t offset = 0;
  auto slice = [&](std::size_t n) {
    Tensor s({n});
    std::copy_n(dense.input.values().begin() + static_cast<std::ptrdiff_t>(offset), n, s.data().begin());
    offset += n;
    return s;
  };

  if (uses_numeric(c.mode)) {
    const Tensor d_flat = slice(f.numeric.flat.size());
    if (c.arch == Arch::cnn) cnn_branch("numeric", f.numeric, c.inner_pad(), d_flat);
    else rnn_branch("numeric", f.numeric, d_flat);
  }
  if (uses_text(c.mode)) {
    const Tensor d_flat = slice(f.text.flat.size());
    const Tensor d_embed = c.arch == Arch::cnn ? cnn_branch("text", f.text, c.pad, d_flat)
                                               : rnn_branch("text", f.text, d_flat);
    auto& table = param("text.embedding");
    if (table.trainable) nn::embedding_backward(ex.token_ids, d_embed, table.grad);
  }
}

double Model::predict(const data::EncodedExample& example) const {
  return run(example, nullptr).prediction;
}

Tensor Model::forward(std::span<const data::EncodedExample> batch) const {
  if (batch.empty()) throw InferenceError("forward: empty batch");
  Tensor out({batch.size()});
  for (std::size_t i = 0; i < batch.size(); ++i) out[i] = predict(batch[i]);
  return out;
}

double Model::loss(std::span<const data::EncodedExample> batch, std::span<const double> targets) const {
  const Tensor pred = forward(batch);
  return loss_mse(pred, Tensor({targets.size()}, {targets.begin(), targets.end()})).loss;
}

double Model::accumulate_gradients(std::span<const data::EncodedExample> batch,
                                   std::span<const double> targets) {
  if (batch.empty()) throw Error("accumulate_gradients: empty batch");
  if (batch.size() != targets.size())
    throw DimensionError("accumulate_gradients: batch and target sizes differ");
  std::vector<Forward> passes;
  passes.reserve(batch.size());
  Tensor pred({batch.size()});
  for (std::size_t i = 0; i < batch.size(); ++i) {
    passes.push_back(run(batch[i], nullptr));
    pred[i] = passes.back().prediction;
  }
  const auto l = loss_mse(pred, Tensor({targets.size()}, {targets.begin(), targets.end()}));
  for (std::size_t i = 0; i < batch.size(); ++i) backward(batch[i], passes[i], l.grad[i]);
  for (auto& p : params_) {
    if (!p.trainable) continue;
    ensure_finite(p.grad, "gradient of " + p.name);
    p.grad_ready = true;
  }
  return l.loss;
}

void Model::zero_grad() {
  for (auto& p : params_) {
    p.grad.fill(0.0);
    p.grad_ready = false;
  }
}

ShapeTrace Model::trace(const data::EncodedExample& example) const {
  ShapeTrace t;
  run(example, &t);
  return t;
}

std::vector<std::size_t> Model::routing_signature(const data::EncodedExample& example) const {
  const Forward f = run(example, nullptr);
  std::vector<std::size_t> sig;
  auto mask = [&](const Tensor& pre, nn::Activation kind) {
    if (kind != nn::Activation::relu) return;
    for (double v : pre.data()) sig.push_back(v > 0.0 ? 1 : 0);
  };
  for (const BranchCache* b : {&f.numeric, &f.text}) {
    if (b->input.empty()) continue;
    if (config_.arch == Arch::cnn) {
      sig.insert(sig.end(), b->cnn.pool1.indices.begin(), b->cnn.pool1.indices.end());
      sig.insert(sig.end(), b->cnn.pool2.indices.begin(), b->cnn.pool2.indices.end());
      mask(b->cnn.pre1, config_.cnn_activation);
      mask(b->cnn.pre2, config_.cnn_activation);
    } else {
      mask(b->rnn.pre_activation, config_.rnn_activation);
    }
  }
  return sig;
}

nlohmann::json Model::to_json() const {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : params_)
    params.push_back({{"name", p.name}, {"shape", p.value.shape()}, {"values", p.value.values()}});
  return {{"format", kCheckpointFormat},
          {"version", 1},
          {"config", config_.to_json()},
          {"params", params}};
}

Model Model::from_json(const nlohmann::json& doc) {
  if (doc.value("format", "") != kCheckpointFormat || doc.value("version", 0) != 1)
    throw DataError("not a version-1 checkpoint");
  Model m = build_model(ModelConfig::from_json(doc.at("config")), 0);
  const auto& params = doc.at("params");
  if (params.size() != m.params_.size())
    throw DataError("checkpoint has " + std::to_string(params.size()) + " parameters, config implies " +
                    std::to_string(m.params_.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& slot = m.params_[i];
    const auto name = params[i].at("name").get<std::string>();
    const auto shape = params[i].at("shape").get<Shape>();
    if (name != slot.name || shape != slot.value.shape())
      throw DataError("checkpoint parameter '" + name + "' " + shape_str(shape) +
                      " does not match expected '" + slot.name + "' " + shape_str(slot.value.shape()));
    slot.value = Tensor(shape, params[i].at("values").get<std::vector<double>>());
  }
  return m;
}

void Model::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << to_json().dump() << '\n';
}

Model Model::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

Model build_cnn(const ModelConfig& config, std::uint64_t init_seed) {
  if (config.arch != Arch::cnn) throw ConfigError("build_cnn needs arch = cnn");
  config.validate();
  Model m(config);
  m.register_params();
  m.initialize(init_seed);
  return m;
}

Model build_rnn(const ModelConfig& config, std::uint64_t init_seed) {
  if (config.arch != Arch::rnn) throw ConfigError("build_rnn needs arch = rnn");
  config.validate();
  Model m(config);
  m.register_params();
  m.initialize(init_seed);
  return m;
}

Model build_model(const ModelConfig& config, std::uint64_t init_seed) {
  return config.arch == Arch::cnn ? build_cnn(config, init_seed) : build_rnn(config, init_seed);
}

}  // namespace retweet::model
