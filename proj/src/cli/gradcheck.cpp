#include "retweet/cli/gradcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include <nlohmann/json.hpp>

#include "retweet/model/model.hpp"
#include "retweet/nn/layers.hpp"
#include "retweet/rng.hpp"

namespace retweet::cli {

namespace {

using nn::Activation;

Tensor random_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

double weighted_sum(const Tensor& out, const Tensor& weights) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * weights[i];
  return s;
}

// Compares analytic against central differences of `loss` for every
// coordinate of `x`, which `loss` reads by reference.
void compare(GradCheckEntry& entry, Tensor& x, const Tensor& analytic,
             const std::function<double()>& loss) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + kFiniteDifferenceStep;
    const double up = loss();
    x[i] = saved - kFiniteDifferenceStep;
    const double down = loss();
    x[i] = saved;
    const double numeric = (up - down) / (2.0 * kFiniteDifferenceStep);
    entry.max_rel_error = std::max(entry.max_rel_error, relative_error(analytic[i], numeric));
    ++entry.checked;
  }
}

GradCheckEntry check_conv(Rng& rng) {
  GradCheckEntry e{"conv1d_wide"};
  Tensor input = random_tensor(rng, {3, 7});
  Tensor filters = random_tensor(rng, {4, 3, 3});
  const std::size_t pad = 2;
  const Tensor r = random_tensor(rng, {4, nn::conv_output_length(7, 3, pad)});
  const auto g = nn::conv1d_backward(input, filters, pad, r);
  auto loss = [&] { return weighted_sum(nn::conv1d_wide(input, filters, pad), r); };
  compare(e, input, g.input, loss);
  compare(e, filters, g.filters, loss);
  return e;
}

GradCheckEntry check_kmax(Rng& rng) {
  GradCheckEntry e{"kmax_pool"};
  // Distinct values spaced well beyond the step keep the selection fixed.
  Tensor input({3, 8});
  for (std::size_t r = 0; r < 3; ++r) {
    std::vector<double> vals(8);
    for (std::size_t j = 0; j < 8; ++j) vals[j] = static_cast<double>(j) * 0.1 + rng.uniform(0, 0.05);
    rng.shuffle(vals);
    std::copy(vals.begin(), vals.end(), input.row(r).begin());
  }
  const auto pooled = nn::kmax_pool(input, 3);
  const Tensor r = random_tensor(rng, {3, 3});
  const Tensor g = nn::kmax_backward(pooled.indices, r, 8);
  compare(e, input, g, [&] { return weighted_sum(nn::kmax_pool(input, 3).output, r); });
  return e;
}

GradCheckEntry check_fold(Rng& rng) {
  GradCheckEntry e{"fold"};
  Tensor input = random_tensor(rng, {4, 5});
  const Tensor r = random_tensor(rng, {2, 5});
  compare(e, input, nn::fold_backward(r), [&] { return weighted_sum(nn::fold(input), r); });
  return e;
}

GradCheckEntry check_activation(Rng& rng, Activation kind) {
  GradCheckEntry e{std::string("activation_") + std::string(nn::activation_name(kind))};
  Tensor input = random_tensor(rng, {3, 4}, 0.1, 2.0);
  for (std::size_t i = 0; i < input.size(); i += 2) input[i] = -input[i];  // away from the kink
  const Tensor r = random_tensor(rng, {3, 4});
  compare(e, input, nn::activation_backward(input, r, kind),
          [&] { return weighted_sum(nn::activation(input, kind), r); });
  return e;
}

GradCheckEntry check_dense(Rng& rng) {
  GradCheckEntry e{"dense"};
  Tensor x = random_tensor(rng, {5});
  Tensor w = random_tensor(rng, {3, 5});
  Tensor b = random_tensor(rng, {3});
  const Tensor r = random_tensor(rng, {3});
  const auto g = nn::dense_backward(x, w, r);
  auto loss = [&] { return weighted_sum(nn::dense(x, w, b), r); };
  compare(e, x, g.input, loss);
  compare(e, w, g.weights, loss);
  compare(e, b, g.bias, loss);
  return e;
}

GradCheckEntry check_row_bias(Rng& rng) {
  GradCheckEntry e{"row_bias"};
  const Tensor x = random_tensor(rng, {3, 4});
  Tensor b = random_tensor(rng, {3});
  const Tensor r = random_tensor(rng, {3, 4});
  compare(e, b, nn::row_bias_backward(r), [&] { return weighted_sum(nn::add_row_bias(x, b), r); });
  return e;
}

GradCheckEntry check_embedding(Rng& rng) {
  GradCheckEntry e{"embedding"};
  Tensor table = random_tensor(rng, {6, 4});
  const std::vector<std::size_t> ids = {2, 2, 0, 5};
  const Tensor r = random_tensor(rng, {4, ids.size()});
  Tensor grad(table.shape());
  nn::embedding_backward(ids, r, grad);
  compare(e, table, grad, [&] { return weighted_sum(nn::embedding_lookup(ids, table), r); });
  return e;
}

GradCheckEntry check_rnn(Rng& rng) {
  GradCheckEntry e{"rnn"};
  Tensor x = random_tensor(rng, {3, 5});
  Tensor w_xh = random_tensor(rng, {4, 3}, -0.7, 0.7);
  Tensor w_hh = random_tensor(rng, {4, 4}, -0.7, 0.7);
  Tensor b = random_tensor(rng, {4}, -0.3, 0.3);
  const Tensor r = random_tensor(rng, {4, 5});
  const auto state = nn::rnn_forward(x, w_xh, w_hh, b);
  const auto g = nn::rnn_backward(x, w_xh, w_hh, state, r);
  auto loss = [&] { return weighted_sum(nn::rnn_forward(x, w_xh, w_hh, b).hidden, r); };
  compare(e, x, g.inputs, loss);
  compare(e, w_xh, g.w_xh, loss);
  compare(e, w_hh, g.w_hh, loss);
  compare(e, b, g.bias, loss);
  return e;
}

GradCheckEntry check_loss(Rng& rng) {
  GradCheckEntry e{"loss_mse"};
  Tensor pred = random_tensor(rng, {5}, -2, 2);
  const Tensor target = random_tensor(rng, {5}, -2, 2);
  compare(e, pred, model::loss_mse(pred, target).grad,
          [&] { return model::loss_mse(pred, target).loss; });
  return e;
}

std::vector<data::EncodedExample> miniature_batch(Rng& rng, const model::ModelConfig& cfg,
                                                  std::size_t n) {
  std::vector<data::EncodedExample> batch(n);
  for (auto& ex : batch) {
    for (auto& v : ex.numeric) v = rng.uniform(-1.5, 1.5);
    ex.token_ids.resize(cfg.seq_len);
    const std::size_t length = 2 + rng.below(cfg.seq_len - 1);
    for (std::size_t t = 0; t < cfg.seq_len; ++t)
      ex.token_ids[t] = t < length ? 1 + rng.below(cfg.vocab_size - 1) : 0;
    ex.has_text = true;
    ex.label = rng.uniform(0.0, 3.0);
    ex.has_label = true;
  }
  return batch;
}

GradCheckEntry check_model(Rng& rng, model::Arch arch, model::InputMode mode) {
  GradCheckEntry e{"model_" + std::string(model::arch_name(arch)) + "_" +
                   std::string(model::mode_name(mode))};
  model::Model m = model::build_model(miniature_config(arch, mode), rng.next());
  // Non-zero biases so relu units are not all parked at the same point.
  for (auto& p : m.params())
    if (p.name.ends_with("bias"))
      for (auto& v : p.value.data()) v = rng.uniform(-0.2, 0.2);

  const auto batch = miniature_batch(rng, m.config(), 3);
  std::vector<double> targets;
  for (const auto& ex : batch) targets.push_back(ex.label);

  m.zero_grad();
  m.accumulate_gradients(batch, targets);

  auto signature = [&] {
    std::vector<std::size_t> sig;
    for (const auto& ex : batch) {
      const auto s = m.routing_signature(ex);
      sig.insert(sig.end(), s.begin(), s.end());
    }
    return sig;
  };
  const auto base = signature();

  for (auto& p : m.params()) {
    const Tensor analytic = p.grad;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + kFiniteDifferenceStep;
      const double up = m.loss(batch, targets);
      const bool same_up = signature() == base;
      p.value[i] = saved - kFiniteDifferenceStep;
      const double down = m.loss(batch, targets);
      const bool same_down = signature() == base;
      p.value[i] = saved;
      if (!same_up || !same_down) {
        ++e.skipped;
        continue;
      }
      const double numeric = (up - down) / (2.0 * kFiniteDifferenceStep);
      e.max_rel_error = std::max(e.max_rel_error, relative_error(analytic[i], numeric));
      ++e.checked;
    }
  }
  return e;
}

}  // namespace

double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), kRelativeErrorFloor});
  return std::abs(analytic - numeric) / scale;
}

model::ModelConfig miniature_config(model::Arch arch, model::InputMode mode) {
  model::ModelConfig c;
  c.arch = arch;
  c.mode = mode;
  c.vocab_size = 20;
  c.embed_dim = 8;
  c.seq_len = 6;
  c.pad = 2;
  c.filters_l1 = 4;
  c.filters_l2 = 4;
  c.filter_width = 3;
  c.k_pool = 2;
  c.rnn_hidden = 4;
  return c;
}

bool GradCheckReport::passed() const {
  return !entries.empty() &&
         std::all_of(entries.begin(), entries.end(), [](const GradCheckEntry& e) { return e.passed; });
}

nlohmann::json GradCheckReport::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& e : entries)
    list.push_back({{"name", e.name},
                    {"max_rel_error", e.max_rel_error},
                    {"checked", e.checked},
                    {"skipped", e.skipped},
                    {"passed", e.passed}});
  return {{"entries", list}, {"passed", passed()}};
}

GradCheckReport run_gradcheck(std::uint64_t seed, double threshold) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(sub_seed(seed, "gradcheck"));
  GradCheckReport report;
  report.entries.push_back(check_conv(rng));
  report.entries.push_back(check_kmax(rng));
  report.entries.push_back(check_fold(rng));
  report.entries.push_back(check_activation(rng, Activation::tanh));
  report.entries.push_back(check_activation(rng, Activation::relu));
  report.entries.push_back(check_dense(rng));
  report.entries.push_back(check_row_bias(rng));
  report.entries.push_back(check_embedding(rng));
  report.entries.push_back(check_rnn(rng));
  report.entries.push_back(check_loss(rng));
  for (auto arch : {model::Arch::cnn, model::Arch::rnn})
    for (auto mode : {model::InputMode::numeric_only, model::InputMode::text_only,
                      model::InputMode::combined})
      report.entries.push_back(check_model(rng, arch, mode));

  for (auto& e : report.entries) {
    // A check that had to skip most coordinates proves little.
    e.passed = e.checked > 0 && e.skipped * 10 <= e.checked + e.skipped &&
               e.max_rel_error < threshold;
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace retweet::cli
