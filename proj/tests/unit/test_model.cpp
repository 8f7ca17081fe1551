#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include <nlohmann/json.hpp>

#include "retweet/errors.hpp"
#include "retweet/model/model.hpp"
#include "retweet/rng.hpp"

using namespace retweet;
using namespace retweet::model;

namespace {

ModelConfig config(Arch arch, InputMode mode, std::size_t vocab = 50) {
  ModelConfig c;
  c.arch = arch;
  c.mode = mode;
  c.vocab_size = vocab;
  return c;
}

data::EncodedExample random_example(Rng& rng, const ModelConfig& c) {
  data::EncodedExample ex;
  for (auto& v : ex.numeric) v = rng.uniform(-2.0, 2.0);
  ex.token_ids.resize(c.seq_len);
  const std::size_t used = 1 + rng.below(c.seq_len);
  for (std::size_t i = 0; i < used; ++i) ex.token_ids[i] = 1 + rng.below(c.vocab_size - 1);
  ex.has_text = true;
  ex.label = rng.uniform(0.0, 10.0);
  ex.has_label = true;
  return ex;
}

std::map<std::string, Shape> trace_map(const Model& m, const data::EncodedExample& ex) {
  std::map<std::string, Shape> out;
  for (auto& [k, s] : m.trace(ex)) out[k] = s;
  return out;
}

std::size_t count_prefix(const Model& m, const std::string& prefix) {
  std::size_t n = 0;
  for (const auto& p : m.params())
    if (p.name.rfind(prefix, 0) == 0) n += p.value.size();
  return n;
}

}  // namespace

TEST_CASE("text CNN shapes at the default sizes") {
  Rng rng(1);
  const auto c = config(Arch::cnn, InputMode::text_only);
  const auto m = build_model(c, 1);
  const auto t = trace_map(m, random_example(rng, c));
  CHECK(t.at("text.embedding") == Shape{100, 30});
  CHECK(t.at("text.padded_input") == Shape{100, 128});
  CHECK(t.at("text.conv1") == Shape{64, 126});
  CHECK(t.at("text.pool1") == Shape{64, 5});
  CHECK(t.at("text.padded_act1") == Shape{64, 9});
  CHECK(t.at("text.conv2") == Shape{64, 7});
  CHECK(t.at("text.fold") == Shape{32, 7});
  CHECK(t.at("text.pool2") == Shape{32, 5});
  CHECK(t.at("text.flat") == Shape{160});
  CHECK(t.at("output.prediction") == Shape{1});

  const auto g = cnn_geometry(c, 30, 49);
  CHECK(g.padded == 128);
  CHECK(g.pool1 == 5);
  CHECK(g.folded_rows == 32);
  CHECK(g.flat == 160);
}

TEST_CASE("RNN parameter counts and flatten lengths") {
  const auto text = build_model(config(Arch::rnn, InputMode::text_only), 1);
  CHECK(count_prefix(text, "text.rnn.") == 100 * 32 + 32 * 32 + 32);
  CHECK(count_prefix(text, "text.rnn.") == 4256);
  CHECK(text.dense_input_size() == 960);

  const auto numeric = build_model(config(Arch::rnn, InputMode::numeric_only), 1);
  CHECK(numeric.dense_input_size() == 12 * 32);

  const auto combined = build_model(config(Arch::rnn, InputMode::combined), 1);
  CHECK(combined.dense_input_size() == 1344);
  CHECK(combined.param("output.weights").value.shape() == Shape{1, 1344});
}

TEST_CASE("input mode selects the branches") {
  for (auto arch : {Arch::cnn, Arch::rnn}) {
    const auto n = build_model(config(arch, InputMode::numeric_only), 1);
    const auto t = build_model(config(arch, InputMode::text_only), 1);
    const auto c = build_model(config(arch, InputMode::combined), 1);
    CHECK(count_prefix(n, "text.") == 0);
    CHECK(count_prefix(n, "numeric.") > 0);
    CHECK(count_prefix(t, "numeric.") == 0);
    CHECK(t.has_param("text.embedding"));
    CHECK(count_prefix(c, "numeric.") == count_prefix(n, "numeric."));
    CHECK(count_prefix(c, "text.") == count_prefix(t, "text."));
    CHECK(c.dense_input_size() == n.dense_input_size() + t.dense_input_size());
  }
}

TEST_CASE("batch forward returns one prediction per example") {
  Rng rng(2);
  const auto c = config(Arch::cnn, InputMode::combined);
  const auto m = build_model(c, 3);
  std::vector<data::EncodedExample> batch;
  for (int i = 0; i < 64; ++i) batch.push_back(random_example(rng, c));
  const auto out = m.forward(batch);
  CHECK(out.shape() == Shape{64});
  for (std::size_t i = 0; i < 64; ++i) CHECK(out[i] == m.predict(batch[i]));

  std::vector<data::EncodedExample> reversed(batch.rbegin(), batch.rend());
  const auto rev = m.forward(reversed);
  for (std::size_t i = 0; i < 64; ++i) CHECK(rev[i] == out[63 - i]);
}

TEST_CASE("all-zero parameters predict the output bias") {
  Rng rng(3);
  for (auto arch : {Arch::cnn, Arch::rnn}) {
    const auto c = config(arch, InputMode::combined);
    auto m = build_model(c, 4);
    for (auto& p : m.params()) p.value.fill(0.0);
    m.param("output.bias").value[0] = 2.5;
    for (int i = 0; i < 5; ++i) CHECK(m.predict(random_example(rng, c)) == 2.5);
  }
}

TEST_CASE("combined features are numeric block then text block") {
  Rng rng(4);
  for (auto arch : {Arch::cnn, Arch::rnn}) {
    auto comb = build_model(config(arch, InputMode::combined), 5);
    auto num = build_model(config(arch, InputMode::numeric_only), 6);
    auto txt = build_model(config(arch, InputMode::text_only), 7);
    for (auto& p : num.params())
      if (p.name.rfind("numeric.", 0) == 0) p.value = comb.param(p.name).value;
    for (auto& p : txt.params())
      if (p.name.rfind("text.", 0) == 0) p.value = comb.param(p.name).value;

    const auto& w = comb.param("output.weights").value;
    const std::size_t nn = num.dense_input_size();
    auto& wn = num.param("output.weights").value;
    auto& wt = txt.param("output.weights").value;
    for (std::size_t i = 0; i < nn; ++i) wn[i] = w[i];
    for (std::size_t i = 0; i < wt.size(); ++i) wt[i] = w[nn + i];
    num.param("output.bias").value[0] = 0.0;
    txt.param("output.bias").value[0] = comb.param("output.bias").value[0];

    const auto ex = random_example(rng, comb.config());
    CHECK(comb.predict(ex) == doctest::Approx(num.predict(ex) + txt.predict(ex)).epsilon(1e-12));
  }
}

TEST_CASE("mse loss") {
  CHECK(loss_mse(Tensor::vector({1, 2}), Tensor::vector({1, 2})).loss == 0.0);
  const auto r = loss_mse(Tensor::vector({0, 2}), Tensor::vector({1, 1}));
  CHECK(r.loss == 1.0);
  CHECK(r.grad == Tensor::vector({-1, 1}));

  Rng rng(5);
  Tensor p({6}), t({6});
  for (auto& v : p.data()) v = rng.uniform(-3, 3);
  for (auto& v : t.data()) v = rng.uniform(-3, 3);
  const auto g = loss_mse(p, t).grad;
  for (std::size_t i = 0; i < 6; ++i) {
    const double h = 1e-6, saved = p[i];
    p[i] = saved + h;
    const double up = loss_mse(p, t).loss;
    p[i] = saved - h;
    const double down = loss_mse(p, t).loss;
    p[i] = saved;
    CHECK(g[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-8));
  }
}

TEST_CASE("accumulate_gradients marks slots ready and zero_grad clears them") {
  Rng rng(6);
  const auto c = config(Arch::rnn, InputMode::combined);
  auto m = build_model(c, 8);
  std::vector<data::EncodedExample> batch{random_example(rng, c), random_example(rng, c)};
  const std::vector<double> targets{1.0, 2.0};
  const double loss = m.accumulate_gradients(batch, targets);
  CHECK(loss == doctest::Approx(m.loss(batch, targets)).epsilon(1e-15));
  for (const auto& p : m.params()) CHECK(p.grad_ready);
  m.zero_grad();
  for (const auto& p : m.params()) {
    CHECK_FALSE(p.grad_ready);
    for (double v : p.grad.values()) CHECK(v == 0.0);
  }
}

TEST_CASE("initialization is seeded") {
  const auto c = config(Arch::cnn, InputMode::combined);
  CHECK(build_model(c, 1).to_json() == build_model(c, 1).to_json());
  CHECK(build_model(c, 1).to_json() != build_model(c, 2).to_json());
  const auto m = build_model(c, 1);
  for (double v : m.param("output.bias").value.values()) CHECK(v == 0.0);
}

TEST_CASE("checkpoint round trip") {
  Rng rng(7);
  for (auto arch : {Arch::cnn, Arch::rnn}) {
    const auto c = config(arch, InputMode::combined);
    const auto m = build_model(c, 9);
    const auto path = std::filesystem::temp_directory_path() / "retweet_test_checkpoint.json";
    m.save(path);
    const auto loaded = Model::load(path);
    CHECK(loaded.config() == m.config());
    CHECK(loaded.to_json() == m.to_json());
    const auto ex = random_example(rng, c);
    CHECK(loaded.predict(ex) == m.predict(ex));
  }
}

TEST_CASE("checkpoint loading validates shapes and format") {
  auto doc = build_model(config(Arch::cnn, InputMode::text_only), 1).to_json();
  auto bad_format = doc;
  bad_format["format"] = "other";
  CHECK_THROWS(Model::from_json(bad_format));
  auto bad_vocab = doc;
  bad_vocab["config"]["vocab_size"] = 51;
  CHECK_THROWS(Model::from_json(bad_vocab));
  CHECK_THROWS(Model::load("/nonexistent/model.json"));
}

TEST_CASE("inference input validation") {
  const auto c = config(Arch::cnn, InputMode::text_only);
  const auto m = build_model(c, 1);
  data::EncodedExample ex;
  ex.token_ids.assign(29, 2);
  CHECK_THROWS_AS(m.predict(ex), InferenceError);
  ex.token_ids.assign(30, 50);
  CHECK_THROWS_AS(m.predict(ex), LookupError);
}

TEST_CASE("config validation and names") {
  auto c = config(Arch::cnn, InputMode::combined);
  CHECK_NOTHROW(c.validate());
  c.filter_width = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = config(Arch::cnn, InputMode::combined);
  c.filters_l2 = 63;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(parse_arch("rnn") == Arch::rnn);
  CHECK(parse_mode("text") == InputMode::text_only);
  CHECK(parse_mode("numeric") == InputMode::numeric_only);
  CHECK(parse_mode("combined") == InputMode::combined);
  CHECK_THROWS_AS(parse_arch("lstm"), ConfigError);
  CHECK(ModelConfig::from_json(c.to_json()) == c);
}
