// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "retweet/cli/commands.hpp"
#include "retweet/cli/gradcheck.hpp"
#include "retweet/metrics/metrics.hpp"
#include "retweet/nn/layers.hpp"
#include "retweet/optim/adam.hpp"
#include "retweet/optim/trainer.hpp"
#include "retweet/rng.hpp"

using namespace retweet;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kGradcheckSeconds = 30.0;
constexpr double kMetricTolerance = 1e-12;  // relative to max(1, |oracle|)
constexpr std::size_t kMetricPairs = 10000;
constexpr std::size_t kPoolRows = 10000;
constexpr double kAdamTolerance = 1e-9;
constexpr std::size_t kSmokeExamples = 600;
constexpr std::size_t kSmokeEpochs = 100;
constexpr std::size_t kSmokeBatch = 64;
constexpr double kSmokeLearningRate = 0.001;
constexpr double kSmokeLossRatio = 0.10;
constexpr double kSmokeR2 = 0.5;
constexpr double kSmokeSeconds = 300.0;
constexpr std::size_t kOverfitExamples = 16;
constexpr std::size_t kOverfitEpochs = 500;
constexpr std::size_t kOverfitBatch = 16;
constexpr double kOverfitR2 = 0.99;
constexpr std::uint64_t kSeed = 42;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool passed;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.passed) ++failures;
  std::printf("%s  %s: %s\n", o.passed ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* pattern, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), pattern, a);
  return buf;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("retweet_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome gradient_suite() {
  const auto r = cli::run_gradcheck(kSeed);
  double worst = 0.0;
  std::string worst_name;
  for (const auto& e : r.entries)
    if (e.max_rel_error >= worst) {
      worst = e.max_rel_error;
      worst_name = e.name;
    }
  const bool ok = r.passed() && r.entries.size() == 16 && r.seconds < kGradcheckSeconds;
  return {ok, std::to_string(r.entries.size()) + " checks, worst " + worst_name + fmt(" %.3g", worst) +
                  fmt(" (< 1e-4), %.2f s", r.seconds)};
}

Outcome metric_oracles() {
  Rng rng(kSeed);
  double worst = 0.0;
  auto track = [&](double got, double want) {
    worst = std::max(worst, std::fabs(got - want) / std::max(1.0, std::fabs(want)));
  };
  for (std::size_t trial = 0; trial < kMetricPairs; ++trial) {
    const std::size_t n = 2 + rng.below(200);
    std::vector<double> a(n), p(n);
    for (auto& v : a) v = std::round(rng.uniform(0.0, 500.0));
    for (auto& v : p) v = rng.uniform(0.1, 500.0);
    const double mae = metrics::mae(a, p), mbe = metrics::mbe(a, p), rmse = metrics::rmse(a, p);
    track(mae, oracle::mae(a, p));
    track(mbe, oracle::mbe(a, p));
    track(rmse, oracle::rmse(a, p));
    track(metrics::relative(mae, p), oracle::relative(oracle::mae(a, p), p));
    track(metrics::relative(mbe, p), oracle::relative(oracle::mbe(a, p), p));
    track(metrics::relative(rmse, p), oracle::relative(oracle::rmse(a, p), p));
    track(metrics::r2(a, p), oracle::r2(a, p));
  }
  const bool examples = metrics::r2(std::vector<double>{0, 1}, std::vector<double>{1, 0}) == -3.0 &&
                        metrics::mae(std::vector<double>{0, 2}, std::vector<double>{1, 1}) == 1.0 &&
                        metrics::relative(1.0, std::vector<double>{1, 1}) == 100.0;
  return {worst <= kMetricTolerance && examples,
          std::to_string(kMetricPairs) + " pairs x 7 metrics, worst deviation" + fmt(" %.3g", worst) +
              "; worked examples " + (examples ? "exact" : "WRONG")};
}

Outcome pooling_oracles() {
  Rng rng(kSeed);
  std::size_t kmax_bad = 0, ties = 0;
  for (std::size_t trial = 0; trial < kPoolRows; ++trial) {
    const std::size_t len = 1 + rng.below(20), k = 1 + rng.below(len);
    std::vector<double> row(len);
    const bool tied = trial % 2 == 0;
    for (auto& v : row) v = tied ? static_cast<double>(rng.below(3)) : rng.uniform(-5.0, 5.0);
    if (tied) ++ties;
    const auto got = nn::kmax_pool(Tensor({1, len}, row), k);
    const auto want = oracle::kmax_indices(row, k);
    bool same = got.indices == want;
    for (std::size_t j = 0; same && j < k; ++j) same = got.output[j] == row[want[j]];
    if (!same) ++kmax_bad;
  }
  std::size_t fold_bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t rows = 2 * (1 + rng.below(8)), cols = 1 + rng.below(10);
    Tensor x({rows, cols});
    for (auto& v : x.data()) v = rng.uniform(-3.0, 3.0);
    const auto y = nn::fold(x);
    for (std::size_t i = 0; i < rows / 2; ++i)
      for (std::size_t t = 0; t < cols; ++t)
        if (y.at(i, t) != x.at(2 * i, t) + x.at(2 * i + 1, t)) ++fold_bad;
  }
  return {kmax_bad == 0 && fold_bad == 0,
          std::to_string(kPoolRows) + " k-max rows (" + std::to_string(ties) + " with ties), " +
              std::to_string(kmax_bad) + " mismatches; 1000 fold inputs, " + std::to_string(fold_bad) +
              " mismatches"};
}

Outcome adam_step() {
  optim::AdamState state;
  std::vector<model::ParamSlot> params{{"theta", Tensor::vector({0.0}), Tensor::vector({1.0}), true, true}};
  optim::adam_step(state, params);
  const auto& c = state.config;
  const double m_hat = ((1 - c.beta1) * 1.0) / (1 - c.beta1);
  const double v_hat = ((1 - c.beta2) * 1.0) / (1 - c.beta2);
  const double closed = -c.alpha * m_hat / (std::sqrt(v_hat) + c.epsilon);
  const double got = params[0].value[0];
  return {std::fabs(got - closed) <= kAdamTolerance,
          fmt("theta %.10f", got) + fmt(" vs closed form %.10f", closed)};
}

struct SmokeRun {
  double first_loss = 0.0;
  double last_loss = 0.0;
  metrics::MetricsReport test;
  double seconds = 0.0;
};

SmokeRun smoke_run(const cli::RunConfig& base, model::InputMode mode) {
  auto c = base;
  c.model.mode = mode;
  std::ostringstream log;
  const auto start = Clock::now();
  const auto t = cli::cmd_train(c, log);
  SmokeRun r;
  r.seconds = seconds_since(start);
  r.first_loss = t.first_train_loss;
  r.last_loss = t.last_train_loss;
  std::ostringstream out;
  r.test = cli::cmd_evaluate(c, t.checkpoint, "test", out, log);
  return r;
}

Outcome smoke_training() {
  const auto dir = fresh_dir("smoke");
  const auto records = data::synthetic_records(kSmokeExamples, sub_seed(kSeed, "synthetic"));
  {
    std::ofstream out(dir / "synthetic.tsv", std::ios::binary);
    for (const auto& r : records) out << data::format_tsv_line(r, data::default_schema()) << '\n';
  }
  cli::RunConfig c;
  c.dataset = dir / "synthetic.tsv";
  c.out_dir = dir;
  c.seed = kSeed;
  c.model.arch = model::Arch::cnn;
  c.epochs = kSmokeEpochs;
  c.batch = kSmokeBatch;
  c.adam.alpha = kSmokeLearningRate;
  std::ostringstream log;
  cli::cmd_prepare(c, log);

  const auto combined = smoke_run(c, model::InputMode::combined);
  const auto text = smoke_run(c, model::InputMode::text_only);
  const double ratio = combined.last_loss / combined.first_loss;
  const double r2 = combined.test.r2.value_or(-1e300);
  const bool ok = ratio <= kSmokeLossRatio && r2 >= kSmokeR2 && combined.test.mae < text.test.mae &&
                  combined.seconds < kSmokeSeconds;
  return {ok, fmt("loss ratio %.4f (<= 0.10)", ratio) + fmt(", test r2 %.4f (>= 0.5)", r2) +
                  fmt(", test mae combined %.4f", combined.test.mae) + fmt(" < text %.4f", text.test.mae) +
                  fmt(", %.1f s", combined.seconds) + fmt(" (text run %.1f s)", text.seconds)};
}

Outcome overfit_capacity() {
  const auto records = data::synthetic_records(kOverfitExamples, sub_seed(kSeed, "overfit"));
  std::vector<std::size_t> all(records.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto prep = data::fit_preprocessing(records, all);
  const auto examples = data::encode_records(records, prep.scaler, prep.vocab);

  std::string detail;
  bool ok = true;
  for (auto arch : {model::Arch::cnn, model::Arch::rnn}) {
    model::ModelConfig cfg;
    cfg.arch = arch;
    cfg.mode = model::InputMode::combined;
    cfg.vocab_size = prep.vocab.size();
    auto m = model::build_model(cfg, sub_seed(kSeed, "init"));
    optim::FitOptions opts;
    opts.epochs = kOverfitEpochs;
    opts.batch_size = kOverfitBatch;
    opts.shuffle_seed = sub_seed(kSeed, "shuffle");
    std::size_t reached = 0;
    double best_r2 = -1e300;
    optim::fit(m, examples, examples, opts, [&](const optim::EpochLog& e) {
      const double r2 = e.validation->r2.value_or(-1e300);
      best_r2 = std::max(best_r2, r2);
      if (!reached && r2 > kOverfitR2) reached = e.epoch;
    });
    ok = ok && reached > 0;
    if (!detail.empty()) detail += "; ";
    detail += std::string(model::arch_name(arch)) +
              (reached ? " r2 > 0.99 at epoch " + std::to_string(reached) : std::string(" never reached"));
    detail += fmt(" (best %.5f)", best_r2);
  }
  return {ok, detail + ", batch " + std::to_string(kOverfitBatch)};
}

std::string pipeline_outputs(const fs::path& dir) {
  cli::RunConfig c;
  c.dataset = fs::path(RETWEET_TEST_DATA) / "fixture_120.tsv";
  c.out_dir = dir;
  c.seed = kSeed;
  std::ostringstream log, out;
  cli::cmd_prepare(c, log);
  std::string bytes = slurp(dir / cli::kSplitFile) + slurp(dir / cli::kVocabFile) + slurp(dir / cli::kScalerFile);
  std::vector<fs::path> checkpoints;
  for (auto arch : {model::Arch::cnn, model::Arch::rnn}) {
    c.model.arch = arch;
    const auto t = cli::cmd_train(c, log);
    for (const char* split : {"validation", "test"}) cli::cmd_evaluate(c, t.checkpoint, split, out, log);
    bytes += slurp(t.checkpoint) + slurp(t.log);
    if (arch == model::Arch::cnn) checkpoints.push_back(t.checkpoint);
  }
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().filename().string().rfind("report_", 0) == 0) bytes += slurp(entry.path());
  const auto plot = cli::cmd_plot(c, checkpoints, 50, log);
  bytes += slurp(plot.csv) + slurp(plot.svg);
  std::ostringstream preds;
  c.model.arch = model::Arch::cnn;
  cli::cmd_predict(c, checkpoints[0], c.dataset, preds, log);
  return bytes + out.str() + preds.str();
}

Outcome determinism() {
  const auto a = pipeline_outputs(fresh_dir("determinism_a"));
  const auto b = pipeline_outputs(fresh_dir("determinism_b"));
  return {a == b, std::to_string(a.size()) + " bytes of artifacts, checkpoints, logs, reports, predictions and plots " +
                      (a == b ? "identical" : "DIFFER")};
}

Outcome shape_parity() {
  model::ModelConfig cfg;
  cfg.mode = model::InputMode::text_only;
  cfg.vocab_size = 100;
  const auto cnn = model::build_model(cfg, 1);
  data::EncodedExample ex;
  ex.token_ids.assign(cfg.seq_len, 2);
  ex.has_text = true;
  Shape embedding, padded, pool1, fold;
  for (const auto& [name, shape] : cnn.trace(ex)) {
    if (name == "text.embedding") embedding = shape;
    if (name == "text.padded_input") padded = shape;
    if (name == "text.pool1") pool1 = shape;
    if (name == "text.fold") fold = shape;
  }
  cfg.arch = model::Arch::rnn;
  const auto rnn = model::build_model(cfg, 1);
  std::size_t rnn_params = 0;
  for (const auto& p : rnn.params())
    if (p.name.rfind("text.rnn.", 0) == 0) rnn_params += p.value.size();
  const bool ok = embedding == Shape{100, 30} && padded == Shape{100, 128} && pool1 == Shape{64, 5} &&
                  fold.size() == 2 && fold[0] == 32 && rnn_params == 4256;
  return {ok, "embedding " + shape_str(embedding) + ", padded " + shape_str(padded) + ", layer-1 pooled " +
                  shape_str(pool1) + ", folded " + shape_str(fold) + ", rnn text parameters " +
                  std::to_string(rnn_params)};
}

}  // namespace

int main() {
  report("gradient suite", gradient_suite);
  report("metric oracles", metric_oracles);
  report("pooling and folding oracles", pooling_oracles);
  report("adam single step", adam_step);
  report("shape parity", shape_parity);
  report("determinism", determinism);
  report("overfit capacity", overfit_capacity);
  report("smoke training", smoke_training);
  std::printf("%d failed\n", failures);
  return failures == 0 ? 0 : 1;
}
