#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "retweet/cli/commands.hpp"
#include "retweet/cli/gradcheck.hpp"
#include "retweet/cli/run_config.hpp"
#include "retweet/data/dataset.hpp"
#include "retweet/errors.hpp"
#include "retweet/rng.hpp"

namespace {

namespace fs = std::filesystem;
using namespace retweet;

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct Overrides {
  std::string config;
  std::string dataset;
  std::string out;
  std::string schema;
  std::optional<std::string> arch;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch;
  std::optional<double> lr;
  std::optional<std::string> transform;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "RunConfig JSON file");
  cmd->add_option("--data", o.dataset, "Dataset TSV");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--schema", o.schema, "Column-order sidecar JSON");
  cmd->add_option("--seed", o.seed, "Master seed");
}

void add_model(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--arch", o.arch, "cnn or rnn");
  cmd->add_option("--mode", o.mode, "numeric, text or combined");
  cmd->add_option("--epochs", o.epochs, "Training epochs");
  cmd->add_option("--batch", o.batch, "Mini-batch size");
  cmd->add_option("--lr", o.lr, "Adam step size");
  cmd->add_option("--target-transform", o.transform, "none or log1p");
}

cli::RunConfig resolve(const Overrides& o) {
  cli::RunConfig c = o.config.empty() ? cli::RunConfig{} : cli::RunConfig::load(o.config);
  if (!o.dataset.empty()) c.dataset = o.dataset;
  if (!o.out.empty()) c.out_dir = o.out;
  if (!o.schema.empty()) c.schema = fs::path(o.schema);
  if (o.seed) c.seed = *o.seed;
  if (o.arch) c.model.arch = model::parse_arch(*o.arch);
  if (o.mode) c.model.mode = model::parse_mode(*o.mode);
  if (o.epochs) c.epochs = *o.epochs;
  if (o.batch) c.batch = *o.batch;
  if (o.lr) c.adam.alpha = *o.lr;
  if (o.transform) c.target_transform = optim::parse_target_transform(*o.transform);
  cli::apply_environment(c);
  c.model.validate();
  return c;
}

int run(int argc, char** argv) {
  CLI::App app{"Retweet-count regression with CNN and RNN models"};
  app.require_subcommand(1);
  Overrides o;

  auto* prepare = app.add_subcommand("prepare", "Build vocabulary, scaler and split index");
  add_common(prepare, o);

  auto* train = app.add_subcommand("train", "Train a model and keep the best validation checkpoint");
  add_common(train, o);
  add_model(train, o);

  std::string checkpoint;
  std::string split = "test";
  auto* evaluate = app.add_subcommand("evaluate", "Print the seven metrics for one split");
  add_common(evaluate, o);
  add_model(evaluate, o);
  evaluate->add_option("--checkpoint", checkpoint, "Checkpoint (default: from --arch/--mode)");
  evaluate->add_option("--split", split, "train, validation or test");

  std::string input;
  std::string output;
  auto* predict = app.add_subcommand("predict", "Predict retweet counts for a TSV");
  add_common(predict, o);
  add_model(predict, o);
  predict->add_option("--checkpoint", checkpoint, "Checkpoint (default: from --arch/--mode)");
  predict->add_option("--input", input, "Input TSV, labels optional")->required();
  predict->add_option("--output", output, "Output TSV (default: stdout)");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  add_common(gradcheck, o);
  bool gradcheck_json = false;
  gradcheck->add_flag("--json", gradcheck_json, "Print the report as JSON");

  std::vector<std::string> checkpoints;
  std::size_t n = 50;
  auto* plot = app.add_subcommand("plot", "Actual vs predicted CSV and SVG for sampled test tweets");
  add_common(plot, o);
  add_model(plot, o);
  plot->add_option("--checkpoint", checkpoints, "One checkpoint per input mode");
  plot->add_option("--n", n, "Number of test tweets");

  std::size_t synth_rows = 600;
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset TSV");
  add_common(synth, o);
  synth->add_option("--rows", synth_rows, "Number of rows");
  synth->add_option("--output", output, "Output TSV (default: stdout)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  const cli::RunConfig config = resolve(o);
  const auto default_checkpoint = [&] {
    return checkpoint.empty() ? cli::checkpoint_path(config) : fs::path(checkpoint);
  };

  if (*prepare) {
    const auto s = cli::cmd_prepare(config, std::cerr);
    std::cout << s.to_json().dump(2) << '\n';
  } else if (*train) {
    const auto s = cli::cmd_train(config, std::cerr);
    nlohmann::json doc{{"checkpoint", s.checkpoint.string()}, {"log", s.log.string()},
                       {"best_epoch", s.best_epoch}, {"first_train_loss", s.first_train_loss},
                       {"last_train_loss", s.last_train_loss}};
    if (s.best_validation) doc["best_validation"] = s.best_validation->to_json();
    std::cout << doc.dump(2) << '\n';
  } else if (*evaluate) {
    cli::cmd_evaluate(config, default_checkpoint(), split, std::cout, std::cerr);
  } else if (*predict) {
    if (output.empty()) {
      cli::cmd_predict(config, default_checkpoint(), input, std::cout, std::cerr);
    } else {
      std::ofstream out(output, std::ios::binary);
      if (!out) throw Error("cannot write " + output);
      cli::cmd_predict(config, default_checkpoint(), input, out, std::cerr);
    }
  } else if (*gradcheck) {
    const auto report = cli::run_gradcheck(config.seed);
    if (gradcheck_json) {
      std::cout << report.to_json().dump(2) << '\n';
    } else {
      for (const auto& e : report.entries) {
        std::cout << (e.passed ? "ok    " : "FAIL  ") << e.name << "  max_rel_error " << e.max_rel_error
                  << "  checked " << e.checked << "  skipped " << e.skipped << '\n';
      }
      std::cout << "elapsed " << report.seconds << " s\n";
    }
    return report.passed() ? kOk : kNumeric;
  } else if (*plot) {
    if (checkpoints.empty()) checkpoints.push_back(cli::checkpoint_path(config).string());
    std::vector<fs::path> paths(checkpoints.begin(), checkpoints.end());
    cli::cmd_plot(config, paths, n, std::cerr);
  } else if (*synth) {
    const auto records = data::synthetic_records(synth_rows, sub_seed(config.seed, "synthetic"));
    const auto schema = cli::resolve_schema(config);
    std::ofstream out(output, std::ios::binary);
    if (!out) throw Error("cannot write " + output);
    for (const auto& r : records) out << data::format_tsv_line(r, schema) << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const retweet::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const retweet::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
}
