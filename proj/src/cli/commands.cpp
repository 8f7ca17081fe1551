#include "retweet/cli/commands.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include <nlohmann/json.hpp>

#include "retweet/cli/svg_plot.hpp"
#include "retweet/errors.hpp"
#include "retweet/optim/trainer.hpp"
#include "retweet/rng.hpp"

namespace retweet::cli {

namespace fs = std::filesystem;

namespace {

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string() + " (run prepare first?)");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const nlohmann::json& doc) { write_text(path, doc.dump(2) + "\n"); }

std::string fixed(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string model_tag(const model::ModelConfig& m) {
  return std::string(model::arch_name(m.arch)) + "_" + std::string(model::mode_name(m.mode));
}

// Checks that a checkpoint fits the prepared artifacts.
void check_compatible(const model::Model& m, const PreparedData& prepared) {
  const auto& cfg = m.config();
  if (model::uses_text(cfg.mode) && cfg.vocab_size != prepared.vocab.size())
    throw DataError("checkpoint vocabulary size " + std::to_string(cfg.vocab_size) +
                    " differs from prepared vocabulary size " + std::to_string(prepared.vocab.size()));
}

}  // namespace

fs::path checkpoint_path(const RunConfig& config) {
  return config.out_dir / ("model_" + model_tag(config.model) + ".json");
}

fs::path train_log_path(const RunConfig& config) {
  return config.out_dir / ("train_" + model_tag(config.model) + ".jsonl");
}

data::Schema resolve_schema(const RunConfig& config) {
  return config.schema ? data::load_schema_sidecar(*config.schema) : data::default_schema();
}

const std::vector<std::size_t>& PreparedData::ordinals(std::string_view name) const {
  if (name == "train") return split.train;
  if (name == "validation" || name == "valid") return split.validation;
  if (name == "test") return split.test;
  throw ConfigError("unknown split '" + std::string(name) + "' (expected train, validation or test)");
}

PreparedData load_prepared(const RunConfig& config) {
  if (config.dataset.empty()) throw ConfigError("no dataset path configured");
  PreparedData p;
  p.records = data::read_tsv(config.dataset, resolve_schema(config)).records;
  p.split = data::SplitIndex::from_json(read_json(config.out_dir / kSplitFile));
  p.vocab = data::Vocabulary::from_json(read_json(config.out_dir / kVocabFile));
  p.scaler = data::Scaler::from_json(read_json(config.out_dir / kScalerFile));
  const std::size_t indexed = p.split.train.size() + p.split.validation.size() + p.split.test.size();
  if (indexed != p.records.size())
    throw DataError("split index covers " + std::to_string(indexed) + " records but " +
                    config.dataset.string() + " has " + std::to_string(p.records.size()) +
                    " valid records; rerun prepare");
  return p;
}

std::vector<data::EncodedExample> encode_split(const PreparedData& prepared, std::string_view split_name,
                                               const model::ModelConfig& model, std::size_t* skipped) {
  std::vector<data::EncodedExample> out;
  std::size_t missing = 0;
  for (auto i : prepared.ordinals(split_name)) {
    const auto& r = prepared.records.at(i);
    if (model::uses_text(model.mode) && !r.text) {
      ++missing;
      continue;
    }
    out.push_back(data::encode_record(r, prepared.scaler, prepared.vocab, model.seq_len));
  }
  if (skipped) *skipped = missing;
  return out;
}

nlohmann::json PrepareSummary::to_json() const {
  return {{"records", records}, {"dropped", dropped},         {"train", train},
          {"validation", validation}, {"test", test},          {"vocab_size", vocab_size}};
}

PrepareSummary cmd_prepare(const RunConfig& config, std::ostream& log) {
  if (config.dataset.empty()) throw ConfigError("no dataset path configured");
  const auto loaded = data::read_tsv(config.dataset, resolve_schema(config));
  for (const auto& problem : loaded.problems) log << "skipped " << problem << '\n';
  if (loaded.records.empty())
    throw DataError("no valid records in " + config.dataset.string());

  const auto split = data::split_indices(loaded.records.size(), sub_seed(config.seed, "split"),
                                         config.split);
  const auto prep = data::fit_preprocessing(loaded.records, split.train);

  fs::create_directories(config.out_dir);
  write_json(config.out_dir / kVocabFile, prep.vocab.to_json());
  write_json(config.out_dir / kScalerFile, prep.scaler.to_json());
  write_json(config.out_dir / kSplitFile, split.to_json());

  PrepareSummary s{loaded.records.size(), loaded.dropped,     split.train.size(),
                   split.validation.size(), split.test.size(), prep.vocab.size()};
  log << "prepare: " << s.records << " records (" << s.dropped << " dropped), split " << s.train
      << "/" << s.validation << "/" << s.test << ", vocabulary " << s.vocab_size << '\n';
  return s;
}

TrainSummary cmd_train(const RunConfig& config, std::ostream& log) {
  if (config.epochs == 0) throw ConfigError("epochs must be positive");
  if (config.batch == 0) throw ConfigError("batch size must be positive");
  const PreparedData prepared = load_prepared(config);
  model::ModelConfig mcfg = config.model;
  mcfg.vocab_size = prepared.vocab.size();

  std::size_t skipped_train = 0, skipped_valid = 0;
  const auto train = encode_split(prepared, "train", mcfg, &skipped_train);
  const auto valid = encode_split(prepared, "validation", mcfg, &skipped_valid);
  if (skipped_train + skipped_valid > 0)
    log << "train: left out " << skipped_train + skipped_valid << " records without text\n";
  if (train.empty()) throw DataError("training split is empty");

  model::Model m = model::build_model(mcfg, sub_seed(config.seed, "init"));
  optim::FitOptions opts;
  opts.epochs = config.epochs;
  opts.batch_size = config.batch;
  opts.shuffle_seed = sub_seed(config.seed, "shuffle");
  opts.adam = config.adam;
  opts.transform = config.target_transform;

  TrainSummary summary;
  summary.checkpoint = checkpoint_path(config);
  summary.log = train_log_path(config);
  fs::create_directories(config.out_dir);
  std::ofstream log_file(summary.log, std::ios::binary);
  if (!log_file) throw Error("cannot write " + summary.log.string());

  const auto result = optim::fit(m, train, valid, opts, [&](const optim::EpochLog& e) {
    log_file << e.to_json().dump() << '\n';
    log << "epoch " << e.epoch << " train_loss " << e.train_loss;
    if (e.validation) log << " valid_mae " << e.validation->mae;
    log << '\n';
  });

  result.best.save(summary.checkpoint);
  summary.best_epoch = result.best_epoch;
  if (!result.log.empty()) {
    summary.first_train_loss = result.log.front().train_loss;
    summary.last_train_loss = result.log.back().train_loss;
    if (result.best_epoch > 0) summary.best_validation = result.log[result.best_epoch - 1].validation;
  }
  log << "train: best epoch " << summary.best_epoch << ", checkpoint " << summary.checkpoint.string()
      << '\n';
  return summary;
}

metrics::MetricsReport cmd_evaluate(const RunConfig& config, const fs::path& checkpoint,
                                    std::string_view split_name, std::ostream& out, std::ostream& log) {
  const PreparedData prepared = load_prepared(config);
  const model::Model m = model::Model::load(checkpoint);
  check_compatible(m, prepared);
  std::size_t skipped = 0;
  const auto examples = encode_split(prepared, split_name, m.config(), &skipped);
  if (skipped) log << "evaluate: left out " << skipped << " records without text\n";
  if (examples.empty()) throw DataError("split '" + std::string(split_name) + "' is empty");

  const auto report = optim::evaluate(m, examples, config.target_transform);
  const auto doc = report.to_json();
  out << doc.dump(2) << '\n';
  write_json(config.out_dir /
                 ("report_" + model_tag(m.config()) + "_" + std::string(split_name) + ".json"),
             doc);
  for (const auto& w : report.warnings) log << "warning: " << w << '\n';
  return report;
}

std::vector<PredictRow> cmd_predict(const RunConfig& config, const fs::path& checkpoint,
                                    const fs::path& input, std::ostream& out, std::ostream& log) {
  const model::Model m = model::Model::load(checkpoint);
  const auto vocab = data::Vocabulary::from_json(read_json(config.out_dir / kVocabFile));
  const auto scaler = data::Scaler::from_json(read_json(config.out_dir / kScalerFile));
  if (model::uses_text(m.config().mode) && m.config().vocab_size != vocab.size())
    throw DataError("checkpoint vocabulary size " + std::to_string(m.config().vocab_size) +
                    " differs from " + std::to_string(vocab.size()));

  const auto schema = resolve_schema(config);
  std::ifstream in(input);
  if (!in) throw DataError("cannot open " + input.string());
  data::ParseOptions opts;
  opts.label_optional = true;

  std::vector<PredictRow> rows;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (number == 1 && line.rfind(schema.columns.front() + "\t", 0) == 0) continue;  // header
    const auto record = data::parse_tsv_line(line, schema, number, opts);
    PredictRow row{record.tweet_id, std::nullopt};
    if (model::uses_text(m.config().mode) && !record.text) {
      log << "warning: line " << number << " (" << record.tweet_id
          << "): no text for a text-mode model, prediction left null\n";
    } else {
      const auto ex = data::encode_record(record, scaler, vocab, m.config().seq_len);
      row.predicted = optim::from_target(m.predict(ex), config.target_transform);
    }
    rows.push_back(std::move(row));
  }

  out << "tweet_id\tpredicted_retweets\n";
  for (const auto& r : rows) out << r.tweet_id << '\t' << (r.predicted ? fixed(*r.predicted) : "null") << '\n';
  return rows;
}

PlotSummary cmd_plot(const RunConfig& config, const std::vector<fs::path>& checkpoints, std::size_t n,
                     std::ostream& log) {
  if (checkpoints.empty()) throw ConfigError("plot needs at least one checkpoint");
  const PreparedData prepared = load_prepared(config);

  std::map<model::InputMode, model::Model> models;
  for (const auto& path : checkpoints) {
    model::Model m = model::Model::load(path);
    check_compatible(m, prepared);
    const auto mode = m.config().mode;
    if (models.contains(mode))
      throw ConfigError("two checkpoints for mode " + std::string(model::mode_name(mode)));
    models.emplace(mode, std::move(m));
  }

  std::vector<std::size_t> sample = prepared.split.test;
  if (sample.empty()) throw DataError("test split is empty");
  if (n > sample.size()) {
    log << "warning: requested " << n << " tweets but the test split has " << sample.size()
        << "; plotting all of them\n";
    n = sample.size();
  }
  Rng rng(sub_seed(config.seed, "plot"));
  rng.shuffle(sample);
  sample.resize(n);

  static constexpr std::array<std::pair<model::InputMode, const char*>, 3> kColumns = {{
      {model::InputMode::numeric_only, "predicted_numeric"},
      {model::InputMode::text_only, "predicted_text"},
      {model::InputMode::combined, "predicted_combined"},
  }};
  static constexpr std::array<const char*, 3> kColors = {"#1f77b4", "#2ca02c", "#d62728"};

  std::vector<Series> series{{"actual", "#222222", {}}};
  PlotSummary summary;
  summary.columns = {"index", "actual"};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    if (!models.contains(kColumns[c].first)) continue;
    summary.columns.emplace_back(kColumns[c].second);
    series.push_back({kColumns[c].second, kColors[c], {}});
  }

  std::string csv;
  for (std::size_t c = 0; c < summary.columns.size(); ++c) csv += (c ? "," : "") + summary.columns[c];
  csv += '\n';
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const auto& record = prepared.records.at(sample[i]);
    const double actual = static_cast<double>(record.retweets.value_or(0));
    series[0].values.emplace_back(actual);
    csv += std::to_string(i) + "," + fixed(actual);
    std::size_t s = 1;
    for (const auto& [mode, column] : kColumns) {
      const auto it = models.find(mode);
      if (it == models.end()) continue;
      std::optional<double> pred;
      if (!model::uses_text(mode) || record.text) {
        const auto ex = data::encode_record(record, prepared.scaler, prepared.vocab,
                                            it->second.config().seq_len);
        pred = optim::from_target(it->second.predict(ex), config.target_transform);
      }
      series[s++].values.push_back(pred);
      csv += "," + (pred ? fixed(*pred) : std::string());
    }
    csv += '\n';
  }

  summary.rows = sample.size();
  summary.csv = config.out_dir / "plot_test.csv";
  summary.svg = config.out_dir / "plot_test.svg";
  write_text(summary.csv, csv);
  ChartOptions chart;
  chart.title = "Actual vs predicted retweets, " + std::to_string(n) + " random test tweets";
  write_text(summary.svg, render_line_chart(series, chart));
  log << "plot: " << summary.rows << " rows -> " << summary.csv.string() << ", "
      << summary.svg.string() << '\n';
  return summary;
}

}  // namespace retweet::cli
