#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "retweet/cli/run_config.hpp"
#include "retweet/data/dataset.hpp"
#include "retweet/metrics/metrics.hpp"
#include "retweet/model/model.hpp"

namespace retweet::cli {

// Files written by prepare into the output directory.
inline constexpr const char* kVocabFile = "vocab.json";
inline constexpr const char* kScalerFile = "scaler.json";
inline constexpr const char* kSplitFile = "splits.json";

std::filesystem::path checkpoint_path(const RunConfig& config);
std::filesystem::path train_log_path(const RunConfig& config);

data::Schema resolve_schema(const RunConfig& config);

// Dataset plus the prepare artifacts, reloaded and cross-checked.
struct PreparedData {
  std::vector<data::TweetRecord> records;
  data::SplitIndex split;
  data::Vocabulary vocab;
  data::Scaler scaler;

  const std::vector<std::size_t>& ordinals(std::string_view split_name) const;
};

PreparedData load_prepared(const RunConfig& config);

// Encodes the named split. In text modes, records without text are left
// out and counted in `skipped`.
std::vector<data::EncodedExample> encode_split(const PreparedData& prepared,
                                               std::string_view split_name,
                                               const model::ModelConfig& model,
                                               std::size_t* skipped = nullptr);

struct PrepareSummary {
  std::size_t records = 0;
  std::size_t dropped = 0;
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
  std::size_t vocab_size = 0;

  nlohmann::json to_json() const;
};

PrepareSummary cmd_prepare(const RunConfig& config, std::ostream& log);

struct TrainSummary {
  std::filesystem::path checkpoint;
  std::filesystem::path log;
  std::size_t best_epoch = 0;
  double first_train_loss = 0.0;
  double last_train_loss = 0.0;
  std::optional<metrics::MetricsReport> best_validation;
};

TrainSummary cmd_train(const RunConfig& config, std::ostream& log);

// Writes the report as JSON to `out` and to report_<arch>_<mode>_<split>.json.
metrics::MetricsReport cmd_evaluate(const RunConfig& config, const std::filesystem::path& checkpoint,
                                    std::string_view split_name, std::ostream& out,
                                    std::ostream& log);

struct PredictRow {
  std::string tweet_id;
  std::optional<double> predicted;  // nullopt when the model needs text the row lacks
};

// One row per input line, in input order, written as TSV with header
// "tweet_id<TAB>predicted_retweets" to `out`; missing predictions print as null.
std::vector<PredictRow> cmd_predict(const RunConfig& config, const std::filesystem::path& checkpoint,
                                    const std::filesystem::path& input, std::ostream& out,
                                    std::ostream& log);

struct PlotSummary {
  std::filesystem::path csv;
  std::filesystem::path svg;
  std::size_t rows = 0;
  std::vector<std::string> columns;
};

// Samples n test tweets and writes plot_test.csv and plot_test.svg. Each
// checkpoint contributes the predicted_<numeric|text|combined> column of its
// input mode.
PlotSummary cmd_plot(const RunConfig& config, const std::vector<std::filesystem::path>& checkpoints,
                     std::size_t n, std::ostream& log);

}  // namespace retweet::cli
