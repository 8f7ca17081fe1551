#include "retweet/cli/run_config.hpp"

#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "retweet/errors.hpp"

namespace retweet::cli {

nlohmann::json RunConfig::to_json() const {
  nlohmann::json doc = {
      {"dataset", dataset.string()},
      {"out_dir", out_dir.string()},
      {"seed", seed},
      {"split", {{"train", split.train}, {"validation", split.validation}, {"test", split.test}}},
      {"model", model.to_json()},
      {"optimizer",
       {{"lr", adam.alpha},
        {"beta1", adam.beta1},
        {"beta2", adam.beta2},
        {"epsilon", adam.epsilon},
        {"epochs", epochs},
        {"batch", batch}}},
      {"target_transform", optim::target_transform_name(target_transform)}};
  doc["schema"] = schema ? nlohmann::json(schema->string()) : nlohmann::json();
  return doc;
}

RunConfig RunConfig::from_json(const nlohmann::json& doc, RunConfig c) {
  try {
    if (doc.contains("dataset")) c.dataset = doc["dataset"].get<std::string>();
    if (doc.contains("out_dir")) c.out_dir = doc["out_dir"].get<std::string>();
    if (doc.contains("schema") && !doc["schema"].is_null()) c.schema = doc["schema"].get<std::string>();
    if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("split")) {
      const auto& s = doc["split"];
      c.split.train = s.value("train", c.split.train);
      c.split.validation = s.value("validation", c.split.validation);
      c.split.test = s.value("test", c.split.test);
    }
    if (doc.contains("model")) {
      nlohmann::json merged = c.model.to_json();
      merged.update(doc["model"]);
      c.model = model::ModelConfig::from_json(merged);
    }
    if (doc.contains("optimizer")) {
      const auto& o = doc["optimizer"];
      c.adam.alpha = o.value("lr", c.adam.alpha);
      c.adam.beta1 = o.value("beta1", c.adam.beta1);
      c.adam.beta2 = o.value("beta2", c.adam.beta2);
      c.adam.epsilon = o.value("epsilon", c.adam.epsilon);
      c.epochs = o.value("epochs", c.epochs);
      c.batch = o.value("batch", c.batch);
    }
    if (doc.contains("target_transform"))
      c.target_transform = optim::parse_target_transform(doc["target_transform"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::from_json(const nlohmann::json& doc) { return from_json(doc, RunConfig{}); }

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  RunConfig c = from_json(doc);
  const auto base = path.parent_path();
  if (!c.dataset.empty() && c.dataset.is_relative()) c.dataset = base / c.dataset;
  if (c.schema && c.schema->is_relative()) c.schema = base / *c.schema;
  return c;
}

void apply_environment(RunConfig& config) {
  if (const char* out = std::getenv(kOutDirEnv); out && *out) config.out_dir = out;
}

}  // namespace retweet::cli
