#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace retweet::data {

inline constexpr std::string_view kUrlToken = "<url>";

// Lowercases ASCII, splits on whitespace, strips leading/trailing ASCII
// punctuation and replaces tokens starting with "http" by "<url>".
std::vector<std::string> tokenize(std::string_view text);

// Token <-> id map. Ids 0 and 1 are reserved for padding and
// out-of-vocabulary; real tokens start at 2 in first-occurrence order.
class Vocabulary {
 public:
  static constexpr std::size_t kPadId = 0;
  static constexpr std::size_t kOovId = 1;

  Vocabulary();

  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t id_of(std::string_view token) const;  // kOovId when unknown
  bool contains(std::string_view token) const;
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  // Returns the id of token, inserting it when new.
  std::size_t add(const std::string& token);

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& doc);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> ids_;
};

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpus);

inline constexpr std::size_t kDefaultSequenceLength = 30;

// Keeps the first `length` tokens and right-pads with the padding id.
std::vector<std::size_t> encode_text(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                                     std::size_t length = kDefaultSequenceLength);

}  // namespace retweet::data
