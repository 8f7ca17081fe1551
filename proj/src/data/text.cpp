#include "retweet/data/text.hpp"

#include <cctype>

#include <nlohmann/json.hpp>

#include "retweet/errors.hpp"

namespace retweet::data {

namespace {

bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u);
}

constexpr std::string_view kVocabFormat = "retweet-reg-vocabulary";

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::string_view raw = text.substr(i, j - i);
    i = j;

    while (!raw.empty() && is_ascii_punct(raw.front())) raw.remove_prefix(1);
    while (!raw.empty() && is_ascii_punct(raw.back())) raw.remove_suffix(1);
    if (raw.empty()) continue;

    std::string token(raw);
    for (auto& c : token)
      if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (token.starts_with("http")) token = kUrlToken;
    out.push_back(std::move(token));
  }
  return out;
}

Vocabulary::Vocabulary() : tokens_{"<pad>", "<oov>"} {}

std::size_t Vocabulary::id_of(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kOovId : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return ids_.contains(std::string(token)); }

std::size_t Vocabulary::add(const std::string& token) {
  const auto [it, inserted] = ids_.try_emplace(token, tokens_.size());
  if (inserted) tokens_.push_back(token);
  return it->second;
}

nlohmann::json Vocabulary::to_json() const {
  return {{"format", kVocabFormat}, {"version", 1}, {"tokens", tokens_}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& doc) {
  if (doc.value("format", "") != kVocabFormat || doc.value("version", 0) != 1)
    throw DataError("not a version-1 vocabulary file");
  const auto tokens = doc.at("tokens").get<std::vector<std::string>>();
  if (tokens.size() < 2) throw DataError("vocabulary is missing its reserved entries");
  Vocabulary v;
  for (std::size_t i = 2; i < tokens.size(); ++i) {
    if (v.add(tokens[i]) != i) throw DataError("vocabulary token '" + tokens[i] + "' repeated");
  }
  return v;
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpus) {
  Vocabulary v;
  for (const auto& doc : corpus)
    for (const auto& tok : doc) v.add(tok);
  return v;
}

std::vector<std::size_t> encode_text(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                                     std::size_t length) {
  std::vector<std::size_t> ids(length, Vocabulary::kPadId);
  for (std::size_t t = 0; t < length && t < tokens.size(); ++t) ids[t] = vocab.id_of(tokens[t]);
  return ids;
}

}  // namespace retweet::data
