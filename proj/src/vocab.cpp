#include "gtsd/vocab.hpp"

#include <sstream>

namespace gtsd {

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  index_.reserve(tokens_.size());
  for (size_t i = 0; i < tokens_.size(); ++i) {
    require(!tokens_[i].empty(), Errc::bad_format, "empty vocab token");
    auto [it, inserted] = index_.emplace(tokens_[i], static_cast<TokenId>(i));
    (void)it;
    require(inserted, Errc::duplicate_token, "duplicate vocab token: " + tokens_[i]);
  }
  require(tokens_.size() >= 2, Errc::bad_format, "vocabulary needs at least 2 tokens");
}

Vocab Vocab::from_corpus(const std::vector<std::vector<std::string>>& sentences) {
  std::vector<std::string> tokens;
  std::unordered_map<std::string, TokenId> seen;
  for (const auto& sent : sentences) {
    for (const auto& w : sent) {
      if (seen.emplace(w, static_cast<TokenId>(tokens.size())).second) tokens.push_back(w);
    }
  }
  return Vocab(std::move(tokens));
}

const std::string& Vocab::token(TokenId id) const {
  require(id >= 0 && static_cast<size_t>(id) < tokens_.size(), Errc::index_out_of_range,
          "token id out of range");
  return tokens_[static_cast<size_t>(id)];
}

std::optional<TokenId> Vocab::find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenSeq Vocab::encode_lossy(const std::vector<std::string>& words) const {
  TokenSeq ids;
  ids.reserve(words.size());
  for (const auto& w : words) ids.push_back(find(w).value_or(-1));
  return ids;
}

std::vector<std::string> Vocab::decode(const TokenSeq& ids) const {
  std::vector<std::string> words;
  words.reserve(ids.size());
  for (TokenId id : ids) words.push_back(token(id));
  return words;
}

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> words;
  std::istringstream in(line);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::string join_tokens(const std::vector<std::string>& words) {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

}  // namespace gtsd
