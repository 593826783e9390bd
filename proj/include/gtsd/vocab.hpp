#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gtsd/errors.hpp"

namespace gtsd {

using TokenId = int32_t;
using TokenSeq = std::vector<TokenId>;

/// Ordered set of distinct token strings; index <-> token is a bijection.
class Vocab {
 public:
  Vocab() = default;
  explicit Vocab(std::vector<std::string> tokens);

  /// Collects tokens in first-appearance order from whitespace-split lines.
  static Vocab from_corpus(const std::vector<std::vector<std::string>>& sentences);

  size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const;
  std::optional<TokenId> find(const std::string& token) const;
  bool contains(const std::string& token) const { return find(token).has_value(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Maps token strings to ids; unknown tokens map to -1 (matches nothing).
  TokenSeq encode_lossy(const std::vector<std::string>& words) const;
  std::vector<std::string> decode(const TokenSeq& ids) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

std::vector<std::string> split_tokens(const std::string& line);
std::string join_tokens(const std::vector<std::string>& words);

}  // namespace gtsd
