#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gtsd/vocab.hpp"

namespace gtsd {

/// A 3-token generation prompt.
struct Prompt {
  std::array<std::string, 3> tokens;

  bool operator==(const Prompt&) const = default;
};

/// A prompt plus the target sentence length, conditioning one batch
/// generation. The prompt occupies positions 0..2, so length >= 4.
struct ConditionalPrompt {
  Prompt prompt;
  int length = 0;
};

/// Shared ordered table of distinct 3-token prompts; capacity is a power of
/// two and index order is the wire contract between sender and receiver.
class PromptTable {
 public:
  PromptTable() = default;
  /// Validates arity, power-of-two size, distinctness, vocabulary membership.
  static PromptTable load(const std::vector<std::string>& lines, const Vocab& vocab);
  /// Same validation, from already tokenized entries.
  static PromptTable from_prompts(std::vector<Prompt> entries, const Vocab& vocab);

  uint64_t capacity() const { return entries_.size(); }
  unsigned prompt_bits() const;  // log2(capacity)
  const Prompt& entry(uint64_t index) const;
  const std::vector<Prompt>& entries() const { return entries_; }

  std::vector<std::string> to_lines() const;

  /// Index of an exact triple, if present.
  std::optional<uint64_t> find_exact(const std::array<std::string, 3>& tokens) const;

 private:
  std::vector<Prompt> entries_;
  std::map<std::array<std::string, 3>, uint64_t> index_;
};

/// Cartesian-product table: three word lists, each a power-of-two length;
/// a prompt index decomposes MSB-first into one field per list.
class ExtendedPromptTable {
 public:
  ExtendedPromptTable() = default;
  static ExtendedPromptTable compose(std::array<std::vector<std::string>, 3> lists,
                                     const Vocab& vocab);
  /// Text form: three sections separated by a line containing only "---".
  static ExtendedPromptTable load(const std::vector<std::string>& lines, const Vocab& vocab);

  uint64_t capacity() const;
  unsigned prompt_bits() const;
  Prompt entry(uint64_t index) const;
  std::array<uint64_t, 3> decompose(uint64_t index) const;
  const std::array<std::vector<std::string>, 3>& lists() const { return lists_; }

  std::vector<std::string> to_lines() const;

 private:
  std::array<std::vector<std::string>, 3> lists_;
  std::array<unsigned, 3> field_bits_{0, 0, 0};
};

using AnyPromptTable = std::variant<PromptTable, ExtendedPromptTable>;

/// Entry at `index` combined with target length l.
ConditionalPrompt select_prompt(const PromptTable& table, uint64_t index, int l);
ConditionalPrompt select_prompt(const ExtendedPromptTable& table, uint64_t index, int l);
ConditionalPrompt select_prompt(const AnyPromptTable& table, uint64_t index, int l);

/// Inverse of select_prompt on the leading 3 tokens. Exact match first; for
/// the flat table, falls back to the unique entry agreeing at >= 2 positions.
uint64_t match_prompt(const PromptTable& table, const std::array<std::string, 3>& leading);
uint64_t match_prompt(const ExtendedPromptTable& table, const std::array<std::string, 3>& leading);
uint64_t match_prompt(const AnyPromptTable& table, const std::array<std::string, 3>& leading);

uint64_t table_capacity(const AnyPromptTable& table);
unsigned table_prompt_bits(const AnyPromptTable& table);

/// One trial generation for prompt filtration: returns the candidate
/// sentences produced for this prompt on the given trial.
using FiltrationGenerator =
    std::function<std::vector<std::vector<std::string>>(const Prompt&, int trial)>;

/// Keeps only prompts whose 3 tokens survive as the leading tokens of every
/// candidate in every trial, then truncates to the largest power of two.
PromptTable filter_prompts(const FiltrationGenerator& generate, const PromptTable& table,
                           const Vocab& vocab, int trials);

}  // namespace gtsd
