#include "gtsd/prompt_table.hpp"

#include <bit>
#include <map>
#include <set>

namespace gtsd {

namespace {
void check_power_of_two(uint64_t n, const char* what) {
  require(n >= 2 && std::has_single_bit(n), Errc::not_power_of_two,
          std::string(what) + " must be a power of two >= 2, got " + std::to_string(n));
}

void check_vocab_resident(const Prompt& p, const Vocab& vocab) {
  for (const auto& tok : p.tokens) {
    require(!tok.empty(), Errc::bad_format, "empty prompt token");
    require(vocab.contains(tok), Errc::unknown_token, "prompt token not in vocabulary: " + tok);
  }
}
}  // namespace

PromptTable PromptTable::load(const std::vector<std::string>& lines, const Vocab& vocab) {
  std::vector<Prompt> entries;
  entries.reserve(lines.size());
  for (size_t i = 0; i < lines.size(); ++i) {
    auto words = split_tokens(lines[i]);
    require(words.size() == 3, Errc::bad_arity,
            "prompt line " + std::to_string(i) + " has " + std::to_string(words.size()) +
                " tokens, expected 3");
    entries.push_back(Prompt{{words[0], words[1], words[2]}});
  }
  return from_prompts(std::move(entries), vocab);
}

PromptTable PromptTable::from_prompts(std::vector<Prompt> entries, const Vocab& vocab) {
  check_power_of_two(entries.size(), "prompt table capacity");
  std::set<std::array<std::string, 3>> seen;
  for (const auto& p : entries) {
    check_vocab_resident(p, vocab);
    require(seen.insert(p.tokens).second, Errc::duplicate_prompt,
            "duplicate prompt: " + join_tokens({p.tokens[0], p.tokens[1], p.tokens[2]}));
  }
  PromptTable t;
  t.entries_ = std::move(entries);
  for (uint64_t i = 0; i < t.entries_.size(); ++i) t.index_.emplace(t.entries_[i].tokens, i);
  return t;
}

std::optional<uint64_t> PromptTable::find_exact(const std::array<std::string, 3>& tokens) const {
  auto it = index_.find(tokens);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

unsigned PromptTable::prompt_bits() const {
  return static_cast<unsigned>(std::countr_zero(static_cast<uint64_t>(entries_.size())));
}

const Prompt& PromptTable::entry(uint64_t index) const {
  require(index < entries_.size(), Errc::index_out_of_range,
          "prompt index " + std::to_string(index) + " out of range");
  return entries_[index];
}

std::vector<std::string> PromptTable::to_lines() const {
  std::vector<std::string> lines;
  lines.reserve(entries_.size());
  for (const auto& p : entries_) lines.push_back(join_tokens({p.tokens[0], p.tokens[1], p.tokens[2]}));
  return lines;
}

ExtendedPromptTable ExtendedPromptTable::compose(std::array<std::vector<std::string>, 3> lists,
                                                 const Vocab& vocab) {
  ExtendedPromptTable t;
  for (int f = 0; f < 3; ++f) {
    const auto& list = lists[f];
    check_power_of_two(list.size(), "extended table word list length");
    std::set<std::string> seen;
    for (const auto& tok : list) {
      require(!tok.empty(), Errc::bad_format, "empty extended-table token");
      require(vocab.contains(tok), Errc::unknown_token, "word-list token not in vocabulary: " + tok);
      require(seen.insert(tok).second, Errc::duplicate_token,
              "duplicate token in word list: " + tok);
    }
    t.field_bits_[f] = static_cast<unsigned>(std::countr_zero(static_cast<uint64_t>(list.size())));
  }
  t.lists_ = std::move(lists);
  return t;
}

ExtendedPromptTable ExtendedPromptTable::load(const std::vector<std::string>& lines,
                                              const Vocab& vocab) {
  std::array<std::vector<std::string>, 3> lists;
  size_t section = 0;
  for (const auto& line : lines) {
    if (line == "---") {
      ++section;
      require(section < 3, Errc::bad_format, "extended table has more than 3 sections");
      continue;
    }
    auto words = split_tokens(line);
    require(words.size() == 1, Errc::bad_arity, "extended table lines carry one token each");
    lists[section].push_back(words[0]);
  }
  require(section == 2, Errc::bad_format, "extended table needs exactly 3 sections");
  return compose(std::move(lists), vocab);
}

uint64_t ExtendedPromptTable::capacity() const {
  return static_cast<uint64_t>(lists_[0].size()) * lists_[1].size() * lists_[2].size();
}

unsigned ExtendedPromptTable::prompt_bits() const {
  return field_bits_[0] + field_bits_[1] + field_bits_[2];
}

std::array<uint64_t, 3> ExtendedPromptTable::decompose(uint64_t index) const {
  require(index < capacity(), Errc::index_out_of_range,
          "extended prompt index " + std::to_string(index) + " out of range");
  // MSB-first: field 0 holds the highest-order bits.
  std::array<uint64_t, 3> fields{};
  fields[2] = index & ((uint64_t{1} << field_bits_[2]) - 1);
  index >>= field_bits_[2];
  fields[1] = index & ((uint64_t{1} << field_bits_[1]) - 1);
  index >>= field_bits_[1];
  fields[0] = index;
  return fields;
}

Prompt ExtendedPromptTable::entry(uint64_t index) const {
  auto fields = decompose(index);
  return Prompt{{lists_[0][fields[0]], lists_[1][fields[1]], lists_[2][fields[2]]}};
}

std::vector<std::string> ExtendedPromptTable::to_lines() const {
  std::vector<std::string> lines;
  for (int f = 0; f < 3; ++f) {
    if (f) lines.push_back("---");
    for (const auto& tok : lists_[f]) lines.push_back(tok);
  }
  return lines;
}

namespace {
ConditionalPrompt make_conditional(Prompt p, int l) {
  require(l >= 4, Errc::bad_range, "conditional length must be >= 4");
  return ConditionalPrompt{std::move(p), l};
}
}  // namespace

ConditionalPrompt select_prompt(const PromptTable& table, uint64_t index, int l) {
  return make_conditional(table.entry(index), l);
}

ConditionalPrompt select_prompt(const ExtendedPromptTable& table, uint64_t index, int l) {
  return make_conditional(table.entry(index), l);
}

ConditionalPrompt select_prompt(const AnyPromptTable& table, uint64_t index, int l) {
  return std::visit([&](const auto& t) { return select_prompt(t, index, l); }, table);
}

uint64_t match_prompt(const PromptTable& table, const std::array<std::string, 3>& leading) {
  require(table.capacity() > 0, Errc::table_too_small, "empty prompt table");
  const auto& entries = table.entries();
  // Exact match wins outright; distinctness makes it unique.
  if (auto hit = table.find_exact(leading)) return *hit;
  // Fallback for attacked prompts: the unique entry agreeing at >= 2
  // positions, if exactly one exists.
  uint64_t best_index = 0;
  int best_overlap = 0;
  int best_count = 0;
  for (uint64_t i = 0; i < entries.size(); ++i) {
    int overlap = 0;
    for (int p = 0; p < 3; ++p) {
      if (entries[i].tokens[p] == leading[p]) ++overlap;
    }
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best_index = i;
      best_count = 1;
    } else if (overlap == best_overlap) {
      ++best_count;
    }
  }
  require(best_overlap >= 2, Errc::prompt_not_found,
          "no table entry shares 2 of 3 leading tokens");
  require(best_count == 1, Errc::ambiguous_prompt,
          "multiple table entries tie at the best overlap");
  return best_index;
}

uint64_t match_prompt(const ExtendedPromptTable& table, const std::array<std::string, 3>& leading) {
  // A missing word leaves its index field undetermined, so the composed
  // table only supports exact per-field lookup.
  uint64_t index = 0;
  for (int f = 0; f < 3; ++f) {
    const auto& list = table.lists()[f];
    uint64_t pos = list.size();
    for (uint64_t i = 0; i < list.size(); ++i) {
      if (list[i] == leading[f]) {
        pos = i;
        break;
      }
    }
    require(pos < list.size(), Errc::prompt_not_found,
            "token not in extended word list " + std::to_string(f) + ": " + leading[f]);
    index = (index << std::countr_zero(list.size())) | pos;
  }
  return index;
}

uint64_t match_prompt(const AnyPromptTable& table, const std::array<std::string, 3>& leading) {
  return std::visit([&](const auto& t) { return match_prompt(t, leading); }, table);
}

uint64_t table_capacity(const AnyPromptTable& table) {
  return std::visit([](const auto& t) { return t.capacity(); }, table);
}

unsigned table_prompt_bits(const AnyPromptTable& table) {
  return std::visit([](const auto& t) { return t.prompt_bits(); }, table);
}

PromptTable filter_prompts(const FiltrationGenerator& generate, const PromptTable& table,
                           const Vocab& vocab, int trials) {
  require(trials >= 1, Errc::bad_range, "filtration needs at least one trial");
  std::vector<Prompt> survivors;
  for (const auto& prompt : table.entries()) {
    bool ok = true;
    for (int trial = 0; ok && trial < trials; ++trial) {
      for (const auto& candidate : generate(prompt, trial)) {
        if (candidate.size() < 3 || candidate[0] != prompt.tokens[0] ||
            candidate[1] != prompt.tokens[1] || candidate[2] != prompt.tokens[2]) {
          ok = false;
          break;
        }
      }
    }
    if (ok) survivors.push_back(prompt);
  }
  require(survivors.size() >= 2, Errc::table_too_small,
          "fewer than 2 prompts survive filtration");
  const uint64_t kept = std::bit_floor(static_cast<uint64_t>(survivors.size()));
  survivors.resize(kept);
  return PromptTable::from_prompts(std::move(survivors), vocab);
}

}  // namespace gtsd
