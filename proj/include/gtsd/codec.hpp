#pragma once

#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "gtsd/bitstring.hpp"
#include "gtsd/model.hpp"
#include "gtsd/session.hpp"

namespace gtsd {

/// Ordered stego sentences; order equals segment order.
struct StegoSet {
  std::vector<std::vector<std::string>> sentences;
  size_t pad_bits = 0;
};

struct SentenceError {
  size_t ordinal = 0;
  Errc code = Errc::bad_format;
  std::string message;
};

/// Extracted bits plus the sentences that failed. A failed sentence still
/// contributes a zero-filled segment so later segments stay aligned.
struct ExtractionResult {
  BitString bits;
  std::vector<SentenceError> errors;
};

/// Positional token-match ratio: |{j : s[j] == c[j]}| / max(|s|, |c|).
/// 1.0 exactly when the sequences are identical.
double similarity(const std::vector<std::string>& s, const std::vector<std::string>& c);

/// Index of the highest-similarity candidate; ties go to the lowest index.
size_t best_candidate(const std::vector<std::string>& s, const CandidateBatch& batch);

/// Draws count sentence lengths from PRNG stream "len", uniform over
/// [l_min, l_max]. A fresh call replays the same prefix.
std::vector<int> sample_lengths(uint64_t seed, size_t count, int l_min, int l_max);

/// k x L x d standard normals from PRNG stream "lat" in (row, position, dim)
/// order; sampled once per session and shared by every segment.
LatentBatch sample_latents(uint64_t seed, int k, int L, int d);

/// One party's runtime state: model + table + the seed-derived latents, plus
/// a cache of generated batches keyed by (prompt index, length). Batches are
/// pure functions of the session, so hide and extract may share a Session
/// and any thread may query it.
class Session {
 public:
  Session(const DiffusionModel* model, AnyPromptTable table, SessionConfig cfg, int threads = 1);

  const SessionConfig& config() const { return cfg_; }
  const SegmentSpec& spec() const { return spec_; }
  const LatentBatch& latents() const { return latents_; }
  const AnyPromptTable& table() const { return table_; }
  const DiffusionModel& model() const { return *model_; }

  std::vector<int> lengths(size_t count) const;
  const CandidateBatch& batch_for(uint64_t prompt_index, int l) const;

  /// Algorithm: split b into (M_p, M_b) segments, generate the batch under
  /// prompt M_p and the segment's length, emit candidate M_b. Each emitted
  /// sentence is self-checked to extract back to M_b.
  StegoSet hide(const BitString& b) const;

  /// Inverse walk: match the leading 3 tokens to a prompt index, regenerate
  /// that batch, take the best-similarity candidate index. Sentences that
  /// fail to match report errors and contribute zero bits.
  ExtractionResult extract(const std::vector<std::vector<std::string>>& sentences) const;

 private:
  const DiffusionModel* model_;
  AnyPromptTable table_;
  SessionConfig cfg_;
  int threads_;
  SegmentSpec spec_;
  LatentBatch latents_;

  mutable std::mutex cache_mu_;
  mutable std::map<std::pair<uint64_t, int>, CandidateBatch> cache_;
};

}  // namespace gtsd
