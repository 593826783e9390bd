#include "gtsd/codec.hpp"

#include "gtsd/rng.hpp"

namespace gtsd {

double similarity(const std::vector<std::string>& s, const std::vector<std::string>& c) {
  const size_t longer = std::max(s.size(), c.size());
  if (longer == 0) return 1.0;
  const size_t shorter = std::min(s.size(), c.size());
  size_t matches = 0;
  for (size_t j = 0; j < shorter; ++j)
    if (s[j] == c[j]) ++matches;
  return static_cast<double>(matches) / static_cast<double>(longer);
}

size_t best_candidate(const std::vector<std::string>& s, const CandidateBatch& batch) {
  require(!batch.sentences.empty(), Errc::empty_set, "empty candidate batch");
  size_t best = 0;
  double best_score = similarity(s, batch.sentences[0]);
  for (size_t j = 1; j < batch.sentences.size(); ++j) {
    const double score = similarity(s, batch.sentences[j]);
    if (score > best_score) {
      best_score = score;
      best = j;
    }
  }
  return best;
}

std::vector<int> sample_lengths(uint64_t seed, size_t count, int l_min, int l_max) {
  require(l_min >= 4 && l_min <= l_max, Errc::bad_range, "bad length range");
  CounterRng rng(seed, "len");
  const uint64_t span = static_cast<uint64_t>(l_max - l_min) + 1;
  std::vector<int> lengths(count);
  for (size_t i = 0; i < count; ++i)
    lengths[i] = l_min + static_cast<int>(rng.next_below(span));
  return lengths;
}

LatentBatch sample_latents(uint64_t seed, int k, int L, int d) {
  require(k >= 1 && L >= 1 && d >= 1, Errc::bad_range, "latent dims must be positive");
  CounterRng rng(seed, "lat");
  LatentBatch batch;
  batch.k = k;
  batch.L = L;
  batch.d = d;
  batch.rows.resize(static_cast<size_t>(k));
  for (int r = 0; r < k; ++r) {
    Eigen::MatrixXd& row = batch.rows[static_cast<size_t>(r)];
    row.resize(L, d);
    for (int j = 0; j < L; ++j)
      for (int c = 0; c < d; ++c) row(j, c) = rng.next_gaussian();
  }
  return batch;
}

Session::Session(const DiffusionModel* model, AnyPromptTable table, SessionConfig cfg,
                 int threads)
    : model_(model), table_(std::move(table)), cfg_(std::move(cfg)), threads_(threads) {
  require(model_ != nullptr, Errc::model_missing, "session has no model");
  validate_session(cfg_);
  require(table_capacity(table_) >= 2, Errc::table_mismatch, "prompt table too small");
  require(cfg_.l_max <= model_->L, Errc::shape_mismatch,
          "l_max exceeds the model's position capacity");
  for (int t : cfg_.steps) model_->sched.check_step(t);
  spec_ = SegmentSpec(table_capacity(table_), cfg_.k);
  latents_ = sample_latents(cfg_.seed, static_cast<int>(cfg_.k), model_->L, model_->d());
}

std::vector<int> Session::lengths(size_t count) const {
  return sample_lengths(cfg_.seed, count, cfg_.l_min, cfg_.l_max);
}

const CandidateBatch& Session::batch_for(uint64_t prompt_index, int l) const {
  const std::pair<uint64_t, int> key{prompt_index, l};
  {
    std::lock_guard<std::mutex> lock(cache_mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  CandidateBatch fresh = sample_batch(*model_, select_prompt(table_, prompt_index, l), latents_,
                                      cfg_.steps, threads_);
  std::lock_guard<std::mutex> lock(cache_mu_);
  return cache_.emplace(key, std::move(fresh)).first->second;
}

StegoSet Session::hide(const BitString& b) const {
  const SegmentedBits segs = segment_bits(b, spec_);
  const std::vector<int> ls = lengths(segs.segments.size());

  StegoSet out;
  out.pad_bits = segs.pad_bits;
  out.sentences.resize(segs.segments.size());
  for (size_t i = 0; i < segs.segments.size(); ++i) {
    const Segment& seg = segs.segments[i];
    const uint64_t prompt_index = bits_to_index(seg.prompt_block);
    const uint64_t candidate_index = bits_to_index(seg.batch_block);
    const CandidateBatch& batch = batch_for(prompt_index, ls[i]);
    const std::vector<std::string>& chosen = batch.sentences[candidate_index];
    const size_t recovered = best_candidate(chosen, batch);
    require(recovered == candidate_index, Errc::collision_detected,
            "segment " + std::to_string(i) + ": candidate " + std::to_string(candidate_index) +
                " duplicates candidate " + std::to_string(recovered) +
                "; rerun with a different session seed");
    out.sentences[i] = chosen;
  }
  return out;
}

ExtractionResult Session::extract(const std::vector<std::vector<std::string>>& sentences) const {
  const std::vector<int> ls = lengths(sentences.size());

  ExtractionResult out;
  for (size_t i = 0; i < sentences.size(); ++i) {
    const std::vector<std::string>& s = sentences[i];
    try {
      require(static_cast<int>(s.size()) == ls[i], Errc::length_mismatch,
              "observed length " + std::to_string(s.size()) + ", seed derives " +
                  std::to_string(ls[i]));
      const uint64_t prompt_index = match_prompt(table_, {s[0], s[1], s[2]});
      const CandidateBatch& batch = batch_for(prompt_index, ls[i]);
      const uint64_t candidate_index = best_candidate(s, batch);
      out.bits.append(index_to_bits(prompt_index, spec_.prompt_bits()));
      out.bits.append(index_to_bits(candidate_index, spec_.batch_bits()));
    } catch (const Error& e) {
      out.errors.push_back(SentenceError{i, e.code(), e.what()});
      out.bits.append(index_to_bits(0, spec_.segment_bits()));
    }
  }
  return out;
}

}  // namespace gtsd
