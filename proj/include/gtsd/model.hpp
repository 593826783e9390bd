#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "gtsd/denoiser.hpp"
#include "gtsd/prompt_table.hpp"
#include "gtsd/schedule.hpp"
#include "gtsd/vocab.hpp"

namespace gtsd {

/// k rows of L x d latents.
struct LatentBatch {
  int k = 0;
  int L = 0;
  int d = 0;
  std::vector<Eigen::MatrixXd> rows;
};

/// k sentences of equal length sharing the conditioning prompt prefix.
struct CandidateBatch {
  std::vector<std::vector<std::string>> sentences;
};

/// Everything sender and receiver must share: vocabulary, embedding table,
/// noise schedule, denoiser weights, and the position capacity L.
struct DiffusionModel {
  Vocab vocab;
  Eigen::MatrixXd embedding;  // V x d, rows distinct
  NoiseSchedule sched;
  Denoiser denoiser;
  int L = 25;

  int d() const { return static_cast<int>(embedding.cols()); }

  /// Overwrites latent positions 0..2 with the prompt token embeddings.
  void clamp_prompt(Eigen::MatrixXd& x, const Prompt& prompt) const;

  /// Denoiser output per row, with prompt positions clamped on a copy first.
  std::vector<Eigen::MatrixXd> predict_noise(const std::vector<Eigen::MatrixXd>& x_rows, int t,
                                             const ConditionalPrompt& cond) const;
};

/// Nearest-embedding-row token per position; ties go to the lowest token id.
TokenSeq round_tokens_row(const Eigen::MatrixXd& latents, const Eigen::MatrixXd& embedding);

std::vector<TokenSeq> round_tokens(const std::vector<Eigen::MatrixXd>& rows,
                                   const Eigen::MatrixXd& embedding);

/// Deterministic skip sampler: walks the given decreasing timesteps, predicts
/// noise with prompt positions clamped at every step, jumps between steps via
/// the x0 estimate, rounds the final latents, and truncates to cond.length.
/// Pure in (model, cond, latents, steps); row order is fixed, so the result
/// is identical for any thread count.
CandidateBatch sample_batch(const DiffusionModel& model, const ConditionalPrompt& cond,
                            const LatentBatch& latents, const std::vector<int>& steps,
                            int threads = 1);

/// Mean of the token embedding rows, truncated or zero-padded to out_dim.
Eigen::VectorXd embed_sentence(const std::vector<std::string>& tokens, const Vocab& vocab,
                               const Eigen::MatrixXd& embedding, int out_dim = 100);

}  // namespace gtsd
