#include "gtsd/model.hpp"

#include "gtsd/parallel.hpp"

namespace gtsd {

void DiffusionModel::clamp_prompt(Eigen::MatrixXd& x, const Prompt& prompt) const {
  require(x.rows() >= 3 && x.cols() == embedding.cols(), Errc::shape_mismatch,
          "latent too small to hold a 3-token prompt");
  for (int p = 0; p < 3; ++p) {
    auto id = vocab.find(prompt.tokens[p]);
    require(id.has_value(), Errc::unknown_token, "prompt token not in vocabulary: " + prompt.tokens[p]);
    x.row(p) = embedding.row(*id);
  }
}

std::vector<Eigen::MatrixXd> DiffusionModel::predict_noise(
    const std::vector<Eigen::MatrixXd>& x_rows, int t, const ConditionalPrompt& cond) const {
  sched.check_step(t);
  std::vector<Eigen::MatrixXd> out(x_rows.size());
  for (size_t r = 0; r < x_rows.size(); ++r) {
    Eigen::MatrixXd x = x_rows[r];
    clamp_prompt(x, cond.prompt);
    out[r] = denoiser.predict(x, t);
  }
  return out;
}

TokenSeq round_tokens_row(const Eigen::MatrixXd& latents, const Eigen::MatrixXd& embedding) {
  require(latents.cols() == embedding.cols(), Errc::shape_mismatch,
          "latent dim differs from embedding dim");
  const Eigen::Index v_count = embedding.rows();
  TokenSeq out(static_cast<size_t>(latents.rows()));
  for (Eigen::Index j = 0; j < latents.rows(); ++j) {
    TokenId best = 0;
    double best_dist = (latents.row(j) - embedding.row(0)).squaredNorm();
    for (Eigen::Index v = 1; v < v_count; ++v) {
      const double dist = (latents.row(j) - embedding.row(v)).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = static_cast<TokenId>(v);
      }
    }
    out[static_cast<size_t>(j)] = best;
  }
  return out;
}

std::vector<TokenSeq> round_tokens(const std::vector<Eigen::MatrixXd>& rows,
                                   const Eigen::MatrixXd& embedding) {
  std::vector<TokenSeq> out(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) out[r] = round_tokens_row(rows[r], embedding);
  return out;
}

namespace {
void check_steps(const std::vector<int>& steps, int total) {
  require(!steps.empty(), Errc::bad_step_sequence, "empty timestep list");
  int prev = total + 1;
  for (int t : steps) {
    require(t >= 1 && t <= total, Errc::bad_step_sequence,
            "timestep " + std::to_string(t) + " outside [1, " + std::to_string(total) + "]");
    require(t < prev, Errc::bad_step_sequence, "timesteps must be strictly decreasing");
    prev = t;
  }
}
}  // namespace

CandidateBatch sample_batch(const DiffusionModel& model, const ConditionalPrompt& cond,
                            const LatentBatch& latents, const std::vector<int>& steps,
                            int threads) {
  check_steps(steps, model.sched.steps());
  const int l = cond.length;
  require(l >= 4, Errc::bad_range, "conditional length must be >= 4");
  require(latents.k >= 1 && static_cast<size_t>(latents.k) == latents.rows.size(),
          Errc::shape_mismatch, "latent batch row count mismatch");
  require(latents.L >= l, Errc::shape_mismatch,
          "latent length " + std::to_string(latents.L) + " below sentence length " +
              std::to_string(l));
  require(latents.d == model.d(), Errc::shape_mismatch, "latent dim differs from model dim");

  CandidateBatch batch;
  batch.sentences.resize(static_cast<size_t>(latents.k));
  parallel_for(static_cast<size_t>(latents.k), threads, [&](size_t r) {
    Eigen::MatrixXd x = latents.rows[r].topRows(l);
    for (size_t i = 0; i < steps.size(); ++i) {
      const int t = steps[i];
      model.clamp_prompt(x, cond.prompt);
      const Eigen::MatrixXd eps_hat = model.denoiser.predict(x, t);
      const Eigen::MatrixXd x0 = denoise_x0(x, t, eps_hat, model.sched);
      if (i + 1 < steps.size()) {
        x = forward_noise_closed(x0, steps[i + 1], model.sched, eps_hat);
      } else {
        x = x0;
      }
    }
    model.clamp_prompt(x, cond.prompt);  // prefix rounds exactly to the prompt
    batch.sentences[r] = model.vocab.decode(round_tokens_row(x, model.embedding));
  });
  return batch;
}

Eigen::VectorXd embed_sentence(const std::vector<std::string>& tokens, const Vocab& vocab,
                               const Eigen::MatrixXd& embedding, int out_dim) {
  require(!tokens.empty(), Errc::empty_sentence, "cannot embed an empty sentence");
  require(out_dim >= 1, Errc::bad_range, "sentence vector dim must be positive");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(embedding.cols());
  for (const auto& tok : tokens) {
    auto id = vocab.find(tok);
    require(id.has_value(), Errc::unknown_token, "token not in vocabulary: " + tok);
    mean += embedding.row(*id).transpose();
  }
  mean /= static_cast<double>(tokens.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(out_dim);
  const Eigen::Index copy = std::min<Eigen::Index>(out_dim, mean.size());
  out.head(copy) = mean.head(copy);
  return out;
}

}  // namespace gtsd
