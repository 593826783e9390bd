#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gtsd/model.hpp"

namespace gtsd {

struct TrainConfig {
  DenoiserConfig net;
  int schedule_steps = 1000;
  ScheduleKind schedule_kind = ScheduleKind::linear;
  int L = 25;  // position capacity; every training sentence must fit
  int epochs = 30;
  int batch = 16;
  double lr = 3e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  bool train_embedding = true;
};

/// Builds vocabulary and embedding from the corpus and fits the denoiser to
/// predict x0 from noised latents, conditioned on each sentence's leading 3
/// tokens. Loss is the mean squared x0 error over non-prompt positions.
/// Single-threaded with fixed iteration order: a seed fully determines the
/// resulting weights. Embedding rows stay unit-norm while trained.
DiffusionModel train(const std::vector<std::vector<std::string>>& corpus, const TrainConfig& cfg,
                     uint64_t seed, std::vector<double>* epoch_losses = nullptr);

/// Per-sentence loss and gradients, exposed for finite-difference checks.
struct LossProbe {
  double loss = 0.0;
  Eigen::VectorXd grad_theta;
  Eigen::MatrixXd grad_embedding;  // V x d
};

LossProbe training_loss(const DiffusionModel& model, const std::vector<std::string>& sentence,
                        int t, const Eigen::MatrixXd& eps);

}  // namespace gtsd
