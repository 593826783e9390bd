#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "gtsd/errors.hpp"
#include "gtsd/rng.hpp"

namespace gtsd {

/// Shape of the noise-prediction network. Positions are processed by a shared
/// tanh trunk on [latent, time embedding, position embedding]; one mixing
/// layer adds a mean-pooled global term so prompt content reaches every
/// position; a linear head emits per-position noise.
struct DenoiserConfig {
  int d = 16;            // latent dim, matches the embedding table
  int hidden = 32;       // trunk width
  int trunk_layers = 2;  // tanh layers before mixing, >= 1
  int time_dim = 8;      // sinusoidal time embedding size, even
  int pos_dim = 8;       // sinusoidal position embedding size, even or 0

  int input_dim() const { return d + time_dim + pos_dim; }
  bool operator==(const DenoiserConfig&) const = default;
};

/// out[2i] = sin(value * w_i), out[2i+1] = cos(value * w_i),
/// w_i = 10000^(-2i/dim). dim must be even.
Eigen::VectorXd sinusoid_embedding(double value, int dim);

class Denoiser {
 public:
  Denoiser() = default;
  explicit Denoiser(const DenoiserConfig& cfg);  // all parameters zero
  static Denoiser init(const DenoiserConfig& cfg, CounterRng& rng);

  const DenoiserConfig& config() const { return cfg_; }
  size_t param_count() const { return static_cast<size_t>(theta_.size()); }
  Eigen::VectorXd& theta() { return theta_; }
  const Eigen::VectorXd& theta() const { return theta_; }

  /// Forward intermediates kept for backward.
  struct Tape {
    Eigen::MatrixXd input;                // input_dim x l
    std::vector<Eigen::MatrixXd> trunk;   // trunk_layers entries, hidden x l
    Eigen::VectorXd pooled;               // hidden
    Eigen::MatrixXd mixed;                // hidden x l
  };

  /// x holds one position per row (l x d); returns predicted noise, l x d.
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x, int t) const;
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x, int t, Tape& tape) const;

  /// grad_out is dL/d(prediction), l x d. Adds dL/d(theta) into grad_theta
  /// (resized if empty) and writes dL/dx when grad_x is non-null.
  void backward(const Tape& tape, const Eigen::MatrixXd& grad_out, Eigen::VectorXd& grad_theta,
                Eigen::MatrixXd* grad_x) const;

 private:
  struct Spans {
    size_t w_in = 0, b_in = 0;
    std::vector<size_t> w_mid, b_mid;
    size_t v_local = 0, u_global = 0, b_mix = 0, w_out = 0, b_out = 0;
    size_t total = 0;
  };
  static Spans layout(const DenoiserConfig& cfg);
  friend struct DenoiserViews;

  DenoiserConfig cfg_;
  Spans spans_;
  Eigen::VectorXd theta_;
};

}  // namespace gtsd
