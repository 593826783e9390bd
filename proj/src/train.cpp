#include "gtsd/train.hpp"

#include <cmath>
#include <numeric>

#include "gtsd/rng.hpp"

namespace gtsd {

namespace {

TokenSeq encode_strict(const Vocab& vocab, const std::vector<std::string>& sentence) {
  TokenSeq ids;
  ids.reserve(sentence.size());
  for (const auto& tok : sentence) {
    auto id = vocab.find(tok);
    require(id.has_value(), Errc::unknown_token, "training token not in vocabulary: " + tok);
    ids.push_back(*id);
  }
  return ids;
}

struct SampleGrads {
  double loss = 0.0;
  Eigen::VectorXd grad_theta;      // empty when not requested
  Eigen::MatrixXd grad_embedding;  // V x d, zero rows except touched tokens
};

SampleGrads sample_loss(const DiffusionModel& model, const TokenSeq& ids, int t,
                        const Eigen::MatrixXd& eps, bool want_grads) {
  const int l = static_cast<int>(ids.size());
  const int d = model.d();
  require(l >= 4, Errc::bad_format, "training sentence needs 3 prompt tokens plus a target");
  require(eps.rows() == l && eps.cols() == d, Errc::shape_mismatch, "noise shape != sentence shape");
  model.sched.check_step(t);

  Eigen::MatrixXd x0(l, d);
  for (int j = 0; j < l; ++j) x0.row(j) = model.embedding.row(ids[static_cast<size_t>(j)]);

  const double ab = model.sched.alpha_bar(t);
  const double s0 = std::sqrt(ab);
  const double s1 = std::sqrt(1.0 - ab);
  Eigen::MatrixXd x_t = s0 * x0 + s1 * eps;
  for (int p = 0; p < 3; ++p) x_t.row(p) = x0.row(p);  // prompt conditioning

  Denoiser::Tape tape;
  const Eigen::MatrixXd eps_hat = model.denoiser.predict(x_t, t, tape);
  const Eigen::MatrixXd x0_hat = (x_t - s1 * eps_hat) / s0;

  Eigen::MatrixXd diff = x0_hat - x0;
  diff.topRows(3).setZero();  // loss covers non-prompt positions only
  const double count = static_cast<double>((l - 3) * d);

  SampleGrads out;
  out.loss = diff.squaredNorm() / count;
  if (!want_grads) return out;

  const Eigen::MatrixXd d_x0hat = (2.0 / count) * diff;
  const Eigen::MatrixXd d_epshat = (-s1 / s0) * d_x0hat;

  Eigen::MatrixXd grad_x_net;
  out.grad_theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.denoiser.param_count()));
  model.denoiser.backward(tape, d_epshat, out.grad_theta, &grad_x_net);

  const Eigen::MatrixXd d_xt = d_x0hat / s0 + grad_x_net;

  out.grad_embedding = Eigen::MatrixXd::Zero(model.embedding.rows(), d);
  for (int j = 0; j < l; ++j) {
    const Eigen::Index row = ids[static_cast<size_t>(j)];
    if (j < 3) {
      out.grad_embedding.row(row) += d_xt.row(j);  // clamped input
    } else {
      out.grad_embedding.row(row) += s0 * d_xt.row(j) - d_x0hat.row(j);
    }
  }
  return out;
}

struct Adam {
  double lr, b1, b2, eps;
  Eigen::VectorXd m, v;
  long step = 0;

  Adam(Eigen::Index n, double lr_, double b1_, double b2_, double eps_)
      : lr(lr_), b1(b1_), b2(b2_), eps(eps_), m(Eigen::VectorXd::Zero(n)),
        v(Eigen::VectorXd::Zero(n)) {}

  void update(Eigen::Ref<Eigen::VectorXd> theta, const Eigen::VectorXd& grad) {
    ++step;
    m = b1 * m + (1.0 - b1) * grad;
    v = (b2 * v.array() + (1.0 - b2) * grad.array().square()).matrix();
    const double mc = 1.0 - std::pow(b1, static_cast<double>(step));
    const double vc = 1.0 - std::pow(b2, static_cast<double>(step));
    theta -= (lr * (m / mc).array() / ((v / vc).array().sqrt() + eps)).matrix();
  }
};

void renormalize_rows(Eigen::MatrixXd& embedding) {
  for (Eigen::Index r = 0; r < embedding.rows(); ++r) {
    const double norm = embedding.row(r).norm();
    if (std::abs(norm - 1.0) > 1e-12) embedding.row(r) /= norm;
  }
}

}  // namespace

LossProbe training_loss(const DiffusionModel& model, const std::vector<std::string>& sentence,
                        int t, const Eigen::MatrixXd& eps) {
  const TokenSeq ids = encode_strict(model.vocab, sentence);
  SampleGrads g = sample_loss(model, ids, t, eps, true);
  return LossProbe{g.loss, std::move(g.grad_theta), std::move(g.grad_embedding)};
}

DiffusionModel train(const std::vector<std::vector<std::string>>& corpus, const TrainConfig& cfg,
                     uint64_t seed, std::vector<double>* epoch_losses) {
  require(!corpus.empty(), Errc::empty_corpus, "training corpus is empty");
  require(cfg.epochs >= 0 && cfg.batch >= 1, Errc::bad_range, "bad epoch or batch count");

  DiffusionModel model;
  model.vocab = Vocab::from_corpus(corpus);
  model.L = cfg.L;
  model.sched = build_schedule(cfg.schedule_steps, cfg.schedule_kind);

  std::vector<TokenSeq> encoded;
  encoded.reserve(corpus.size());
  for (const auto& sentence : corpus) {
    require(static_cast<int>(sentence.size()) <= cfg.L, Errc::length_overflow,
            "training sentence of " + std::to_string(sentence.size()) +
                " tokens exceeds capacity " + std::to_string(cfg.L));
    require(sentence.size() >= 4, Errc::bad_format,
            "training sentence needs 3 prompt tokens plus a target");
    encoded.push_back(encode_strict(model.vocab, sentence));
  }

  const Eigen::Index v_count = static_cast<Eigen::Index>(model.vocab.size());
  const int d = cfg.net.d;
  CounterRng emb_rng(seed, "emb");
  model.embedding.resize(v_count, d);
  for (Eigen::Index r = 0; r < v_count; ++r) {
    for (int c = 0; c < d; ++c) model.embedding(r, c) = emb_rng.next_gaussian();
    model.embedding.row(r) /= model.embedding.row(r).norm();
  }

  CounterRng init_rng(seed, "init");
  model.denoiser = Denoiser::init(cfg.net, init_rng);

  if (cfg.epochs == 0) return model;

  CounterRng shuffle_rng(seed, "shuf");
  CounterRng eps_rng(seed, "eps");

  // Every epoch walks the same stratified timestep set (golden-ratio stride,
  // coprime with T) so epoch losses are comparable; uniform random t makes
  // the curve heavy-tailed via the 1/alpha_bar amplification at high t.
  const int total_t = model.sched.steps();
  int stride = std::max(1, static_cast<int>(std::lround(total_t * 0.618)));
  while (std::gcd(stride, total_t) != 1) ++stride;

  Adam opt_theta(model.denoiser.theta().size(), cfg.lr, cfg.adam_beta1, cfg.adam_beta2,
                 cfg.adam_eps);
  Adam opt_emb(v_count * d, cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);

  std::vector<size_t> order(encoded.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);

    double epoch_loss = 0.0;
    for (size_t at = 0; at < order.size(); at += static_cast<size_t>(cfg.batch)) {
      const size_t stop = std::min(order.size(), at + static_cast<size_t>(cfg.batch));
      Eigen::VectorXd grad_theta =
          Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.denoiser.param_count()));
      Eigen::MatrixXd grad_emb = Eigen::MatrixXd::Zero(v_count, d);
      for (size_t i = at; i < stop; ++i) {
        const TokenSeq& ids = encoded[order[i]];
        const int l = static_cast<int>(ids.size());
        const int t = 1 + static_cast<int>((i * static_cast<size_t>(stride)) %
                                           static_cast<size_t>(total_t));
        Eigen::MatrixXd eps(l, d);
        for (int j = 0; j < l; ++j)
          for (int c = 0; c < d; ++c) eps(j, c) = eps_rng.next_gaussian();
        SampleGrads g = sample_loss(model, ids, t, eps, true);
        epoch_loss += g.loss;
        grad_theta += g.grad_theta;
        grad_emb += g.grad_embedding;
      }
      const double inv = 1.0 / static_cast<double>(stop - at);
      grad_theta *= inv;
      grad_emb *= inv;
      opt_theta.update(model.denoiser.theta(), grad_theta);
      if (cfg.train_embedding) {
        Eigen::Map<Eigen::VectorXd> flat(model.embedding.data(), model.embedding.size());
        Eigen::Map<const Eigen::VectorXd> gflat(grad_emb.data(), grad_emb.size());
        opt_emb.update(flat, Eigen::VectorXd(gflat));
        renormalize_rows(model.embedding);
      }
    }
    if (epoch_losses) epoch_losses->push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return model;
}

}  // namespace gtsd
