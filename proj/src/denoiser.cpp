#include "gtsd/denoiser.hpp"

#include <cmath>

namespace gtsd {

namespace {
void check_config(const DenoiserConfig& cfg) {
  require(cfg.d >= 1 && cfg.hidden >= 1 && cfg.trunk_layers >= 1, Errc::bad_format,
          "denoiser dims must be positive");
  require(cfg.time_dim >= 2 && cfg.time_dim % 2 == 0, Errc::bad_format,
          "time embedding size must be even and >= 2");
  require(cfg.pos_dim >= 0 && cfg.pos_dim % 2 == 0, Errc::bad_format,
          "position embedding size must be even");
}
}  // namespace

Eigen::VectorXd sinusoid_embedding(double value, int dim) {
  Eigen::VectorXd out(dim);
  for (int i = 0; i < dim / 2; ++i) {
    const double freq = std::pow(10000.0, -2.0 * i / dim);
    out[2 * i] = std::sin(value * freq);
    out[2 * i + 1] = std::cos(value * freq);
  }
  return out;
}

Denoiser::Spans Denoiser::layout(const DenoiserConfig& cfg) {
  const size_t h = static_cast<size_t>(cfg.hidden);
  const size_t in = static_cast<size_t>(cfg.input_dim());
  const size_t d = static_cast<size_t>(cfg.d);
  Spans s;
  size_t off = 0;
  auto take = [&off](size_t count) {
    size_t at = off;
    off += count;
    return at;
  };
  s.w_in = take(h * in);
  s.b_in = take(h);
  for (int i = 1; i < cfg.trunk_layers; ++i) {
    s.w_mid.push_back(take(h * h));
    s.b_mid.push_back(take(h));
  }
  s.v_local = take(h * h);
  s.u_global = take(h * h);
  s.b_mix = take(h);
  s.w_out = take(d * h);
  s.b_out = take(d);
  s.total = off;
  return s;
}

Denoiser::Denoiser(const DenoiserConfig& cfg) : cfg_(cfg) {
  check_config(cfg);
  spans_ = layout(cfg);
  theta_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spans_.total));
}

Denoiser Denoiser::init(const DenoiserConfig& cfg, CounterRng& rng) {
  Denoiser net(cfg);
  const int h = cfg.hidden;
  const int in = cfg.input_dim();
  auto fill = [&](size_t at, size_t count, int fan_in) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (size_t i = 0; i < count; ++i)
      net.theta_[static_cast<Eigen::Index>(at + i)] = scale * rng.next_gaussian();
  };
  const auto& s = net.spans_;
  fill(s.w_in, static_cast<size_t>(h) * in, in);
  for (size_t l = 0; l < s.w_mid.size(); ++l) fill(s.w_mid[l], static_cast<size_t>(h) * h, h);
  fill(s.v_local, static_cast<size_t>(h) * h, h);
  fill(s.u_global, static_cast<size_t>(h) * h, h);
  fill(s.w_out, static_cast<size_t>(cfg.d) * h, h);
  return net;
}

namespace {
using CMap = Eigen::Map<const Eigen::MatrixXd>;
using CVec = Eigen::Map<const Eigen::VectorXd>;
using MMap = Eigen::Map<Eigen::MatrixXd>;
using MVec = Eigen::Map<Eigen::VectorXd>;
}  // namespace

struct DenoiserViews {
  const DenoiserConfig& cfg;
  const Denoiser::Spans& s;
  const double* p;

  DenoiserViews(const Denoiser& net)
      : cfg(net.cfg_), s(net.spans_), p(net.theta_.data()) {}

  CMap w_in() const { return {p + s.w_in, cfg.hidden, cfg.input_dim()}; }
  CVec b_in() const { return {p + s.b_in, cfg.hidden}; }
  CMap w_mid(size_t i) const { return {p + s.w_mid[i], cfg.hidden, cfg.hidden}; }
  CVec b_mid(size_t i) const { return {p + s.b_mid[i], cfg.hidden}; }
  CMap v_local() const { return {p + s.v_local, cfg.hidden, cfg.hidden}; }
  CMap u_global() const { return {p + s.u_global, cfg.hidden, cfg.hidden}; }
  CVec b_mix() const { return {p + s.b_mix, cfg.hidden}; }
  CMap w_out() const { return {p + s.w_out, cfg.d, cfg.hidden}; }
  CVec b_out() const { return {p + s.b_out, cfg.d}; }
};

Eigen::MatrixXd Denoiser::predict(const Eigen::MatrixXd& x, int t) const {
  Tape tape;
  return predict(x, t, tape);
}

Eigen::MatrixXd Denoiser::predict(const Eigen::MatrixXd& x, int t, Tape& tape) const {
  require(x.cols() == cfg_.d, Errc::shape_mismatch,
          "latent dim " + std::to_string(x.cols()) + " != model dim " + std::to_string(cfg_.d));
  require(x.rows() >= 1, Errc::shape_mismatch, "empty latent");
  const Eigen::Index l = x.rows();
  DenoiserViews v(*this);

  tape.input.resize(cfg_.input_dim(), l);
  const Eigen::VectorXd temb = sinusoid_embedding(static_cast<double>(t), cfg_.time_dim);
  for (Eigen::Index j = 0; j < l; ++j) {
    tape.input.block(0, j, cfg_.d, 1) = x.row(j).transpose();
    tape.input.block(cfg_.d, j, cfg_.time_dim, 1) = temb;
    if (cfg_.pos_dim > 0)
      tape.input.block(cfg_.d + cfg_.time_dim, j, cfg_.pos_dim, 1) =
          sinusoid_embedding(static_cast<double>(j), cfg_.pos_dim);
  }

  tape.trunk.assign(static_cast<size_t>(cfg_.trunk_layers), Eigen::MatrixXd());
  tape.trunk[0] =
      ((v.w_in() * tape.input).colwise() + v.b_in()).array().tanh().matrix();
  for (size_t i = 0; i + 1 < tape.trunk.size(); ++i)
    tape.trunk[i + 1] =
        ((v.w_mid(i) * tape.trunk[i]).colwise() + v.b_mid(i)).array().tanh().matrix();

  const Eigen::MatrixXd& top = tape.trunk.back();
  tape.pooled = top.rowwise().mean();
  const Eigen::VectorXd shift = v.u_global() * tape.pooled + v.b_mix();
  tape.mixed = ((v.v_local() * top).colwise() + shift).array().tanh().matrix();

  Eigen::MatrixXd out = (v.w_out() * tape.mixed).colwise() + v.b_out();
  return out.transpose();
}

void Denoiser::backward(const Tape& tape, const Eigen::MatrixXd& grad_out,
                        Eigen::VectorXd& grad_theta, Eigen::MatrixXd* grad_x) const {
  const Eigen::Index l = grad_out.rows();
  require(grad_out.cols() == cfg_.d && tape.mixed.cols() == l, Errc::shape_mismatch,
          "gradient shape differs from prediction shape");
  if (grad_theta.size() == 0) grad_theta = Eigen::VectorXd::Zero(theta_.size());
  require(grad_theta.size() == theta_.size(), Errc::shape_mismatch, "bad grad_theta size");

  DenoiserViews v(*this);
  double* g = grad_theta.data();
  const auto& s = spans_;

  const Eigen::MatrixXd d_out = grad_out.transpose();  // d x l

  MMap(g + s.w_out, cfg_.d, cfg_.hidden) += d_out * tape.mixed.transpose();
  MVec(g + s.b_out, cfg_.d) += d_out.rowwise().sum();

  Eigen::MatrixXd d_mix = v.w_out().transpose() * d_out;  // hidden x l
  Eigen::MatrixXd d_zmix =
      (d_mix.array() * (1.0 - tape.mixed.array().square())).matrix();  // tanh'

  const Eigen::MatrixXd& top = tape.trunk.back();
  MMap(g + s.v_local, cfg_.hidden, cfg_.hidden) += d_zmix * top.transpose();
  const Eigen::VectorXd zsum = d_zmix.rowwise().sum();
  MMap(g + s.u_global, cfg_.hidden, cfg_.hidden) += zsum * tape.pooled.transpose();
  MVec(g + s.b_mix, cfg_.hidden) += zsum;
  const Eigen::VectorXd d_pool = v.u_global().transpose() * zsum;

  Eigen::MatrixXd d_h = v.v_local().transpose() * d_zmix;
  d_h.colwise() += (d_pool / static_cast<double>(l)).eval();  // mean-pool fan-out

  for (size_t i = tape.trunk.size(); i-- > 0;) {
    const Eigen::MatrixXd d_z =
        (d_h.array() * (1.0 - tape.trunk[i].array().square())).matrix();
    if (i > 0) {
      MMap(g + s.w_mid[i - 1], cfg_.hidden, cfg_.hidden) += d_z * tape.trunk[i - 1].transpose();
      MVec(g + s.b_mid[i - 1], cfg_.hidden) += d_z.rowwise().sum();
      d_h = v.w_mid(i - 1).transpose() * d_z;
    } else {
      MMap(g + s.w_in, cfg_.hidden, cfg_.input_dim()) += d_z * tape.input.transpose();
      MVec(g + s.b_in, cfg_.hidden) += d_z.rowwise().sum();
      if (grad_x) {
        const Eigen::MatrixXd d_in = v.w_in().transpose() * d_z;
        *grad_x = d_in.topRows(cfg_.d).transpose();
      }
    }
  }
}

}  // namespace gtsd
