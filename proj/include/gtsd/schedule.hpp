#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gtsd/errors.hpp"

namespace gtsd {

enum class ScheduleKind : uint16_t {
  linear = 0,  // alpha_bar falls linearly from 1 to 1e-4
  cosine = 1,
};

std::string schedule_kind_name(ScheduleKind kind);
ScheduleKind schedule_kind_from_u16(uint16_t v);
ScheduleKind schedule_kind_from_name(const std::string& name);

inline constexpr double kAlphaBarFloor = 1e-4;

/// Per-step noise levels. alpha_bar
/// is rebuilt as the running product of alpha, so
/// alpha_bar(t) == alpha_bar(t-1) * alpha(t) holds exactly in floating point.
template <class Scalar>
class NoiseScheduleT {
 public:
  NoiseScheduleT() = default;

  int steps() const { return steps_; }
  ScheduleKind kind() const { return kind_; }

  Scalar alpha(int t) const {
    check_step(t);
    return alpha_[t];
  }
  Scalar alpha_bar(int t) const {
    if (t == 0) return Scalar(1);
    check_step(t);
    return alpha_bar_[t];
  }

  void check_step(int t) const {
    require(t >= 1 && t <= steps_, Errc::step_out_of_range,
            "timestep " + std::to_string(t) + " outside [1, " + std::to_string(steps_) + "]");
  }

  template <class S>
  friend NoiseScheduleT<S> build_schedule(int steps, ScheduleKind kind);

 private:
  int steps_ = 0;
  ScheduleKind kind_ = ScheduleKind::linear;
  std::vector<Scalar> alpha_;      // index 0 unused
  std::vector<Scalar> alpha_bar_;  // alpha_bar_[0] = 1
};

using NoiseSchedule = NoiseScheduleT<double>;

template <class Scalar = double>
NoiseScheduleT<Scalar> build_schedule(int steps, ScheduleKind kind = ScheduleKind::linear) {
  require(steps >= 1, Errc::bad_steps, "schedule needs at least one step");
  const double floor = kAlphaBarFloor;
  std::vector<double> target(static_cast<size_t>(steps) + 1);
  target[0] = 1.0;
  for (int t = 1; t <= steps; ++t) {
    const double frac = static_cast<double>(t) / steps;
    if (kind == ScheduleKind::linear) {
      target[t] = 1.0 - (1.0 - floor) * frac;
    } else {
      const double c = std::cos(frac * M_PI / 2.0);
      target[t] = floor + (1.0 - floor) * c * c;
    }
  }

  NoiseScheduleT<Scalar> s;
  s.steps_ = steps;
  s.kind_ = kind;
  s.alpha_.assign(static_cast<size_t>(steps) + 1, Scalar(1));
  s.alpha_bar_.assign(static_cast<size_t>(steps) + 1, Scalar(1));
  Scalar prev = Scalar(1);
  for (int t = 1; t <= steps; ++t) {
    const Scalar a = static_cast<Scalar>(target[t]) / prev;
    require(a > Scalar(0) && a <= Scalar(1), Errc::bad_steps, "schedule alpha left (0, 1]");
    s.alpha_[t] = a;
    const Scalar bar = prev * a;
    require(bar < prev, Errc::bad_steps, "schedule alpha_bar not strictly decreasing");
    s.alpha_bar_[t] = bar;
    prev = bar;
  }
  return s;
}

/// One forward noising step: sqrt(a_t) x_prev + sqrt(1 - a_t) eps.
template <class Scalar, class DX, class DE>
typename DX::PlainObject forward_noise(const Eigen::MatrixBase<DX>& x_prev, int t,
                                       const NoiseScheduleT<Scalar>& sched,
                                       const Eigen::MatrixBase<DE>& eps) {
  sched.check_step(t);
  require(x_prev.rows() == eps.rows() && x_prev.cols() == eps.cols(), Errc::shape_mismatch,
          "noise shape differs from latent shape");
  const Scalar a = sched.alpha(t);
  using std::sqrt;
  return sqrt(a) * x_prev + sqrt(Scalar(1) - a) * eps;
}

/// Jump from x0 straight to step t: sqrt(abar_t) x0 + sqrt(1 - abar_t) eps.
template <class Scalar, class DX, class DE>
typename DX::PlainObject forward_noise_closed(const Eigen::MatrixBase<DX>& x0, int t,
                                              const NoiseScheduleT<Scalar>& sched,
                                              const Eigen::MatrixBase<DE>& eps) {
  sched.check_step(t);
  require(x0.rows() == eps.rows() && x0.cols() == eps.cols(), Errc::shape_mismatch,
          "noise shape differs from latent shape");
  const Scalar ab = sched.alpha_bar(t);
  using std::sqrt;
  return sqrt(ab) * x0 + sqrt(Scalar(1) - ab) * eps;
}

/// Recovers the x0 estimate from x_t and predicted noise:
/// (x_t - sqrt(1 - abar_t) eps_hat) / sqrt(abar_t).
template <class Scalar, class DX, class DE>
typename DX::PlainObject denoise_x0(const Eigen::MatrixBase<DX>& x_t, int t,
                                    const Eigen::MatrixBase<DE>& eps_hat,
                                    const NoiseScheduleT<Scalar>& sched) {
  sched.check_step(t);
  require(x_t.rows() == eps_hat.rows() && x_t.cols() == eps_hat.cols(), Errc::shape_mismatch,
          "predicted noise shape differs from latent shape");
  const Scalar ab = sched.alpha_bar(t);
  require(ab >= Scalar(1e-12), Errc::degenerate_alpha, "alpha_bar too small to invert");
  using std::sqrt;
  return (x_t - sqrt(Scalar(1) - ab) * eps_hat) / sqrt(ab);
}

}  // namespace gtsd
