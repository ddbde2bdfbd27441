#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "test_support.hpp"
#include "ubound/antiperiodic.hpp"
#include "ubound/errors.hpp"

using namespace ubound;

namespace {

constexpr double kPi = std::numbers::pi;

SpectralOperator oscillator() {
  return make_operator(OperatorKind::Abstract, 1, kPi, std::vector<double>{1.0});
}

StepperConfig fine_midpoint() {
  StepperConfig cfg;
  cfg.dt = 1e-3;
  return cfg;
}

// x(t) for x' = [[0, 1], [-1, -gamma]] x + (0, a sin(omega t)), via the exponential of the
// system augmented with the (sin, cos) generator.
Eigen::Vector2d linear_flow(double gamma, double a, double omega, const Eigen::Vector2d& x0, double t) {
  Eigen::Matrix4d G = Eigen::Matrix4d::Zero();
  G(0, 1) = 1.0;
  G(1, 0) = -1.0;
  G(1, 1) = -gamma;
  G(1, 2) = a;
  G(2, 3) = omega;
  G(3, 2) = -omega;
  const Eigen::Vector4d z0(x0[0], x0[1], 0.0, 1.0);
  const Eigen::Vector4d z = (G * t).exp() * z0;
  return z.head<2>();
}

}  // namespace

TEST_CASE("half-period map of the linear oscillator matches the matrix exponential") {
  const auto op = oscillator();
  const DampingOp g(DampingFamily::AveragedH, 0.7, 0.0);
  const auto h = ForcingSignal::sinusoidal(op.unit(1), 2.0, 1.0).with_antiperiod(kPi);
  const State U0{ModalVector::Constant(1, 0.4), ModalVector::Constant(1, -1.2), 0.0};
  const State U = half_period_map(op, g, h, U0, kPi, fine_midpoint());
  const Eigen::Vector2d x = linear_flow(0.7, 2.0, 1.0, Eigen::Vector2d(0.4, -1.2), kPi);
  CHECK(std::abs(U.u[0] - x[0]) < 1e-6);
  CHECK(std::abs(U.v[0] - x[1]) < 1e-6);
  CHECK(U.t == doctest::Approx(kPi));
}

TEST_CASE("half-period map of rest without forcing is rest") {
  const auto op = make_operator(OperatorKind::Wave1D, 3);
  const DampingOp g(DampingFamily::LocalPower, 1.0, 2.0);
  const auto h = ForcingSignal::zero(3).with_antiperiod(1.0);
  const State U = half_period_map(op, g, h, zero_state(op), 1.0, StepperConfig{});
  CHECK(state_norm(op, U) == 0.0);
  CHECK_THROWS_AS(half_period_map(op, g, ForcingSignal::zero(3), zero_state(op), 1.0, StepperConfig{}),
                  ValidationError);
  CHECK_THROWS_AS(half_period_map(op, g, h, zero_state(op), 2.0, StepperConfig{}), ValidationError);
}

TEST_CASE("eigenmode family: the cosine mode is mapped to its negative") {
  const auto op = oscillator();
  const DampingOp g(DampingFamily::AveragedH, 1.0, 2.0);
  const auto family = eigenmode_oracle_family(op, g);
  for (double k : {1.0, 2.0}) {
    const State U0{ModalVector::Constant(1, k), ModalVector::Zero(1), 0.0};
    const State U = half_period_map(op, g, family(k), U0, kPi, fine_midpoint());
    CHECK(std::abs(U.u[0] + k) < 1e-6);
    CHECK(std::abs(U.v[0]) < 1e-6);
  }
}

TEST_CASE("eigenmode family on a higher wave mode with local damping") {
  const auto op = make_operator(OperatorKind::Wave1D, 3);
  const DampingOp g(DampingFamily::LocalPower, 1.0, 2.0);
  const auto family = eigenmode_oracle_family(op, g, 2);
  const auto h = family(1.0);
  REQUIRE(h.antiperiod());
  CHECK(*h.antiperiod() == doctest::Approx(kPi / 2.0));
  StepperConfig cfg;
  cfg.dt = 2e-4;
  const State U0{op.unit(2), op.zero(), 0.0};
  const State U = half_period_map(op, g, h, U0, kPi / 2.0, cfg);
  CHECK(state_distance(op, U, State{-op.unit(2), op.zero(), 0.0}) < 1e-5);
}

TEST_CASE("shooting recovers the cubic eigenmode solution") {
  const auto op = oscillator();
  const DampingOp g(DampingFamily::AveragedH, 1.0, 2.0);
  const auto family = eigenmode_oracle_family(op, g);
  ShootingConfig cfg;
  for (double k : {1.0, 4.0}) {
    const auto shot = shoot(op, g, family(k), cfg, fine_midpoint());
    CHECK(shot.residual < cfg.residual_tol);
    CHECK(shot.warm_start_used);
    CHECK(std::abs(shot.U0.u[0] - k) < 1e-6 * k);
    CHECK(std::abs(shot.U0.v[0]) < 1e-6 * k);
  }
}

TEST_CASE("shooting recovers the linear particular solution") {
  const auto op = oscillator();
  const double gamma = 0.5, a = 3.0, omega = 3.0;
  const DampingOp g(DampingFamily::AveragedH, gamma, 0.0);
  const auto h = ForcingSignal::sinusoidal(op.unit(1), a, omega).with_antiperiod(kPi);
  // u = R sin(omega t - phi)
  const double R = a / std::hypot(1.0 - omega * omega, gamma * omega);
  const double phi = std::atan2(gamma * omega, 1.0 - omega * omega);
  const auto shot = shoot(op, g, h, ShootingConfig{}, fine_midpoint());
  CHECK(shot.U0.u[0] == doctest::Approx(-R * std::sin(phi)).epsilon(1e-6));
  CHECK(shot.U0.v[0] == doctest::Approx(R * omega * std::cos(phi)).epsilon(1e-6));
}

TEST_CASE("unforced anti-periodic solution is rest") {
  const auto op = make_operator(OperatorKind::Wave1D, 3);
  const DampingOp g(DampingFamily::AveragedH, 1.0, 0.0);
  const auto h = ForcingSignal::zero(3).with_antiperiod(kPi);
  const auto shot = shoot(op, g, h, ShootingConfig{}, StepperConfig{});
  CHECK(state_norm(op, shot.U0) < 1e-12);
}

TEST_CASE("Picard iteration alone converges for backward Euler") {
  const auto op = oscillator();
  const DampingOp g(DampingFamily::AveragedH, 1.0, 0.0);
  const auto h = ForcingSignal::sinusoidal(op.unit(1), 1.0, 1.0).with_antiperiod(kPi);
  ShootingConfig cfg;
  cfg.jacobian = JacobianMode::PicardOnly;
  cfg.residual_tol = 1e-8;
  StepperConfig stepper;
  stepper.scheme = Scheme::BackwardEuler;
  const auto shot = shoot(op, g, h, cfg, stepper);
  CHECK(shot.picard_used);
  CHECK(shot.residual < 1e-8);
  for (std::size_t i = 1; i < shot.residual_history.size(); ++i)
    CHECK(shot.residual_history[i] <= shot.residual_history[i - 1] * (1.0 + 1e-12));
}

TEST_CASE("shooting reports non-convergence with its residual") {
  const auto op = oscillator();
  const DampingOp g(DampingFamily::AveragedH, 1.0, 2.0);
  ShootingConfig cfg;
  cfg.jacobian = JacobianMode::PicardOnly;
  cfg.picard_max_iter = 1;
  cfg.warm_start_periods = 0;
  try {
    shoot(op, g, eigenmode_oracle_family(op, g)(5.0), cfg, StepperConfig{});
    FAIL("expected a ShootingError");
  } catch (const ShootingError& e) {
    CHECK(e.residual() > cfg.residual_tol);
  }
}

TEST_CASE("verify_antiperiodic on exact and constant trajectories") {
  const auto op = oscillator();
  const int half = 400;
  std::vector<State> exact, constant;
  for (int i = 0; i <= 2 * half; ++i) {
    const double t = kPi * i / half;
    exact.push_back(State{ModalVector::Constant(1, 3.0 * std::cos(t)), ModalVector::Constant(1, -3.0 * std::sin(t)), t});
    constant.push_back(State{ModalVector::Constant(1, 2.0), ModalVector::Zero(1), t});
  }
  const auto a = verify_antiperiodic(op, exact, kPi);
  CHECK(a.residual < 1e-6);
  CHECK(a.mean_H_norm < 1e-8);
  const auto b = verify_antiperiodic(op, constant, kPi);
  CHECK(b.residual == doctest::Approx(2.0 * state_norm(op, constant.front())));
  CHECK(b.mean_H_norm == doctest::Approx(2.0));
  CHECK_THROWS_AS(verify_antiperiodic(op, std::span<const State>(exact).first(2 * half), kPi), ValidationError);
}

TEST_CASE("shooting closes: re-integrated output is anti-periodic with zero mean") {
  const auto op = make_operator(OperatorKind::Wave1D, 4);
  const DampingOp g(DampingFamily::AveragedH, 1.0, 2.0);
  const auto h = ForcingSignal::sum({ForcingSignal::sinusoidal(op.unit(1), 3.0, 1.0),
                                     ForcingSignal::sinusoidal(op.unit(2), 1.0, 3.0, 0.4)})
                     .with_antiperiod(kPi);
  ShootingConfig cfg;
  const auto shot = shoot(op, g, h, cfg, StepperConfig{});
  const auto traj = antiperiodic_trajectory(op, g, h, shot.U0, kPi, StepperConfig{});
  CHECK(traj.size() % 2 == 1);
  const auto check = verify_antiperiodic(op, traj, kPi);
  CHECK(check.residual < 10.0 * cfg.residual_tol);
  double sup = 0.0;
  for (const auto& s : traj) sup = std::max(sup, norm_H(op, s.u));
  CHECK(check.mean_H_norm < 1e-6 * (1.0 + sup));
}

TEST_CASE("anti-periodic exponent sweep on the eigenmode family") {
  const auto op = oscillator();
  std::vector<double> amps;
  for (int i = 0; i < 8; ++i) amps.push_back(std::ldexp(1.0, i));
  StepperConfig stepper;
  stepper.dt = 1e-3;

  const DampingOp cubic(DampingFamily::AveragedH, 1.0, 2.0);
  const auto sweep = antiperiodic_exponent_sweep(op, cubic, eigenmode_oracle_family(op, cubic), amps, NormKind::Linf,
                                                 ShootingConfig{}, stepper);
  REQUIRE(sweep.fit.fit_ok);
  CHECK(sweep.fit.fitted_slope == doctest::Approx(2.0 / 3.0).epsilon(0.02 / (2.0 / 3.0)));
  for (const auto& r : sweep.rows) {
    CHECK(r.ok);
    CHECK(r.linf_norm == doctest::Approx(std::pow(r.amplitude, 3)).epsilon(1e-9));
    CHECK(r.M_hat == doctest::Approx(r.amplitude * r.amplitude).epsilon(1e-4));
  }

  const DampingOp linear(DampingFamily::AveragedH, 1.0, 0.0);
  const auto control = antiperiodic_exponent_sweep(op, linear, eigenmode_oracle_family(op, linear), amps,
                                                   NormKind::Linf, ShootingConfig{}, stepper);
  REQUIRE(control.fit.fit_ok);
  CHECK(control.fit.fitted_slope == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("anti-periodic sweep preconditions") {
  const auto wave = make_operator(OperatorKind::Wave1D, 2);
  const DampingOp g(DampingFamily::AveragedH, 1.0, 2.0);
  const auto family = eigenmode_oracle_family(wave, g);
  const std::vector<double> amps{1, 2, 4, 8};
  CHECK_THROWS_AS(antiperiodic_exponent_sweep(wave, g, family, amps, NormKind::Linf, ShootingConfig{}, StepperConfig{}),
                  ValidationError);
  CHECK_THROWS_AS(antiperiodic_exponent_sweep(wave, g, family, amps, NormKind::S2, ShootingConfig{}, StepperConfig{}),
                  ValidationError);
  CHECK_THROWS_AS(antiperiodic_exponent_sweep(wave, g, family, {1, 2, 4}, NormKind::L2period, ShootingConfig{},
                                              StepperConfig{}),
                  ValidationError);
}
