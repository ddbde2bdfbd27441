#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ubound/bounds.hpp"
#include "ubound/damping.hpp"
#include "ubound/forcing.hpp"
#include "ubound/integrator.hpp"

namespace ubound {

enum class JacobianMode { FiniteDifference, PicardOnly };

struct ShootingConfig {
  double tau = 3.14159265358979323846;
  double residual_tol = 1e-9;  // in the V x H norm
  int max_outer_iter = 60;
  JacobianMode jacobian = JacobianMode::FiniteDifference;
  double fd_eps = 1e-6;  // scaled by 1 + |U0|
  double picard_relaxation = 1.0;
  int picard_max_iter = 2000;
  // Number of 2 tau periods integrated from rest before Newton starts; -1 picks
  // 20 for dampings that degenerate at zero (alpha > 0) and 0 otherwise.
  int warm_start_periods = -1;

  void validate() const;
};

// U(tau) for the trajectory started at U0 (time reset to 0).
State half_period_map(const SpectralOperator& op, const DampingOp& g, const ForcingSignal& forcing, const State& U0,
                      double tau, const StepperConfig& stepper);

struct ShootResult {
  State U0;
  double residual = 0.0;  // |S_tau(U0) + U0| in V x H
  int iterations = 0;
  bool warm_start_used = false;
  bool picard_used = false;
  std::vector<double> residual_history;
};

/// Solves S_tau(U0) + U0 = 0 by damped Newton with a forward-difference Jacobian,
/// falling back to relaxed Picard iteration U0 <- (1 - rho) U0 - rho S_tau(U0).
/// Throws ShootingError if the residual tolerance is not reached.
ShootResult shoot(const SpectralOperator& op, const DampingOp& g, const ForcingSignal& forcing,
                  const ShootingConfig& cfg, const StepperConfig& stepper,
                  std::optional<State> initial_guess = std::nullopt);

// States on [0, 2 tau] with an integer number of steps per half period.
std::vector<State> antiperiodic_trajectory(const SpectralOperator& op, const DampingOp& g,
                                           const ForcingSignal& forcing, const State& U0, double tau,
                                           const StepperConfig& stepper);

struct AntiPeriodicCheck {
  double residual = 0.0;     // max_t |U(t + tau) + U(t)| in V x H
  double mean_H_norm = 0.0;  // |time average of u over [0, 2 tau]|_H
};

// trajectory: uniform samples of [0, 2 tau] with an even number of intervals.
AntiPeriodicCheck verify_antiperiodic(const SpectralOperator& op, std::span<const State> trajectory, double tau);

// h_k(t) = g(-k sqrt(lambda) sin(sqrt(lambda) t) phi) for the eigenmode phi = e_mode,
// whose exact solution is u_k(t) = k cos(sqrt(lambda) t) phi. Declared anti-periodic
// with tau = pi / sqrt(lambda).
ForcingFamily eigenmode_oracle_family(const SpectralOperator& op, const DampingOp& g, int mode = 1);

struct AntiPeriodicRow {
  double amplitude = 0.0;
  double linf_norm = 0.0;
  double l2_period_norm = 0.0;
  double M_hat = 0.0;
  double shooting_residual = 0.0;
  bool warm_start_used = false;
  bool ok = false;
  std::string status;
  State U0;  // converged anti-periodic initial state, when ok
};

struct AntiPeriodicSweep {
  std::vector<AntiPeriodicRow> rows;
  SweepResult fit;  // M_hat against the requested norm
};

// NormKind::Linf requires an Abstract (V = H) operator; NormKind::S2 is rejected.
AntiPeriodicSweep antiperiodic_exponent_sweep(const SpectralOperator& op, const DampingOp& g,
                                              const ForcingFamily& family, std::vector<double> amplitudes,
                                              NormKind norm_kind, const ShootingConfig& cfg,
                                              const StepperConfig& stepper);

}  // namespace ubound
