#include "ubound/antiperiodic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ubound {

void ShootingConfig::validate() const {
  if (!(tau > 0.0)) throw ValidationError("shooting.tau must be positive");
  if (!(residual_tol > 0.0)) throw ValidationError("shooting.residual_tol must be positive");
  if (max_outer_iter < 1) throw ValidationError("shooting.max_outer_iter must be >= 1");
  if (!(fd_eps > 0.0)) throw ValidationError("shooting.fd_eps must be positive");
  if (!(picard_relaxation > 0.0 && picard_relaxation <= 1.0))
    throw ValidationError("shooting.picard_relaxation must lie in (0, 1]");
  if (picard_max_iter < 0) throw ValidationError("shooting.picard_max_iter must be >= 0");
  if (warm_start_periods < -1) throw ValidationError("shooting.warm_start_periods must be >= -1");
}

namespace {

StepperConfig aligned(const StepperConfig& stepper, double tau) {
  StepperConfig local = stepper;
  const double n = std::max(1.0, std::ceil(tau / stepper.dt - 1e-9));
  local.dt = tau / n;
  return local;
}

Eigen::VectorXd pack(const State& s) {
  Eigen::VectorXd x(s.u.size() + s.v.size());
  x << s.u, s.v;
  return x;
}

State unpack(const Eigen::VectorXd& x, int n) {
  return State{x.head(n), x.tail(n), 0.0};
}

RunOptions endpoints_only() {
  RunOptions options;
  options.observe_every = 1 << 30;
  return options;
}

double weighted_norm(const SpectralOperator& op, const Eigen::VectorXd& x) {
  const int n = op.num_modes();
  return std::sqrt((op.lambda().array() * x.head(n).array().square()).sum() + x.tail(n).squaredNorm());
}

void check_antiperiodic_forcing(const ForcingSignal& forcing, double tau) {
  const auto declared = forcing.antiperiod();
  if (!declared) throw ValidationError("forcing has no declared anti-period");
  if (std::abs(*declared - tau) > 1e-12 * tau)
    throw ValidationError("forcing anti-period " + std::to_string(*declared) + " differs from shooting tau " +
                          std::to_string(tau));
}

}  // namespace

State half_period_map(const SpectralOperator& op, const DampingOp& g, const ForcingSignal& forcing, const State& U0,
                      double tau, const StepperConfig& stepper) {
  check_antiperiodic_forcing(forcing, tau);
  State start = U0;
  start.t = 0.0;
  Trajectory traj = run(op, g, start, forcing, tau, aligned(stepper, tau), endpoints_only());
  traj.final_state.t = tau;
  return traj.final_state;
}

ShootResult shoot(const SpectralOperator& op, const DampingOp& g, const ForcingSignal& forcing,
                  const ShootingConfig& cfg, const StepperConfig& stepper, std::optional<State> initial_guess) {
  cfg.validate();
  stepper.validate();
  check_antiperiodic_forcing(forcing, cfg.tau);
  const int n = op.num_modes();
  const double tau = cfg.tau;

  ShootResult result;
  State guess = initial_guess.value_or(zero_state(op));
  guess.t = 0.0;
  const int warm = cfg.warm_start_periods >= 0 ? cfg.warm_start_periods : (g.max_alpha() > 0.0 ? 20 : 0);
  if (warm > 0) {
    // h is 2 tau periodic, so the state after whole periods is a guess for U(0).
    const StepperConfig local = aligned(stepper, tau);
    guess = run(op, g, guess, forcing, 2.0 * tau * warm, local, endpoints_only()).final_state;
    guess.t = 0.0;
    result.warm_start_used = true;
  }

  auto residual_of = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return pack(half_period_map(op, g, forcing, unpack(x, n), tau, stepper)) + x;
  };

  Eigen::VectorXd x = pack(guess);
  Eigen::VectorXd r = residual_of(x);
  double rnorm = weighted_norm(op, r);
  result.residual_history.push_back(rnorm);

  if (cfg.jacobian == JacobianMode::FiniteDifference) {
    for (int it = 0; it < cfg.max_outer_iter && rnorm >= cfg.residual_tol; ++it) {
      const double eps = cfg.fd_eps * (1.0 + weighted_norm(op, x));
      Eigen::MatrixXd jac(2 * n, 2 * n);
      parallel_for(static_cast<std::size_t>(2 * n), [&](std::size_t j) {
        Eigen::VectorXd xp = x;
        xp[static_cast<Eigen::Index>(j)] += eps;
        jac.col(static_cast<Eigen::Index>(j)) = (residual_of(xp) - r) / eps;
      });
      const Eigen::VectorXd dx = jac.fullPivLu().solve(r);
      double step = 1.0;
      Eigen::VectorXd trial = x - dx;
      Eigen::VectorXd rt = residual_of(trial);
      double tnorm = weighted_norm(op, rt);
      for (int ls = 0; ls < 30 && !(tnorm < rnorm); ++ls) {
        step *= 0.5;
        trial = x - step * dx;
        rt = residual_of(trial);
        tnorm = weighted_norm(op, rt);
      }
      ++result.iterations;
      if (!(tnorm < rnorm)) break;
      x = std::move(trial);
      r = std::move(rt);
      rnorm = tnorm;
      result.residual_history.push_back(rnorm);
    }
  }

  if (rnorm >= cfg.residual_tol && cfg.picard_max_iter > 0) {
    // S_tau is non-expansive and negation is an isometry, so this never increases the residual
    // for BackwardEuler with rho = 1.
    result.picard_used = true;
    const double rho = cfg.picard_relaxation;
    for (int it = 0; it < cfg.picard_max_iter && rnorm >= cfg.residual_tol; ++it) {
      const Eigen::VectorXd image = r - x;  // S_tau(x)
      x = (1.0 - rho) * x - rho * image;
      r = residual_of(x);
      rnorm = weighted_norm(op, r);
      result.residual_history.push_back(rnorm);
      ++result.iterations;
    }
  }

  result.U0 = unpack(x, n);
  result.residual = rnorm;
  if (!(rnorm < cfg.residual_tol))
    throw ShootingError("shooting did not converge after " + std::to_string(result.iterations) + " iterations" +
                            (result.warm_start_used ? " (warm start used)" : ""),
                        rnorm);
  return result;
}

std::vector<State> antiperiodic_trajectory(const SpectralOperator& op, const DampingOp& g,
                                           const ForcingSignal& forcing, const State& U0, double tau,
                                           const StepperConfig& stepper) {
  State start = U0;
  start.t = 0.0;
  RunOptions options;
  options.keep_states = true;
  return run(op, g, start, forcing, 2.0 * tau, aligned(stepper, tau), options).states;
}

AntiPeriodicCheck verify_antiperiodic(const SpectralOperator& op, std::span<const State> trajectory, double tau) {
  if (trajectory.size() < 3 || trajectory.size() % 2 == 0)
    throw ValidationError("verify_antiperiodic needs 2n+1 uniform samples of [0, 2 tau]");
  const std::size_t half = (trajectory.size() - 1) / 2;
  const double span = trajectory.back().t - trajectory.front().t;
  if (std::abs(span - 2.0 * tau) > 1e-9 * (1.0 + tau))
    throw ValidationError("trajectory does not span [0, 2 tau]");

  AntiPeriodicCheck check;
  for (std::size_t i = 0; i <= half; ++i) {
    const State& a = trajectory[i];
    const State& b = trajectory[i + half];
    const State negated{-a.u, -a.v, a.t};
    check.residual = std::max(check.residual, state_distance(op, b, negated));
  }
  // Trapezoid rule for the time average of u.
  ModalVector integral = op.zero();
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    const double dt = trajectory[i].t - trajectory[i - 1].t;
    integral += 0.5 * dt * (trajectory[i].u + trajectory[i - 1].u);
  }
  check.mean_H_norm = norm_H(op, integral / span);
  return check;
}

ForcingFamily eigenmode_oracle_family(const SpectralOperator& op, const DampingOp& g, int mode) {
  const ModalVector phi = op.unit(mode);
  const double lambda = op.lambda()[mode - 1];
  const double omega = std::sqrt(lambda);
  const double tau = std::numbers::pi / omega;
  // g(s phi) = sum_i c_i |s|^alpha_i s psi_i, with psi_i the image of the unit mode.
  struct Part {
    ModalVector psi;
    double alpha;
  };
  std::vector<Part> parts;
  for (const auto& term : g.terms()) {
    ModalVector psi = op.zero();
    switch (term.family) {
      case DampingFamily::AveragedH:
      case DampingFamily::LinearViscous:
        psi = term.c * phi;
        break;
      case DampingFamily::StructuralAveraged:
        psi = term.c * std::pow(op.mu()[mode - 1], 0.5 * term.alpha + 1.0) * phi;
        break;
      case DampingFamily::LocalPower:
        psi = apply_g(op, DampingOp(DampingFamily::LocalPower, term.c, term.alpha), phi);
        break;
    }
    parts.push_back({psi, term.alpha});
  }
  return [parts, omega, tau](double k) {
    std::vector<ForcingSignal> signals;
    for (const auto& p : parts)
      signals.push_back(ForcingSignal::power_of_sine(-p.psi, std::pow(k * omega, p.alpha + 1.0), omega, p.alpha + 1.0));
    ForcingSignal h = signals.size() == 1 ? signals.front() : ForcingSignal::sum(std::move(signals));
    return h.with_antiperiod(tau);
  };
}

AntiPeriodicSweep antiperiodic_exponent_sweep(const SpectralOperator& op, const DampingOp& g,
                                              const ForcingFamily& family, std::vector<double> amplitudes,
                                              NormKind norm_kind, const ShootingConfig& cfg,
                                              const StepperConfig& stepper) {
  cfg.validate();
  stepper.validate();
  if (norm_kind == NormKind::S2) throw ValidationError("anti-periodic sweeps use the Linf or L2period norm");
  if (norm_kind == NormKind::Linf && op.kind() != OperatorKind::Abstract)
    throw ValidationError("the L-infinity anti-periodic bound assumes V = H: use an Abstract operator");
  if (amplitudes.size() < 4) throw ValidationError("anti-periodic sweep needs >= 4 amplitudes");
  std::sort(amplitudes.begin(), amplitudes.end());

  AntiPeriodicSweep out;
  out.rows.resize(amplitudes.size());
  parallel_for(amplitudes.size(), [&](std::size_t i) {
    AntiPeriodicRow& row = out.rows[i];
    row.amplitude = amplitudes[i];
    const ForcingSignal h = family(amplitudes[i]);
    row.linf_norm = linf_norm(h, 2.0 * cfg.tau);
    row.l2_period_norm = l2_period_norm(h, cfg.tau);
    try {
      const ShootResult shot = shoot(op, g, h, cfg, stepper);
      row.shooting_residual = shot.residual;
      row.warm_start_used = shot.warm_start_used;
      row.U0 = shot.U0;
      const auto traj = antiperiodic_trajectory(op, g, h, shot.U0, cfg.tau, stepper);
      for (const auto& s : traj) row.M_hat = std::max(row.M_hat, 2.0 * energy(op, s));
      row.ok = true;
      row.status = "ok";
    } catch (const ShootingError& e) {
      row.shooting_residual = e.residual();
      row.status = e.what();
    } catch (const NumericalError& e) {
      row.status = e.what();
    }
  });

  for (const auto& r : out.rows) {
    SweepRow s;
    s.amplitude = r.amplitude;
    s.norm_kind = norm_kind;
    s.forcing_norm = norm_kind == NormKind::Linf ? r.linf_norm : r.l2_period_norm;
    s.M_hat = r.M_hat;
    s.ok = r.ok;
    s.status = r.status;
    out.fit.rows.push_back(s);
  }
  fit_upper_half(out.fit);
  return out;
}

}  // namespace ubound
