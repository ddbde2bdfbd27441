#include "ubound/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ubound {

std::string_view to_string(Scheme scheme) {
  return scheme == Scheme::BackwardEuler ? "BackwardEuler" : "ImplicitMidpoint";
}

Scheme scheme_from_string(std::string_view name) {
  if (name == "BackwardEuler") return Scheme::BackwardEuler;
  if (name == "ImplicitMidpoint") return Scheme::ImplicitMidpoint;
  throw ValidationError("unknown scheme '" + std::string(name) + "'");
}

std::string_view to_string(Fallback fallback) {
  return fallback == Fallback::FixedPoint ? "FixedPoint" : "ScalarBisection";
}

Fallback fallback_from_string(std::string_view name) {
  if (name == "FixedPoint") return Fallback::FixedPoint;
  if (name == "ScalarBisection" || name == "Bisection-on-scalar") return Fallback::ScalarBisection;
  throw ValidationError("unknown fallback '" + std::string(name) + "'");
}

void StepperConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("stepper.dt must be positive");
  if (!(newton_tol > 0.0)) throw ValidationError("stepper.newton_tol must be positive");
  if (newton_max_iter < 1) throw ValidationError("stepper.newton_max_iter must be >= 1");
}

double default_dt(const SpectralOperator& op) {
  return std::min(0.01, 0.1 / std::sqrt(op.lambda()[op.num_modes() - 1]));
}

double energy(const SpectralOperator& op, const State& s) {
  const double v2 = s.v.squaredNorm();
  const double u2 = (op.lambda().array() * s.u.array().square()).sum();
  return 0.5 * (v2 + u2);
}

double state_distance(const SpectralOperator& op, const State& a, const State& b) {
  const ModalVector du = a.u - b.u;
  const ModalVector dv = a.v - b.v;
  return std::sqrt((op.lambda().array() * du.array().square()).sum() + dv.squaredNorm());
}

double state_norm(const SpectralOperator& op, const State& s) {
  return std::sqrt(2.0 * energy(op, s));
}

State zero_state(const SpectralOperator& op, double t) {
  return State{op.zero(), op.zero(), t};
}

namespace {

struct ResidualEval {
  ModalVector r;
  double norm = 0.0;
  double scale = 1.0;  // magnitude of the terms, for the relative tolerance
};

ResidualEval residual(const SpectralOperator& op, const DampingOp& g, double beta, double theta, const ModalVector& b,
                      const ModalVector& x) {
  const ModalVector ax = beta * op.lambda().cwiseProduct(x);
  const ModalVector gx = theta * apply_g(op, g, x);
  ResidualEval out;
  out.r = x + ax + gx - b;
  out.norm = out.r.norm();
  out.scale = 1.0 + b.norm() + x.norm() + ax.norm() + gx.norm();
  return out;
}

enum class AveragedKind { None, H, Structural };

AveragedKind averaged_kind(const DampingOp& g) {
  const auto family = g.terms().front().family;
  for (const auto& t : g.terms())
    if (t.family != family) return AveragedKind::None;
  if (family == DampingFamily::AveragedH || family == DampingFamily::LinearViscous) return AveragedKind::H;
  if (family == DampingFamily::StructuralAveraged) return AveragedKind::Structural;
  return AveragedKind::None;
}

// Root of an increasing function on [lo, hi] with phi(lo) <= 0 <= phi(hi), to machine precision.
template <class F>
double increasing_root(F&& phi, double lo, double hi) {
  double flo = phi(lo), fhi = phi(hi);
  if (flo >= 0.0) return lo;
  if (fhi <= 0.0) return hi;
  int side = 0;
  for (int it = 0; it < 300; ++it) {
    // Illinois regula falsi, with a bisection step whenever it stalls.
    double x = (lo * fhi - hi * flo) / (fhi - flo);
    if (!(x > lo && x < hi) || it % 4 == 3) x = 0.5 * (lo + hi);
    if (x <= lo || x >= hi) break;
    const double fx = phi(x);
    if (fx == 0.0) return x;
    if (fx < 0.0) {
      lo = x;
      flo = fx;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = x;
      fhi = fx;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

// Averaged families reduce to one scalar unknown: x_k = b_k / (1 + beta lambda_k + theta F),
// where F depends on x only through |x|_H (AveragedH) or sum mu_k x_k^2 (Structural).
ModalVector solve_scalar(const SpectralOperator& op, const DampingOp& g, double beta, double theta,
                         const ModalVector& b, AveragedKind kind) {
  const Eigen::ArrayXd base = 1.0 + beta * op.lambda().array();
  const Eigen::ArrayXd bb = b.array();
  if (kind == AveragedKind::H) {
    auto factor = [&](double s) {
      double f = 0.0;
      for (const auto& t : g.terms()) f += t.c * (t.alpha == 0.0 ? 1.0 : std::pow(s, t.alpha));
      return f;
    };
    auto phi = [&](double s) { return s - (bb / (base + theta * factor(s))).matrix().norm(); };
    const double s = increasing_root(phi, 0.0, b.norm());
    return (bb / (base + theta * factor(s))).matrix();
  }
  const Eigen::ArrayXd mu = op.mu().array();
  auto factor = [&](double sigma) {
    double f = 0.0;
    for (const auto& t : g.terms()) f += t.c * (t.alpha == 0.0 ? 1.0 : std::pow(sigma, 0.5 * t.alpha));
    return f;
  };
  auto phi = [&](double sigma) {
    const Eigen::ArrayXd x = bb / (base + theta * factor(sigma) * mu);
    return sigma - (mu * x.square()).sum();
  };
  const double sigma = increasing_root(phi, 0.0, (mu * bb.square()).sum());
  return (bb / (base + theta * factor(sigma) * mu)).matrix();
}

// Damped Newton with the exact Jacobian; returns true when the tolerance is met.
bool newton(const SpectralOperator& op, const DampingOp& g, double beta, double theta, const ModalVector& b,
            ModalVector& x, const StepperConfig& cfg, ResidualEval& res) {
  res = residual(op, g, beta, theta, b, x);
  bool converged = res.norm <= cfg.newton_tol * res.scale;
  for (int it = 0; it < cfg.newton_max_iter && res.norm > 0.0; ++it) {
    Eigen::MatrixXd jac = theta * jacobian_g(op, g, x);
    jac.diagonal().array() += 1.0 + beta * op.lambda().array();
    Eigen::LLT<Eigen::MatrixXd> llt(jac);
    const ModalVector dx = llt.info() == Eigen::Success ? ModalVector(llt.solve(res.r))
                                                        : ModalVector(jac.partialPivLu().solve(res.r));
    double step = 1.0;
    ModalVector trial = x - dx;
    ResidualEval tres = residual(op, g, beta, theta, b, trial);
    for (int ls = 0; ls < 40 && !(tres.norm < res.norm); ++ls) {
      step *= 0.5;
      trial = x - step * dx;
      tres = residual(op, g, beta, theta, b, trial);
    }
    if (!(tres.norm < res.norm)) break;  // no further progress possible
    x = std::move(trial);
    res = std::move(tres);
    if (converged) break;  // one polishing iteration past the tolerance
    converged = res.norm <= cfg.newton_tol * res.scale;
    // Quadratic convergence leaves the residual at rounding level after one more step.
    if (converged && res.norm <= 1e-15 * res.scale) break;
  }
  return res.norm <= cfg.newton_tol * res.scale;
}

}  // namespace

ModalVector solve_resolvent(const SpectralOperator& op, const DampingOp& g, double beta, double theta,
                            const ModalVector& b, const ModalVector& x0, const StepperConfig& cfg, double t) {
  const AveragedKind kind = averaged_kind(g);
  ModalVector x = x0;
  ResidualEval res;
  if (kind != AveragedKind::None && cfg.fallback == Fallback::ScalarBisection) {
    x = solve_scalar(op, g, beta, theta, b, kind);
    res = residual(op, g, beta, theta, b, x);
    if (res.norm <= cfg.newton_tol * res.scale) return x;
  }
  if (newton(op, g, beta, theta, b, x, cfg, res)) return x;

  if (kind != AveragedKind::None) {
    x = solve_scalar(op, g, beta, theta, b, kind);
    res = residual(op, g, beta, theta, b, x);
    if (res.norm <= cfg.newton_tol * res.scale) return x;
  } else if (cfg.fallback == Fallback::FixedPoint) {
    // Preconditioned Richardson x <- x - (I + beta A)^{-1} r, restarted into Newton.
    const Eigen::ArrayXd base = 1.0 + beta * op.lambda().array();
    for (int it = 0; it < 20 * cfg.newton_max_iter; ++it) {
      x = x - (res.r.array() / base).matrix();
      res = residual(op, g, beta, theta, b, x);
      if (res.norm <= cfg.newton_tol * res.scale) return x;
    }
    if (newton(op, g, beta, theta, b, x, cfg, res)) return x;
  }
  throw StepError("implicit solve did not converge", t, res.norm);
}

StepOutcome step_with_ledger(const SpectralOperator& op, const DampingOp& g, const State& state,
                             const ForcingSignal& forcing, const StepperConfig& cfg) {
  op.check_dim(state.u);
  op.check_dim(state.v);
  const double dt = cfg.dt;
  StepOutcome out;
  if (cfg.scheme == Scheme::BackwardEuler) {
    // (I + dt^2 A) v+ + dt g(v+) = v + dt (h(t+dt) - A u)
    const ModalVector h = forcing.eval(state.t + dt);
    const ModalVector b = state.v + dt * (h - apply_A(op, state.u));
    const ModalVector vp = solve_resolvent(op, g, dt * dt, dt, b, state.v, cfg, state.t);
    out.next = State{state.u + dt * vp, vp, state.t + dt};
    out.work = dt * h.dot(vp);
    out.dissipation = dt * dissipation(op, g, vp);
  } else {
    // Midpoint velocity m = (v + v+)/2:
    // (I + dt^2/4 A) m + dt/2 g(m) = v + dt/2 (h(t+dt/2) - A u)
    const ModalVector h = forcing.eval(state.t + 0.5 * dt);
    const ModalVector b = state.v + (0.5 * dt) * (h - apply_A(op, state.u));
    const ModalVector m = solve_resolvent(op, g, 0.25 * dt * dt, 0.5 * dt, b, state.v, cfg, state.t);
    out.next = State{state.u + dt * m, 2.0 * m - state.v, state.t + dt};
    out.work = dt * h.dot(m);
    out.dissipation = dt * dissipation(op, g, m);
  }
  return out;
}

State step(const SpectralOperator& op, const DampingOp& g, const State& state, const ForcingSignal& forcing,
           const StepperConfig& cfg) {
  return step_with_ledger(op, g, state, forcing, cfg).next;
}

Trajectory run(const SpectralOperator& op, const DampingOp& g, const State& state0, const ForcingSignal& forcing,
               double T, const StepperConfig& cfg, const RunOptions& options) {
  cfg.validate();
  if (!(T > 0.0)) throw ValidationError("run horizon T must be positive");
  if (options.observe_every < 1) throw ValidationError("observe_every must be >= 1");
  op.check_dim(state0.u);
  op.check_dim(state0.v);

  const long steps = std::max(1L, static_cast<long>(std::ceil(T / cfg.dt - 1e-9)));
  StepperConfig local = cfg;
  local.dt = T / static_cast<double>(steps);

  Trajectory traj;
  auto record = [&](const State& s, double diss, double work) {
    const double E = energy(op, s);
    EnergyRecord rec{s.t, E, 2.0 * E, diss, work};
    traj.ledger.push_back(rec);
    if (options.keep_states) traj.states.push_back(s);
    if (options.on_record) options.on_record(rec);
  };

  State s = state0;
  record(s, 0.0, 0.0);
  double diss_acc = 0.0, work_acc = 0.0;
  double E_prev = energy(op, s);
  for (long n = 0; n < steps; ++n) {
    StepOutcome out;
    try {
      out = step_with_ledger(op, g, s, forcing, local);
    } catch (const StepError& e) {
      traj.final_state = s;
      throw RunAborted(e, std::move(traj));
    }
    // Exact time bookkeeping avoids drift over long runs.
    out.next.t = state0.t + local.dt * static_cast<double>(n + 1);
    s = std::move(out.next);
    diss_acc += out.dissipation;
    work_acc += out.work;
    const double E = energy(op, s);
    traj.max_step_defect = std::max(traj.max_step_defect, (E - E_prev) - (out.work - out.dissipation));
    E_prev = E;
    if ((n + 1) % options.observe_every == 0 || n + 1 == steps) {
      record(s, diss_acc, work_acc);
      diss_acc = work_acc = 0.0;
    }
  }
  traj.final_state = s;
  return traj;
}

ContractionReport contraction_check(const SpectralOperator& op, const DampingOp& g, const State& a, const State& b,
                                    const ForcingSignal& forcing_a, const ForcingSignal& forcing_b, double T,
                                    const StepperConfig& cfg) {
  cfg.validate();
  if (cfg.scheme != Scheme::BackwardEuler) throw ValidationError("contraction_check requires BackwardEuler");
  if (!(T > 0.0)) throw ValidationError("contraction horizon T must be positive");
  const long steps = std::max(1L, static_cast<long>(std::ceil(T / cfg.dt - 1e-9)));
  StepperConfig local = cfg;
  local.dt = T / static_cast<double>(steps);

  ContractionReport report;
  State sa = a, sb = b;
  double dist = state_distance(op, sa, sb);
  report.initial_distance = dist;
  for (long n = 0; n < steps; ++n) {
    const double t_eval = sa.t + local.dt;
    report.forcing_integral += local.dt * (forcing_a.eval(t_eval) - forcing_b.eval(t_eval)).norm();
    sa = step(op, g, sa, forcing_a, local);
    sb = step(op, g, sb, forcing_b, local);
    const double next = state_distance(op, sa, sb);
    const double ratio = dist > 0.0 ? next / dist : (next > 0.0 ? INFINITY : 0.0);
    report.max_ratio = std::max(report.max_ratio, ratio);
    dist = next;
  }
  report.final_distance = dist;
  return report;
}

}  // namespace ubound
