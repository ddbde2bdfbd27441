#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "ubound/damping.hpp"
#include "ubound/errors.hpp"
#include "ubound/forcing.hpp"
#include "ubound/spectral_model.hpp"

namespace ubound {

// A point (u, u') of the phase space V x H at time t.
struct State {
  ModalVector u;
  ModalVector v;
  double t = 0.0;
};

enum class Scheme { BackwardEuler, ImplicitMidpoint };
enum class Fallback { FixedPoint, ScalarBisection };

std::string_view to_string(Scheme scheme);
Scheme scheme_from_string(std::string_view name);
std::string_view to_string(Fallback fallback);
Fallback fallback_from_string(std::string_view name);

struct StepperConfig {
  double dt = 0.01;
  Scheme scheme = Scheme::ImplicitMidpoint;
  // Residual tolerance of the implicit solve, relative to the magnitude of its terms.
  double newton_tol = 1e-12;
  int newton_max_iter = 50;
  Fallback fallback = Fallback::ScalarBisection;

  void validate() const;
};

// min(0.01, 0.1 / sqrt(lambda_N)): resolves the fastest mode.
double default_dt(const SpectralOperator& op);

struct EnergyRecord {
  double t = 0.0;
  double E = 0.0;
  double Phi = 0.0;  // 2 E = |v|_H^2 + |u|_V^2
  // Discrete dissipation and work accumulated since the previous record.
  double dissipation_increment = 0.0;
  double work_increment = 0.0;
};

double energy(const SpectralOperator& op, const State& s);
// Distance in V x H: sqrt(|du|_V^2 + |dv|_H^2).
double state_distance(const SpectralOperator& op, const State& a, const State& b);
double state_norm(const SpectralOperator& op, const State& s);
State zero_state(const SpectralOperator& op, double t = 0.0);

/// Solves (I + beta A) x + theta g(x) = b, the resolvent equation behind both
/// implicit schemes. x0 is the initial guess. Throws StepError if neither Newton
/// nor the configured fallback reaches the tolerance.
ModalVector solve_resolvent(const SpectralOperator& op, const DampingOp& g, double beta, double theta,
                            const ModalVector& b, const ModalVector& x0, const StepperConfig& cfg, double t = 0.0);

struct StepOutcome {
  State next;
  double work = 0.0;         // dt (h, w) at the scheme's evaluation point
  double dissipation = 0.0;  // dt <g(w), w>
};

/// One implicit step.
///   BackwardEuler:    u+ = u + dt v+,        v+ + dt (A u+ + g(v+)) = v + dt h(t+dt)
///   ImplicitMidpoint: the same with A and g evaluated at the midpoint values and h at t + dt/2
StepOutcome step_with_ledger(const SpectralOperator& op, const DampingOp& g, const State& state,
                             const ForcingSignal& forcing, const StepperConfig& cfg);

State step(const SpectralOperator& op, const DampingOp& g, const State& state, const ForcingSignal& forcing,
           const StepperConfig& cfg);

struct RunOptions {
  int observe_every = 1;
  bool keep_states = false;
  std::function<void(const EnergyRecord&)> on_record;
};

struct Trajectory {
  std::vector<EnergyRecord> ledger;  // first record is the initial state
  std::vector<State> states;         // recorded states, when requested
  State final_state;
  // Sum over all steps of (E_{n+1} - E_n) - (work - dissipation); zero up to
  // rounding for ImplicitMidpoint and <= 0 for BackwardEuler.
  double max_step_defect = -INFINITY;
};

// Raised when a step fails mid-run; carries the ledger up to the failure.
class RunAborted : public StepError {
 public:
  RunAborted(const StepError& cause, Trajectory partial)
      : StepError(std::string("run aborted: ") + cause.what(), cause.time(), cause.residual()),
        partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

// Integrates over [t0, t0 + T]; dt is shrunk so the steps land exactly on t0 + T.
Trajectory run(const SpectralOperator& op, const DampingOp& g, const State& state0, const ForcingSignal& forcing,
               double T, const StepperConfig& cfg, const RunOptions& options = {});

struct ContractionReport {
  double max_ratio = 0.0;        // max_n dist_{n+1} / dist_n
  double initial_distance = 0.0;
  double final_distance = 0.0;
  double forcing_integral = 0.0;  // sum dt |hA - hB|_H at the scheme's evaluation times
};

// Runs two BackwardEuler trajectories side by side.
ContractionReport contraction_check(const SpectralOperator& op, const DampingOp& g, const State& a, const State& b,
                                    const ForcingSignal& forcing_a, const ForcingSignal& forcing_b, double T,
                                    const StepperConfig& cfg);

inline ContractionReport contraction_check(const SpectralOperator& op, const DampingOp& g, const State& a,
                                           const State& b, const ForcingSignal& forcing, double T,
                                           const StepperConfig& cfg) {
  return contraction_check(op, g, a, b, forcing, forcing, T, cfg);
}

}  // namespace ubound
