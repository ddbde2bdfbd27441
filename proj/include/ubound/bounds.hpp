#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ubound/damping.hpp"
#include "ubound/forcing.hpp"
#include "ubound/integrator.hpp"

namespace ubound {

struct BoundConfig {
  double T_total = 400.0;
  double burn_in_fraction = 0.5;
  int window_count = 4;
  // Relative spread allowed between the per-window maxima of the tail.
  double window_agreement_tol = 0.05;
  // Relative agreement required between the dt and dt/2 estimates.
  double dt_refinement_tol = 0.02;
  // Maxima below this are treated as zero by both agreement tests.
  double absolute_floor = 1e-9;
  bool refine = true;

  void validate() const;
};

struct BoundEstimate {
  double M_hat = 0.0;
  std::vector<double> window_maxima;
  double M_refined = 0.0;  // dt/2 estimate, when refine is on
};

/// Tail maximum of Phi = |u'|^2 + |u|_V^2 after the burn-in, the finite-time
/// stand-in for limsup Phi. Throws NonStationaryError when the tail windows or
/// the dt/2 rerun disagree beyond tolerance.
BoundEstimate estimate_ultimate_bound_detail(const SpectralOperator& op, const DampingOp& g,
                                             const ForcingSignal& forcing, const State& state0,
                                             const BoundConfig& cfg, const StepperConfig& stepper);

double estimate_ultimate_bound(const SpectralOperator& op, const DampingOp& g, const ForcingSignal& forcing,
                               const State& state0, const BoundConfig& cfg, const StepperConfig& stepper);

enum class NormKind { S2, Linf, L2period };
std::string_view to_string(NormKind kind);
NormKind norm_kind_from_string(std::string_view name);

// horizon is the S2/Linf horizon; L2period uses the signal's declared anti-period.
double forcing_norm(const ForcingSignal& h, NormKind kind, double horizon);

struct SweepRow {
  double amplitude = 0.0;
  NormKind norm_kind = NormKind::S2;
  double forcing_norm = 0.0;
  double M_hat = 0.0;
  bool ok = false;
  std::string status;  // "ok" or the rejection message
};

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Least squares of log y on log x.
LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y);

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by amplitude
  double fitted_slope = 0.0;
  double fitted_intercept = 0.0;
  double r_squared = 0.0;
  bool fit_ok = false;
  std::string fit_message;
};

// Fits over the upper half of the rows (by amplitude); needs >= 4 valid rows there.
void fit_upper_half(SweepResult& sweep);

using ForcingFamily = std::function<ForcingSignal(double amplitude)>;
using StateFamily = std::function<State(double amplitude)>;

/// Estimates M_hat for each amplitude (rows run in parallel) and fits the
/// log-log slope of M_hat against the chosen forcing norm.
SweepResult amplitude_sweep(const SpectralOperator& op, const DampingOp& g, const ForcingFamily& family,
                            std::vector<double> amplitudes, NormKind norm_kind, const BoundConfig& cfg,
                            const StepperConfig& stepper, const StateFamily& initial_state = {});

struct BoundCheck {
  double K_fit = 0.0;          // max over rows of M_hat / (1 + norm^exponent)
  double growth_factor = 1.0;  // max over upper-half pairs i < j of K_j / K_i
  double drift_slope = 0.0;    // log-log slope of the row-wise K over the upper half
  bool holds = false;
};

// holds: growth_factor < kMaxGrowthFactor and drift_slope <= kMaxDriftSlope.
inline constexpr double kMaxGrowthFactor = 10.0;
inline constexpr double kMaxDriftSlope = 0.05;
BoundCheck check_bound_inequality(const SweepResult& sweep, double exponent);

// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace ubound
