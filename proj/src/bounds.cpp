#include "ubound/bounds.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace ubound {

void BoundConfig::validate() const {
  if (!(T_total > 0.0)) throw ValidationError("bound.T_total must be positive");
  if (!(burn_in_fraction > 0.0 && burn_in_fraction < 1.0))
    throw ValidationError("bound.burn_in_fraction must lie in (0, 1)");
  if (window_count < 2) throw ValidationError("bound.window_count must be >= 2");
  if (!(window_agreement_tol > 0.0)) throw ValidationError("bound.window_agreement_tol must be positive");
  if (!(dt_refinement_tol > 0.0)) throw ValidationError("bound.dt_refinement_tol must be positive");
  if (!(absolute_floor >= 0.0)) throw ValidationError("bound.absolute_floor must be >= 0");
}

namespace {

bool agree(double a, double b, double tol, double floor) {
  const double scale = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) <= tol * scale;
}

BoundEstimate tail_maxima(const SpectralOperator& op, const DampingOp& g, const ForcingSignal& forcing,
                          const State& state0, const BoundConfig& cfg, const StepperConfig& stepper) {
  const double t0 = state0.t;
  const double tail_start = t0 + cfg.burn_in_fraction * cfg.T_total;
  const double window = (1.0 - cfg.burn_in_fraction) * cfg.T_total / cfg.window_count;
  BoundEstimate est;
  est.window_maxima.assign(cfg.window_count, 0.0);
  RunOptions options;
  options.on_record = [&](const EnergyRecord& rec) {
    if (rec.t < tail_start) return;
    const int w = std::min(cfg.window_count - 1, static_cast<int>((rec.t - tail_start) / window));
    est.window_maxima[w] = std::max(est.window_maxima[w], rec.Phi);
  };
  run(op, g, state0, forcing, cfg.T_total, stepper, options);
  est.M_hat = *std::max_element(est.window_maxima.begin(), est.window_maxima.end());
  return est;
}

}  // namespace

BoundEstimate estimate_ultimate_bound_detail(const SpectralOperator& op, const DampingOp& g,
                                             const ForcingSignal& forcing, const State& state0,
                                             const BoundConfig& cfg, const StepperConfig& stepper) {
  cfg.validate();
  stepper.validate();
  BoundEstimate est = tail_maxima(op, g, forcing, state0, cfg, stepper);
  const auto [lo, hi] = std::minmax_element(est.window_maxima.begin(), est.window_maxima.end());
  if (!agree(*lo, *hi, cfg.window_agreement_tol, cfg.absolute_floor))
    throw NonStationaryError("tail windows disagree: max Phi ranges over [" + std::to_string(*lo) + ", " +
                             std::to_string(*hi) + "]; transient not dead");
  if (cfg.refine) {
    StepperConfig half = stepper;
    half.dt = 0.5 * stepper.dt;
    est.M_refined = tail_maxima(op, g, forcing, state0, cfg, half).M_hat;
    if (!agree(est.M_hat, est.M_refined, cfg.dt_refinement_tol, cfg.absolute_floor))
      throw NonStationaryError("dt refinement disagrees: M_hat = " + std::to_string(est.M_hat) +
                               " at dt, " + std::to_string(est.M_refined) + " at dt/2");
  }
  return est;
}

double estimate_ultimate_bound(const SpectralOperator& op, const DampingOp& g, const ForcingSignal& forcing,
                               const State& state0, const BoundConfig& cfg, const StepperConfig& stepper) {
  return estimate_ultimate_bound_detail(op, g, forcing, state0, cfg, stepper).M_hat;
}

std::string_view to_string(NormKind kind) {
  switch (kind) {
    case NormKind::S2: return "S2";
    case NormKind::Linf: return "Linf";
    case NormKind::L2period: return "L2period";
  }
  return "?";
}

NormKind norm_kind_from_string(std::string_view name) {
  if (name == "S2") return NormKind::S2;
  if (name == "Linf") return NormKind::Linf;
  if (name == "L2period") return NormKind::L2period;
  throw ValidationError("unknown norm kind '" + std::string(name) + "'");
}

double forcing_norm(const ForcingSignal& h, NormKind kind, double horizon) {
  switch (kind) {
    case NormKind::S2: return s2_norm(h, std::max(horizon, 1.0));
    case NormKind::Linf: return linf_norm(h, horizon);
    case NormKind::L2period:
      if (!h.antiperiod()) throw ValidationError("L2period norm needs a declared anti-period");
      return l2_period_norm(h, *h.antiperiod());
  }
  return 0.0;
}

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("fit_loglog: x and y differ in length");
  if (x.size() < 2) throw ValidationError("fit_loglog needs at least two points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ValidationError("fit_loglog needs positive data");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
    mx += lx.back();
    my += ly.back();
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw ValidationError("fit_loglog: all x values coincide");
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

void fit_upper_half(SweepResult& sweep) {
  std::sort(sweep.rows.begin(), sweep.rows.end(),
            [](const SweepRow& a, const SweepRow& b) { return a.amplitude < b.amplitude; });
  std::vector<double> x, y;
  for (std::size_t i = sweep.rows.size() / 2; i < sweep.rows.size(); ++i) {
    const auto& r = sweep.rows[i];
    if (r.ok && r.forcing_norm > 0.0 && r.M_hat > 0.0) {
      x.push_back(r.forcing_norm);
      y.push_back(r.M_hat);
    }
  }
  if (x.size() < 4) {
    sweep.fit_ok = false;
    sweep.fit_message = "fit needs >= 4 valid rows in the upper half, found " + std::to_string(x.size());
    return;
  }
  const LogLogFit fit = fit_loglog(x, y);
  sweep.fitted_slope = fit.slope;
  sweep.fitted_intercept = fit.intercept;
  sweep.r_squared = fit.r_squared;
  sweep.fit_ok = true;
  sweep.fit_message = "ok";
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

SweepResult amplitude_sweep(const SpectralOperator& op, const DampingOp& g, const ForcingFamily& family,
                            std::vector<double> amplitudes, NormKind norm_kind, const BoundConfig& cfg,
                            const StepperConfig& stepper, const StateFamily& initial_state) {
  cfg.validate();
  stepper.validate();
  if (amplitudes.size() < 4) throw ValidationError("amplitude sweep needs >= 4 amplitudes");
  std::sort(amplitudes.begin(), amplitudes.end());
  SweepResult sweep;
  sweep.rows.resize(amplitudes.size());
  parallel_for(amplitudes.size(), [&](std::size_t i) {
    SweepRow& row = sweep.rows[i];
    row.amplitude = amplitudes[i];
    row.norm_kind = norm_kind;
    const ForcingSignal h = family(amplitudes[i]);
    row.forcing_norm = forcing_norm(h, norm_kind, cfg.T_total);
    const State s0 = initial_state ? initial_state(amplitudes[i]) : zero_state(op);
    try {
      row.M_hat = estimate_ultimate_bound(op, g, h, s0, cfg, stepper);
      row.ok = true;
      row.status = "ok";
    } catch (const NumericalError& e) {
      row.ok = false;
      row.status = e.what();
    }
  });
  fit_upper_half(sweep);
  return sweep;
}

BoundCheck check_bound_inequality(const SweepResult& sweep, double exponent) {
  BoundCheck check;
  std::vector<const SweepRow*> valid;
  for (const auto& r : sweep.rows)
    if (r.ok) valid.push_back(&r);
  if (valid.empty()) throw ValidationError("check_bound_inequality needs a non-empty sweep");
  std::sort(valid.begin(), valid.end(), [](auto* a, auto* b) { return a->amplitude < b->amplitude; });

  std::vector<double> K;
  for (const auto* r : valid) {
    K.push_back(r->M_hat / (1.0 + std::pow(r->forcing_norm, exponent)));
    check.K_fit = std::max(check.K_fit, K.back());
  }
  const std::size_t first = valid.size() / 2;
  double running_min = INFINITY;
  std::vector<double> xs, ks;
  for (std::size_t i = first; i < valid.size(); ++i) {
    if (running_min < INFINITY && running_min > 0.0)
      check.growth_factor = std::max(check.growth_factor, K[i] / running_min);
    running_min = std::min(running_min, K[i]);
    if (valid[i]->forcing_norm > 0.0 && K[i] > 0.0) {
      xs.push_back(valid[i]->forcing_norm);
      ks.push_back(K[i]);
    }
  }
  if (xs.size() >= 2) check.drift_slope = fit_loglog(xs, ks).slope;
  check.holds = check.growth_factor < kMaxGrowthFactor && check.drift_slope <= kMaxDriftSlope;
  return check;
}

}  // namespace ubound
