#include "doctest.h"
#include "test_support.hpp"
#include "ubound/bounds.hpp"
#include "ubound/errors.hpp"

using namespace ubound;

namespace {

SweepResult synthetic(const std::vector<double>& norms, const std::vector<double>& maxima) {
  SweepResult s;
  for (std::size_t i = 0; i < norms.size(); ++i) {
    SweepRow r;
    r.amplitude = norms[i];
    r.forcing_norm = norms[i];
    r.M_hat = maxima[i];
    r.ok = true;
    r.status = "ok";
    s.rows.push_back(r);
  }
  fit_upper_half(s);
  return s;
}

BoundConfig quick_bound(double T) {
  BoundConfig cfg;
  cfg.T_total = T;
  return cfg;
}

}  // namespace

TEST_CASE("stationary state gives M = lambda_1 k^2") {
  for (double length : {std::numbers::pi, 2.0}) {
    const auto op = make_operator(OperatorKind::Wave1D, 4, length);
    const double l1 = op.lambda()[0];
    for (const auto& g : {DampingOp(DampingFamily::LocalPower, 1.0, 2.0), DampingOp(DampingFamily::AveragedH, 1.0, 0.0),
                          DampingOp(DampingFamily::StructuralAveraged, 1.0, 1.0)}) {
      for (double k : {1.0, 10.0, 100.0}) {
        const auto h = ForcingSignal::constant(k * l1 * op.unit(1));
        const State s0{k * op.unit(1), op.zero(), 0.0};
        const double M = estimate_ultimate_bound(op, g, h, s0, quick_bound(20.0), StepperConfig{});
        CHECK(testing::rel_err(M, l1 * k * k) < 1e-8);
      }
    }
  }
}

TEST_CASE("linear oscillator steady-state maximum") {
  const auto op = make_operator(OperatorKind::Abstract, 1, std::numbers::pi, std::vector<double>{1.0});
  const DampingOp g(DampingFamily::AveragedH, 1.0, 0.0);
  StepperConfig stepper;
  stepper.dt = 1e-3;
  for (double a : {1.0, 4.0}) {
    const auto h = ForcingSignal::sinusoidal(op.unit(1), a, 2.0);
    // u = R sin(2t - phi) with R = a / sqrt((1 - 4)^2 + 4); Phi = R^2 (4 cos^2 + sin^2) peaks at 4 R^2.
    const double closed = 4.0 * a * a / 13.0;
    const double M = estimate_ultimate_bound(op, g, h, zero_state(op), quick_bound(60.0), stepper);
    CHECK(testing::rel_err(M, closed) < 0.02);
  }
}

TEST_CASE("unforced linear damping decays below any level") {
  const auto op = make_operator(OperatorKind::Wave1D, 4);
  const DampingOp g(DampingFamily::AveragedH, 1.0, 0.0);
  std::mt19937_64 rng(6);
  const State s0{testing::random_vector(rng, 4, 3.0), testing::random_vector(rng, 4, 3.0), 0.0};
  const double M = estimate_ultimate_bound(op, g, ForcingSignal::zero(4), s0, quick_bound(200.0), StepperConfig{});
  CHECK(M < 1e-3);
}

TEST_CASE("an undecayed transient is rejected") {
  const auto op = make_operator(OperatorKind::Wave1D, 2);
  const DampingOp g(DampingFamily::AveragedH, 0.01, 0.0);
  const State s0{op.unit(1), op.zero(), 0.0};
  CHECK_THROWS_AS(estimate_ultimate_bound(op, g, ForcingSignal::zero(2), s0, quick_bound(20.0), StepperConfig{}),
                  NonStationaryError);
}

TEST_CASE("bound configuration is validated") {
  BoundConfig cfg;
  cfg.burn_in_fraction = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = BoundConfig{};
  cfg.window_count = 1;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("log-log regression on exact power data") {
  const std::vector<double> x{1.0, 10.0, 100.0};
  const std::vector<double> y{1.0, 100.0, 1e4};
  const auto fit = fit_loglog(x, y);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(std::abs(fit.intercept) < 1e-14);
  CHECK(fit.r_squared == doctest::Approx(1.0));
  const std::vector<double> bad{1.0, 0.0, 2.0};
  CHECK_THROWS_AS(fit_loglog(x, bad), ValidationError);
}

TEST_CASE("stationary amplitude sweep has slope 2") {
  const auto op = make_operator(OperatorKind::Abstract, 2, std::numbers::pi, std::vector<double>{2.5, 7.0});
  const double l1 = 2.5;
  const DampingOp g(DampingFamily::AveragedH, 1.0, 2.0);
  const ForcingFamily family = [&](double k) { return ForcingSignal::constant(k * l1 * op.unit(1)); };
  const StateFamily start = [&](double k) { return State{k * op.unit(1), op.zero(), 0.0}; };
  std::vector<double> amps;
  for (int i = 0; i < 8; ++i) amps.push_back(std::ldexp(1.0, i));
  const auto sweep = amplitude_sweep(op, g, family, amps, NormKind::S2, quick_bound(10.0), StepperConfig{}, start);
  REQUIRE(sweep.fit_ok);
  CHECK(sweep.fitted_slope == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(sweep.fitted_intercept == doctest::Approx(-std::log(l1)).epsilon(1e-6));
  CHECK(sweep.r_squared > 0.999999);

  const auto quad = check_bound_inequality(sweep, 2.0);
  CHECK(quad.holds);
  CHECK(quad.K_fit == doctest::Approx(1.0 / l1).epsilon(1e-3));
  CHECK(quad.K_fit <= 1.0 / l1);
  CHECK(check_bound_inequality(sweep, 4.0).holds);
}

TEST_CASE("bound check separates the true exponent of the cubic anti-periodic family") {
  // M = k^2 against |h|_inf = k^3.
  std::vector<double> norms, maxima;
  for (int i = 0; i < 8; ++i) {
    const double k = std::ldexp(1.0, i);
    norms.push_back(k * k * k);
    maxima.push_back(k * k);
  }
  const auto sweep = synthetic(norms, maxima);
  CHECK(sweep.fitted_slope == doctest::Approx(2.0 / 3.0));
  CHECK(check_bound_inequality(sweep, 2.0 / 3.0).holds);
  CHECK(check_bound_inequality(sweep, 2.0).holds);
  CHECK_FALSE(check_bound_inequality(sweep, 2.0 / 3.0 - 0.1).holds);
  CHECK_FALSE(check_bound_inequality(sweep, 0.3).holds);
}

TEST_CASE("fit needs four valid rows in the upper half") {
  std::vector<double> norms{1, 2, 4, 8, 16, 32};
  std::vector<double> maxima{1, 4, 16, 64, 256, 1024};
  auto sweep = synthetic(norms, maxima);
  CHECK_FALSE(sweep.fit_ok);
  norms.insert(norms.end(), {64, 128});
  maxima.insert(maxima.end(), {4096, 16384});
  sweep = synthetic(norms, maxima);
  CHECK(sweep.fit_ok);
  sweep.rows[7].ok = false;
  fit_upper_half(sweep);
  CHECK_FALSE(sweep.fit_ok);
  CHECK_THROWS_AS(check_bound_inequality(SweepResult{}, 2.0), ValidationError);
}

TEST_CASE("sweep rows that fail to settle are marked, not fatal") {
  const auto op = make_operator(OperatorKind::Wave1D, 2);
  const DampingOp g(DampingFamily::AveragedH, 1e-3, 0.0);
  const ForcingFamily family = [&](double k) { return ForcingSignal::sinusoidal(op.unit(1), k, 1.618); };
  const auto sweep =
      amplitude_sweep(op, g, family, {1.0, 2.0, 4.0, 8.0}, NormKind::S2, quick_bound(10.0), StepperConfig{});
  CHECK(sweep.rows.size() == 4);
  for (const auto& r : sweep.rows) {
    CHECK_FALSE(r.ok);
    CHECK(r.status != "ok");
  }
  CHECK_FALSE(sweep.fit_ok);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 7) throw NumericalError("boom");
                  }),
                  NumericalError);
}
