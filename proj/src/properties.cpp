#include "ubound/properties.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "ubound/errors.hpp"
#include "ubound/forcing.hpp"
#include "ubound/integrator.hpp"

namespace ubound {

namespace {

using Rng = std::mt19937_64;

// Random direction scaled to a log-uniform radius in [rmin, rmax].
ModalVector random_modal(Rng& rng, int n, double rmin, double rmax) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ModalVector m(n);
  for (int k = 0; k < n; ++k) m[k] = normal(rng);
  const double radius = rmin * std::pow(rmax / rmin, unit(rng));
  const double len = m.norm();
  return len > 0.0 ? ModalVector(m * (radius / len)) : m;
}

struct Tally {
  PropertyResult result;

  explicit Tally(std::string name) { result.name = std::move(name); }

  // slack >= 0 means the property holds; normalized is slack / scale.
  void check(double slack, double scale = 1.0) {
    ++result.checks;
    const double normalized = slack / scale;
    if (!(slack >= 0.0)) ++result.violations;
    result.worst = std::min(result.worst, normalized);
  }
  PropertyResult done(std::string detail = {}) {
    result.detail = std::move(detail);
    return std::move(result);
  }
};

std::vector<SpectralOperator> suite_operators() {
  std::vector<SpectralOperator> ops;
  ops.push_back(make_operator(OperatorKind::Wave1D, 8));
  ops.push_back(make_operator(OperatorKind::Beam1DSimplySupported, 6));
  ops.push_back(make_operator(OperatorKind::Wave1D, 5, 2.0));
  ops.push_back(make_operator(OperatorKind::Abstract, 4, std::numbers::pi, std::vector<double>{0.5, 2.0, 3.5, 9.0}));
  return ops;
}

PropertyResult transform_roundtrip(Rng& rng, const PropertySuiteConfig& cfg) {
  Tally tally("transform round-trip < 1e-10");
  for (const auto& op : suite_operators()) {
    for (int i = 0; i < cfg.roundtrip_samples; ++i) {
      const ModalVector m = random_modal(rng, op.num_modes(), 1e-3, 1e2);
      const double err = (to_modal(op, to_nodal(op, m)) - m).cwiseAbs().maxCoeff();
      tally.check(1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff()) - err);
    }
  }
  return tally.done();
}

PropertyResult parseval(Rng& rng, const PropertySuiteConfig& cfg) {
  Tally tally("Parseval vs nodal quadrature");
  for (const auto& op : suite_operators()) {
    for (int i = 0; i < cfg.roundtrip_samples; ++i) {
      const ModalVector m = random_modal(rng, op.num_modes(), 1e-3, 1e2);
      const double quad = op.quad_weight() * to_nodal(op, m).values.squaredNorm();
      const double h2 = m.squaredNorm();
      tally.check(1e-8 * (1.0 + h2) - std::abs(h2 - quad), 1.0 + h2);
    }
  }
  return tally.done();
}

PropertyResult norm_orderings(Rng& rng, const PropertySuiteConfig& cfg) {
  Tally tally("norm orderings (H <= P V, Z sandwich)");
  for (const auto& op : suite_operators()) {
    const double sup_embed = std::sqrt(2.0 / op.length()) * std::sqrt((1.0 / op.lambda().array()).sum());
    const double max_mu_lambda = (op.mu().array() / op.lambda().array()).maxCoeff();
    for (int i = 0; i < cfg.roundtrip_samples; ++i) {
      const ModalVector m = random_modal(rng, op.num_modes(), 1e-3, 1e2);
      const double h = norm_H(op, m);
      const double v = norm_V(op, m);
      tally.check(op.embedding_P() * v * (1.0 + 1e-12) + 1e-12 - h, 1.0 + h);
      // H10: Poincare below, mu/lambda above.
      const double z1 = norm_Z(op, m, {ZKind::H10, 0.0});
      tally.check(z1 / std::sqrt(op.mu()[0]) * (1.0 + 1e-10) - h, 1.0 + h);
      tally.check(std::sqrt(max_mu_lambda) * v * (1.0 + 1e-10) - z1, 1.0 + z1);
      // L^{alpha+2}: discrete Hoelder below, sup-norm embedding above.
      for (double alpha : {0.0, 0.5, 2.0}) {
        const double p = alpha + 2.0;
        const double zp = norm_Z(op, m, {ZKind::LalphaPlus2, alpha});
        tally.check(std::pow(op.quad_measure(), 0.5 - 1.0 / p) * zp * (1.0 + 1e-10) - h, 1.0 + h);
        tally.check(std::pow(op.quad_measure(), 1.0 / p) * sup_embed * v * (1.0 + 1e-10) - zp, 1.0 + zp);
      }
      // The V pairing is the duality map applied exactly.
      const ModalVector w = random_modal(rng, op.num_modes(), 1e-3, 1e2);
      tally.check(apply_A(op, m).dot(w) == inner_V(op, m, w) ? 0.0 : -1.0);
    }
  }
  return tally.done();
}

const SpectralOperator& operator_for(const DampingOp& g, const SpectralOperator& wave, const SpectralOperator& beam) {
  for (const auto& t : g.terms())
    if (t.family == DampingFamily::StructuralAveraged) return beam;
  return wave;
}

PropertyResult monotonicity(Rng& rng, const PropertySuiteConfig& cfg) {
  Tally tally("damping monotonicity");
  const auto wave = make_operator(OperatorKind::Wave1D, 8);
  const auto beam = make_operator(OperatorKind::Beam1DSimplySupported, 6);
  for (const auto& g : suite_dampings()) {
    const auto& op = operator_for(g, wave, beam);
    for (int i = 0; i < cfg.monotonicity_pairs; ++i) {
      const ModalVector v = random_modal(rng, op.num_modes(), 1e-3, 1e2);
      // Half of the pairs are close together, where cancellation is hardest.
      const ModalVector w = i % 2 == 0 ? random_modal(rng, op.num_modes(), 1e-3, 1e2)
                                       : ModalVector(v + random_modal(rng, op.num_modes(), 1e-8, 1e-1));
      const double pairing = (apply_g(op, g, v) - apply_g(op, g, w)).dot(v - w);
      const double scale = std::pow(1.0 + v.norm() + w.norm(), 2);
      tally.check(pairing + 1e-10 * scale, scale);
    }
  }
  return tally.done();
}

PropertyResult oddness(Rng& rng, const PropertySuiteConfig& cfg) {
  Tally tally("damping oddness (exact)");
  const auto wave = make_operator(OperatorKind::Wave1D, 8);
  const auto beam = make_operator(OperatorKind::Beam1DSimplySupported, 6);
  for (const auto& g : suite_dampings()) {
    const auto& op = operator_for(g, wave, beam);
    for (int i = 0; i < cfg.roundtrip_samples; ++i) {
      const ModalVector v = random_modal(rng, op.num_modes(), 1e-3, 1e2);
      const bool exact = apply_g(op, g, -v) == -apply_g(op, g, v);
      tally.check(exact ? 0.0 : -1.0);
    }
  }
  return tally.done();
}

PropertyResult homogeneity(Rng& rng, const PropertySuiteConfig& cfg) {
  Tally tally("averaged-family homogeneity");
  const auto wave = make_operator(OperatorKind::Wave1D, 8);
  const auto beam = make_operator(OperatorKind::Beam1DSimplySupported, 6);
  std::uniform_real_distribution<double> scale_dist(0.1, 10.0);
  const std::vector<DampingOp> laws{DampingOp(DampingFamily::AveragedH, 1.5, 2.0),
                                    DampingOp(DampingFamily::AveragedH, 0.5, 0.7),
                                    DampingOp(DampingFamily::StructuralAveraged, 1.0, 1.0)};
  for (const auto& g : laws) {
    const auto& op = operator_for(g, wave, beam);
    for (int i = 0; i < cfg.roundtrip_samples; ++i) {
      const ModalVector v = random_modal(rng, op.num_modes(), 1e-2, 1e1);
      const double s = scale_dist(rng);
      const ModalVector lhs = apply_g(op, g, s * v);
      const ModalVector rhs = std::pow(s, g.alpha() + 1.0) * apply_g(op, g, v);
      const double rel = (lhs - rhs).norm() / std::max(rhs.norm(), 1e-300);
      tally.check(1e-12 - rel);
    }
  }
  return tally.done();
}

PropertyResult certificate_soundness(Rng& rng, const PropertySuiteConfig& cfg) {
  Tally tally("certificate soundness");
  const auto wave = make_operator(OperatorKind::Wave1D, 8);
  const auto beam = make_operator(OperatorKind::Beam1DSimplySupported, 6);
  int certificates = 0, inadmissible = 0;
  for (const auto& g : suite_dampings()) {
    const auto& op = operator_for(g, wave, beam);
    for (Condition cond : {Condition::General32_33, Condition::Power41_42, Condition::AntiPeriodic54}) {
      DampingCertificate cert;
      try {
        cert = certificate(op, g, cond);
      } catch (const NoCertificateError&) {
        ++inadmissible;
        continue;
      }
      ++certificates;
      for (int i = 0; i < cfg.certificate_samples; ++i) {
        const ModalVector v = random_modal(rng, op.num_modes(), 1e-4, 1e3);
        const CertificateSlack s = certificate_slack(op, g, cert, v);
        // Rounding in the terms scales with their magnitude.
        const double diss = dissipation(op, g, v);
        const double scale = 1.0 + diss + apply_g(op, g, v).norm() + std::pow(norm_Z(op, v, cert.z), cert.z.alpha + 2.0) +
                             v.squaredNorm() * cert.gamma;
        tally.check(s.coercivity + 1e-9 * scale, scale);
        tally.check(s.growth + 1e-9 * scale, scale);
      }
    }
  }
  std::ostringstream detail;
  detail << certificates << " certificates, " << inadmissible << " inadmissible pairs";
  return tally.done(detail.str());
}

PropertyResult s2_below_linf() {
  Tally tally("S2 norm <= Linf norm");
  const int n = 3;
  ModalVector p(n);
  p << 1.0, -0.5, 0.25;
  std::vector<ForcingSignal> signals{
      ForcingSignal::zero(n),
      ForcingSignal::constant(p),
      ForcingSignal::sinusoidal(p, 2.0, 1.3, 0.2),
      ForcingSignal::sinusoidal(p, 1.0, 2.0 * std::numbers::pi),
      ForcingSignal::sinusoidal(p, 3.0, 0.4),
      ForcingSignal::power_of_sine(p, 5.0, 1.0, 3.0),
      ForcingSignal::power_of_sine(p, 1.0, 2.5, 0.5),
      ForcingSignal::sum({ForcingSignal::sinusoidal(p, 1.0, 1.0), ForcingSignal::sinusoidal(p, 0.5, 3.0, 0.7)}),
      ForcingSignal::sampled({0.0, 1.0, 2.5, 4.0, 20.0}, {p, -p, 3.0 * p, 0.5 * p, p}),
  };
  for (const auto& h : signals) {
    const double s2 = s2_norm(h, 20.0);
    const double li = linf_norm(h, 20.0);
    tally.check(li - s2 + 1e-9, 1.0 + li);
  }
  return tally.done();
}

PropertyResult contraction(Rng& rng, const PropertySuiteConfig& cfg) {
  Tally tally("backward Euler non-expansive");
  const auto op = make_operator(OperatorKind::Wave1D, 6);
  const auto forcing = ForcingSignal::sum(
      {ForcingSignal::sinusoidal(op.unit(1), 3.0, 1.7), ForcingSignal::sinusoidal(op.unit(2), 1.0, 0.6)});
  StepperConfig cfg_be;
  cfg_be.dt = 0.01;
  cfg_be.scheme = Scheme::BackwardEuler;
  for (const auto& g : suite_dampings()) {
    for (int i = 0; i < cfg.contraction_pairs; ++i) {
      const State a{random_modal(rng, 6, 1e-2, 1e1), random_modal(rng, 6, 1e-2, 1e1), 0.0};
      const State b{random_modal(rng, 6, 1e-2, 1e1), random_modal(rng, 6, 1e-2, 1e1), 0.0};
      const auto report = contraction_check(op, g, a, b, forcing, cfg.contraction_T, cfg_be);
      tally.check(1.0 + 1e-10 - report.max_ratio);
    }
  }
  return tally.done();
}

PropertyResult energy_identity(Rng& rng, const PropertySuiteConfig&) {
  Tally tally("discrete energy identity and unforced decay");
  const auto op = make_operator(OperatorKind::Wave1D, 6);
  const auto forcing = ForcingSignal::sinusoidal(op.unit(1), 2.0, 1.3);
  const auto none = ForcingSignal::zero(6);
  for (const auto& g : suite_dampings()) {
    const State s0{random_modal(rng, 6, 1e-1, 3.0), random_modal(rng, 6, 1e-1, 3.0), 0.0};
    StepperConfig be;
    be.dt = 0.01;
    be.scheme = Scheme::BackwardEuler;
    StepperConfig mp = be;
    mp.scheme = Scheme::ImplicitMidpoint;
    const double scale = 1.0 + energy(op, s0) + 10.0;
    // Backward Euler dissipates numerically: every step's defect is <= 0.
    const Trajectory forced = run(op, g, s0, forcing, 2.0, be);
    tally.check(1e-12 * scale - forced.max_step_defect, scale);
    for (const auto& cfg : {be, mp}) {
      const Trajectory free = run(op, g, s0, none, 2.0, cfg);
      double worst = -INFINITY;
      for (std::size_t i = 1; i < free.ledger.size(); ++i)
        worst = std::max(worst, free.ledger[i].E - free.ledger[i - 1].E);
      tally.check(1e-12 * scale - worst, scale);
    }
  }
  return tally.done();
}

}  // namespace

std::vector<DampingOp> suite_dampings() {
  return {
      DampingOp(DampingFamily::LinearViscous, 1.0, 0.0),
      DampingOp(DampingFamily::AveragedH, 1.0, 2.0),
      DampingOp(DampingFamily::LocalPower, 1.0, 2.0),
      DampingOp(DampingFamily::LocalPower, 0.7, 0.5),
      DampingOp(DampingFamily::StructuralAveraged, 1.0, 1.0),
      DampingOp({DampingTerm{DampingFamily::AveragedH, 1.0, 0.0}, DampingTerm{DampingFamily::AveragedH, 1.0, 2.0}}),
  };
}

std::vector<PropertyResult> run_property_suite(const PropertySuiteConfig& cfg) {
  Rng rng(cfg.seed);
  std::vector<PropertyResult> results;
  results.push_back(transform_roundtrip(rng, cfg));
  results.push_back(parseval(rng, cfg));
  results.push_back(norm_orderings(rng, cfg));
  results.push_back(monotonicity(rng, cfg));
  results.push_back(oddness(rng, cfg));
  results.push_back(homogeneity(rng, cfg));
  results.push_back(certificate_soundness(rng, cfg));
  results.push_back(s2_below_linf());
  results.push_back(contraction(rng, cfg));
  results.push_back(energy_identity(rng, cfg));
  return results;
}

}  // namespace ubound
