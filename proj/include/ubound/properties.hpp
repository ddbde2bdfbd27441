#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ubound/damping.hpp"
#include "ubound/spectral_model.hpp"

namespace ubound {

struct PropertyResult {
  std::string name;
  long checks = 0;
  long violations = 0;
  double worst = 0.0;  // most negative normalized slack seen (0 when none)
  std::string detail;

  bool passed() const { return violations == 0; }
};

struct PropertySuiteConfig {
  std::uint64_t seed = 20240601;
  int monotonicity_pairs = 1000;
  int certificate_samples = 1000;
  int roundtrip_samples = 200;
  int contraction_pairs = 10;
  double contraction_T = 2.0;
};

// The damping laws exercised by the suite: every family, a fractional exponent
// and a mixed sum.
std::vector<DampingOp> suite_dampings();

/// Monotonicity, oddness, homogeneity, certificate soundness, transform
/// round-trip, norm orderings, S2 <= Linf, discrete contraction and energy
/// identity, each on seeded random samples.
std::vector<PropertyResult> run_property_suite(const PropertySuiteConfig& cfg);

}  // namespace ubound
