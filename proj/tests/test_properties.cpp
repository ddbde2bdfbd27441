#include <set>

#include "doctest.h"
#include "ubound/properties.hpp"

using namespace ubound;

TEST_CASE("suite dampings cover every family, a fractional exponent and a sum") {
  std::set<DampingFamily> families;
  bool fractional = false, sum = false, viscous = false;
  for (const auto& g : suite_dampings()) {
    for (const auto& t : g.terms()) {
      families.insert(t.family);
      fractional = fractional || (t.alpha > 0.0 && t.alpha != std::floor(t.alpha));
    }
    sum = sum || !g.is_single();
    viscous = viscous || (g.is_single() && g.family() == DampingFamily::AveragedH && g.alpha() == 0.0);
  }
  CHECK(families.count(DampingFamily::LocalPower) == 1);
  CHECK(families.count(DampingFamily::AveragedH) == 1);
  CHECK(families.count(DampingFamily::StructuralAveraged) == 1);
  CHECK(viscous);
  CHECK(fractional);
  CHECK(sum);
}

TEST_CASE("default property suite has no violations") {
  const auto results = run_property_suite(PropertySuiteConfig{});
  CHECK(results.size() == 10);
  for (const auto& r : results) {
    INFO(r.name, " worst slack ", r.worst);
    CHECK(r.checks > 0);
    CHECK(r.passed());
  }
}

TEST_CASE("property suite is reproducible from its seed") {
  PropertySuiteConfig cfg;
  cfg.monotonicity_pairs = 20;
  cfg.certificate_samples = 20;
  cfg.roundtrip_samples = 10;
  cfg.contraction_pairs = 2;
  const auto a = run_property_suite(cfg);
  const auto b = run_property_suite(cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].checks == b[i].checks);
    CHECK(a[i].worst == b[i].worst);
  }
}
