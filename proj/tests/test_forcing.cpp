#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "test_support.hpp"
#include "ubound/damping.hpp"
#include "ubound/errors.hpp"
#include "ubound/forcing.hpp"

using namespace ubound;

TEST_CASE("zero and sinusoidal evaluation") {
  const auto op = make_operator(OperatorKind::Wave1D, 3);
  CHECK(ForcingSignal::zero(3).eval(12.5).norm() == 0.0);
  const auto h = ForcingSignal::sinusoidal(op.unit(1), 2.0, 1.0);
  CHECK((h.eval(std::numbers::pi / 2.0) - 2.0 * op.unit(1)).norm() < 1e-15);
  CHECK_THROWS_AS(h.eval(-1.0), ValidationError);
  CHECK_THROWS_AS(ForcingSignal::sinusoidal(op.unit(1), 1.0, 0.0), ValidationError);
}

TEST_CASE("power-of-sine forcing is the cubic damping of the cosine mode") {
  const auto op = make_operator(OperatorKind::Abstract, 1, std::numbers::pi, std::vector<double>{1.0});
  const DampingOp g(DampingFamily::AveragedH, 1.0, 2.0);
  for (double k : {1.0, 3.0, 10.0}) {
    const auto h = ForcingSignal::power_of_sine(-op.unit(1), k * k * k, 1.0, 3.0);
    for (double t = 0.0; t < 7.0; t += 0.37) {
      const ModalVector velocity = -k * std::sin(t) * op.unit(1);
      CHECK((h.eval(t) - apply_g(op, g, velocity)).norm() < 1e-12 * k * k * k);
    }
  }
}

TEST_CASE("norms of a constant signal") {
  ModalVector p(2);
  p << 3.0, 4.0;
  const auto h = ForcingSignal::constant(p);
  CHECK(s2_norm(h, 50.0) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(linf_norm(h, 50.0) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(l2_period_norm(h, 4.0) == doctest::Approx(10.0).epsilon(1e-15));
}

TEST_CASE("S2 norm of a unit-period sinusoid") {
  const auto op = make_operator(OperatorKind::Wave1D, 2);
  for (double a : {1.0, 3.5}) {
    const auto h = ForcingSignal::sinusoidal(op.unit(1), a, 2.0 * std::numbers::pi);
    CHECK(s2_norm(h, 20.0) == doctest::Approx(a / std::sqrt(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("S2 closed form agrees with the sliding-window grid") {
  const auto op = make_operator(OperatorKind::Wave1D, 2);
  for (double omega : {0.3, 1.0, 1.618, 5.0}) {
    const auto pure = ForcingSignal::sinusoidal(op.unit(1), 2.0, omega, 0.4);
    // A one-part sum has no closed form and goes through the grid.
    const auto gridded = ForcingSignal::sum({pure});
    CHECK(s2_norm(gridded, 60.0) == doctest::Approx(s2_norm(pure, 60.0)).epsilon(1e-4));
    CHECK(s2_norm(pure, 60.0) <= linf_norm(pure, 60.0));
  }
}

TEST_CASE("L-infinity norm of the cubic sine family") {
  const auto op = make_operator(OperatorKind::Wave1D, 2);
  for (double k : {1.0, 2.0, 8.0}) {
    const auto h = ForcingSignal::power_of_sine(-op.unit(1), k * k * k, 1.0, 3.0);
    CHECK(linf_norm(h, 2.0 * std::numbers::pi) == doctest::Approx(k * k * k).epsilon(1e-12));
  }
}

TEST_CASE("L2 period norm of a sinusoid") {
  const auto op = make_operator(OperatorKind::Wave1D, 2);
  const auto h = ForcingSignal::sinusoidal(op.unit(2), 3.0, 1.0);
  // int_0^pi 9 sin^2 = 9 pi / 2
  CHECK(l2_period_norm(h, std::numbers::pi) == doctest::Approx(std::sqrt(4.5 * std::numbers::pi)).epsilon(1e-12));
  const auto sum = ForcingSignal::sum({h, ForcingSignal::sinusoidal(op.unit(1), 1.0, 3.0)});
  CHECK(l2_period_norm(sum, std::numbers::pi) ==
        doctest::Approx(std::sqrt(5.0 * std::numbers::pi)).epsilon(1e-6));
}

TEST_CASE("anti-period declaration is verified") {
  const auto op = make_operator(OperatorKind::Wave1D, 2);
  const auto h = ForcingSignal::sinusoidal(op.unit(1), 1.0, 1.0);
  CHECK(h.with_antiperiod(std::numbers::pi).antiperiod() == std::numbers::pi);
  CHECK_THROWS_AS(h.with_antiperiod(2.0), ValidationError);
  CHECK_THROWS_AS(ForcingSignal::constant(op.unit(1)).with_antiperiod(1.0), ValidationError);
  const auto odd = ForcingSignal::sum({h, ForcingSignal::sinusoidal(op.unit(2), 0.5, 3.0, 0.2)});
  CHECK_NOTHROW(odd.with_antiperiod(std::numbers::pi));
  const auto even = ForcingSignal::sum({h, ForcingSignal::sinusoidal(op.unit(2), 0.5, 2.0)});
  CHECK_THROWS_AS(even.with_antiperiod(std::numbers::pi), ValidationError);
}

TEST_CASE("scaling keeps the anti-period") {
  const auto op = make_operator(OperatorKind::Wave1D, 2);
  const auto h = ForcingSignal::sinusoidal(op.unit(1), 1.0, 1.0).with_antiperiod(std::numbers::pi);
  const auto s = h.scaled(4.0);
  CHECK(s.antiperiod() == h.antiperiod());
  CHECK((s.eval(0.3) - 4.0 * h.eval(0.3)).norm() < 1e-15);
}

TEST_CASE("sampled forcing from CSV") {
  const auto path = std::filesystem::temp_directory_path() / "ubound_sampled_test.csv";
  {
    std::ofstream out(path);
    out << "t,coeff_1,coeff_2\n0,0,1\n1,2,1\n3,-2,0\n";
  }
  const auto h = load_sampled_csv(path, 2);
  CHECK(h.kind() == ForcingKind::Sampled);
  CHECK(h.eval(0.5)[0] == doctest::Approx(1.0));
  CHECK(h.eval(2.0)[1] == doctest::Approx(0.5));
  CHECK_THROWS_AS(h.eval(3.5), ValidationError);
  CHECK(linf_norm(h, 3.0) == doctest::Approx(std::sqrt(5.0)));
  CHECK_THROWS_AS(load_sampled_csv(path, 3), ValidationError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_sampled_csv(path, 2), ValidationError);
}
