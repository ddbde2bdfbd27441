#include "doctest.h"
#include "test_support.hpp"
#include "ubound/errors.hpp"
#include "ubound/spectral_model.hpp"

using namespace ubound;

TEST_CASE("eigenvalues of the wave and beam operators on (0, pi)") {
  const auto wave = make_operator(OperatorKind::Wave1D, 4);
  const auto beam = make_operator(OperatorKind::Beam1DSimplySupported, 3);
  for (int k = 0; k < 4; ++k) CHECK(wave.lambda()[k] == (k + 1) * (k + 1));
  CHECK(beam.lambda()[0] == 1.0);
  CHECK(beam.lambda()[1] == 16.0);
  CHECK(beam.lambda()[2] == 81.0);
  CHECK(beam.mu()[1] == 4.0);
}

TEST_CASE("eigenvalues scale with the interval length") {
  const auto wave = make_operator(OperatorKind::Wave1D, 3, 2.0);
  const double s = std::numbers::pi / 2.0;
  CHECK(wave.lambda()[2] == doctest::Approx(9.0 * s * s).epsilon(1e-14));
  CHECK(wave.embedding_P() == doctest::Approx(1.0 / s).epsilon(1e-14));
}

TEST_CASE("abstract operator uses the supplied spectrum") {
  const auto op = make_operator(OperatorKind::Abstract, 1, std::numbers::pi, std::vector<double>{2.5});
  CHECK(op.lambda()[0] == 2.5);
  CHECK(op.embedding_P() == doctest::Approx(1.0 / std::sqrt(2.5)).epsilon(1e-15));
}

TEST_CASE("operator construction rejects bad input") {
  CHECK_THROWS_AS(make_operator(OperatorKind::Wave1D, 0), ValidationError);
  CHECK_THROWS_AS(make_operator(OperatorKind::Wave1D, 3, -1.0), ValidationError);
  CHECK_THROWS_AS(make_operator(OperatorKind::Wave1D, 2, std::numbers::pi, std::vector<double>{1.0, 2.0}),
                  ValidationError);
  CHECK_THROWS_AS(make_operator(OperatorKind::Abstract, 2, std::numbers::pi, std::vector<double>{1.0}),
                  ValidationError);
  CHECK_THROWS_AS(make_operator(OperatorKind::Abstract, 2, std::numbers::pi, std::vector<double>{1.0, -2.0}),
                  ValidationError);
  CHECK_THROWS_AS(SpectralOperator(OperatorKind::Wave1D, 4, std::numbers::pi, std::nullopt, 8), ValidationError);
}

TEST_CASE("H norm") {
  const auto op = make_operator(OperatorKind::Wave1D, 2);
  CHECK(norm_H(op, op.unit(1)) == 1.0);
  ModalVector m(2);
  m << 3.0, 4.0;
  CHECK(norm_H(op, m) == 5.0);
  CHECK_THROWS_AS(norm_H(op, ModalVector::Zero(3)), ValidationError);
}

TEST_CASE("H norm agrees with a fine quadrature of the synthesized field") {
  std::mt19937_64 rng(7);
  for (double length : {std::numbers::pi, 2.0}) {
    const auto op = make_operator(OperatorKind::Wave1D, 6, length);
    for (int i = 0; i < 20; ++i) {
      const ModalVector m = testing::random_vector(rng, 6, 3.0);
      const double quad = testing::midpoint(
          [&](double x) { return std::pow(testing::synthesize(m, length, x), 2); }, length, 10 * op.num_quad());
      CHECK(std::abs(norm_H(op, m) - std::sqrt(quad)) < 1e-8);
    }
  }
}

TEST_CASE("V and Z norms") {
  const auto wave = make_operator(OperatorKind::Wave1D, 4);
  const auto beam = make_operator(OperatorKind::Beam1DSimplySupported, 3);
  CHECK(norm_V(wave, wave.unit(1)) == 1.0);
  CHECK(norm_V(wave, wave.unit(3)) == doctest::Approx(3.0));
  CHECK(norm_Z(beam, beam.unit(2), {ZKind::H10, 0.0}) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(norm_V(beam, beam.unit(2)) == doctest::Approx(4.0).epsilon(1e-15));

  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const ModalVector m = testing::random_vector(rng, 4, 2.0);
    CHECK(std::abs(norm_Z(wave, m, {ZKind::LalphaPlus2, 0.0}) - norm_H(wave, m)) < 1e-8);
    CHECK(norm_Z(wave, m, {ZKind::L2, 0.0}) == norm_H(wave, m));
  }
}

TEST_CASE("L^p norm agrees with a fine quadrature") {
  const auto op = make_operator(OperatorKind::Wave1D, 3);
  ModalVector m(3);
  m << 1.0, 0.0, 0.0;
  // |phi_1|_4^4 = (2/pi)^2 * 3 pi / 8
  const double exact = std::pow(4.0 / (std::numbers::pi * std::numbers::pi) * 3.0 * std::numbers::pi / 8.0, 0.25);
  CHECK(norm_Z(op, m, {ZKind::LalphaPlus2, 2.0}) == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("dual norms and the V pairing") {
  const auto op = make_operator(OperatorKind::Wave1D, 3);
  ModalVector m(3);
  m << 1.0, 2.0, 3.0;
  CHECK(norm_Vdual(op, m) == doctest::Approx(std::sqrt(1.0 + 1.0 + 1.0)));
  CHECK(inner_V(op, m, m) == doctest::Approx(norm_V(op, m) * norm_V(op, m)));
  CHECK(norm_H10dual(op, m) == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("duality map is diagonal") {
  const auto op = make_operator(OperatorKind::Wave1D, 4);
  const ModalVector image = apply_A(op, op.unit(3));
  CHECK(image == 9.0 * op.unit(3));
}

TEST_CASE("nodal synthesis") {
  const auto op = make_operator(OperatorKind::Wave1D, 1, std::numbers::pi, std::nullopt);
  // Q = 4N = 4 nodes at j pi / 5; use an odd grid so pi / 2 is a node.
  const SpectralOperator odd(OperatorKind::Wave1D, 1, std::numbers::pi, std::nullopt, 5);
  const NodalField f = to_nodal(odd, odd.unit(1));
  CHECK(odd.nodes()[2] == doctest::Approx(std::numbers::pi / 2.0));
  CHECK(f.values[2] == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-15));
  CHECK(op.num_quad() == 4);
}

TEST_CASE("modal and nodal transforms are inverse") {
  std::mt19937_64 rng(3);
  for (int n : {1, 4, 16, 33}) {
    const auto op = make_operator(OperatorKind::Wave1D, n, 1.7);
    for (int i = 0; i < 10; ++i) {
      const ModalVector m = testing::random_vector(rng, n, 10.0);
      const NodalField f = to_nodal(op, m);
      CHECK((to_modal(op, f) - m).cwiseAbs().maxCoeff() < 1e-10);
      const Eigen::VectorXd x = op.nodes();
      for (int j = 0; j < x.size(); j += 7) CHECK(std::abs(f.values[j] - testing::synthesize(m, 1.7, x[j])) < 1e-10);
    }
  }
}
