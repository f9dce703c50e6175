#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "qpq/errors.hpp"
#include "qpq/qubit.hpp"
#include "qpq/random.hpp"
#include "test_support.hpp"

using namespace qpq;
using qpq::test::binomial_sigma;
using qpq::test::theta_grid;
using qpq::test::within_sigmas;

namespace {

constexpr double kPi = std::numbers::pi;

DensityMatrix random_density(std::size_t dim, RandomStream& rng, std::size_t rank) {
  // Ginibre construction: G G^dagger / tr.
  Eigen::MatrixXcd g(dim, rank);
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      const double u1 = std::max(rng.uniform(), 1e-300), u2 = rng.uniform();
      const double u3 = std::max(rng.uniform(), 1e-300), u4 = rng.uniform();
      const double re = std::sqrt(-2 * std::log(u1)) * std::cos(2 * kPi * u2);
      const double im = std::sqrt(-2 * std::log(u3)) * std::cos(2 * kPi * u4);
      g(i, j) = {re, im};
    }
  }
  Eigen::MatrixXcd rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = (rho + rho.adjoint().eval()) / 2.0;
  return DensityMatrix(rho);
}

}  // namespace

TEST_CASE("carrier states match their defining amplitudes") {
  const double t = 0.3;
  auto s = carrier_state(CarrierLabel::K0P, t);
  CHECK(s[0].real() == doctest::Approx(std::cos(t)));
  CHECK(s[1].real() == doctest::Approx(std::sin(t)));
  s = carrier_state(CarrierLabel::K1P, t);
  CHECK(s[0].real() == doctest::Approx(std::sin(t)));
  CHECK(s[1].real() == doctest::Approx(-std::cos(t)));
  CHECK(std::abs(carrier_state(CarrierLabel::K1, t)[1] - Complex(1, 0)) < 1e-15);
  CHECK(coded_bit(CarrierLabel::K0) == 0);
  CHECK(coded_bit(CarrierLabel::K1) == 0);
  CHECK(coded_bit(CarrierLabel::K0P) == 1);
  CHECK(declaration_letter(CarrierLabel::K1P) == 1);
  CHECK(make_label(1, 0) == CarrierLabel::K0P);
}

TEST_CASE("theta outside the open interval is rejected") {
  CHECK_THROWS_AS(carrier_state(CarrierLabel::K0, 0.0), DomainError);
  CHECK_THROWS_AS(carrier_state(CarrierLabel::K0, kPi / 2), DomainError);
  CHECK_THROWS_AS(carrier_state(CarrierLabel::K0, -0.1), DomainError);
  CHECK_NOTHROW(carrier_state(CarrierLabel::K0, 1e-6));
}

TEST_CASE("attack states") {
  auto a = attack_state(AttackState::A0PP, kPi / 4);
  CHECK(a[0].real() == doctest::Approx(std::cos(kPi / 8)).epsilon(1e-12));
  CHECK(a[1].real() == doctest::Approx(std::sin(kPi / 8)).epsilon(1e-12));
  CHECK(a[0].real() == doctest::Approx(0.92388).epsilon(1e-5));
  auto b = attack_state(AttackState::A1PP, kPi / 4);
  CHECK(b[0].real() == doctest::Approx(std::sin(kPi / 8)).epsilon(1e-12));
  CHECK(b[1].real() == doctest::Approx(-std::cos(kPi / 8)).epsilon(1e-12));
  // The pi/2 endpoint is outside the protocol range; check the formula just inside it.
  auto c = attack_state(AttackState::A0PP, kPi / 2 - 1e-9);
  CHECK(c[0].real() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-8));
}

TEST_CASE("normalization and orthogonality over a theta grid") {
  for (double t : theta_grid()) {
    for (auto l : {CarrierLabel::K0, CarrierLabel::K1, CarrierLabel::K0P, CarrierLabel::K1P}) {
      CHECK(std::abs(carrier_state(l, t).amps().norm() - 1.0) < 1e-12);
    }
    CHECK(std::abs(carrier_state(CarrierLabel::K0P, t).inner(carrier_state(CarrierLabel::K1P, t))) < 1e-12);
    CHECK(std::abs(attack_state(AttackState::A0PP, t).inner(attack_state(AttackState::A1PP, t))) < 1e-12);
    const StateVector parts[] = {carrier_state(CarrierLabel::K0P, t), carrier_state(CarrierLabel::K1P, t),
                                 carrier_state(CarrierLabel::K1, t)};
    CHECK(std::abs(tensor(parts).amps().norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("tensor products") {
  const double t = kPi / 4;
  const StateVector zz[] = {carrier_state(CarrierLabel::K0, t), carrier_state(CarrierLabel::K0, t)};
  auto v = tensor(zz);
  REQUIRE(v.dim() == 4);
  CHECK(std::abs(v[0] - Complex(1, 0)) < 1e-15);
  const StateVector pp[] = {carrier_state(CarrierLabel::K0P, t), carrier_state(CarrierLabel::K0P, t)};
  v = tensor(pp);
  for (std::size_t i = 0; i < 4; ++i) CHECK(v[i].real() == doctest::Approx(0.5));
  const StateVector zo[] = {carrier_state(CarrierLabel::K0, t), carrier_state(CarrierLabel::K1, t)};
  v = tensor(zo);
  CHECK(std::abs(v[1] - Complex(1, 0)) < 1e-15);
  CHECK_THROWS_AS(tensor(std::span<const StateVector>{}), DomainError);
}

TEST_CASE("eigenstates measure deterministically") {
  RandomStream rng(11);
  for (int i = 0; i < 1000; ++i) {
    CHECK(measure(carrier_state(CarrierLabel::K0, 0.4), Basis::B, 0.4, rng) == 0);
    CHECK(measure(carrier_state(CarrierLabel::K0P, 0.4), Basis::BP, 0.4, rng) == 0);
    CHECK(measure(carrier_state(CarrierLabel::K1P, 0.4), Basis::BP, 0.4, rng) == 1);
  }
}

TEST_CASE("Born statistics for every label and basis") {
  const double t = 0.5;
  const int trials = 100000;
  {
    RandomStream rng(5);
    int ones = 0;
    for (int i = 0; i < trials; ++i) ones += measure(carrier_state(CarrierLabel::K0, t), Basis::BP, t, rng);
    const double expected = std::pow(std::sin(0.5), 2);
    CHECK(expected == doctest::Approx(0.2298).epsilon(1e-3));
    CHECK(within_sigmas(double(ones) / trials, expected, binomial_sigma(expected, trials), 3.0));
  }
  std::uint64_t seed = 100;
  for (auto l : {CarrierLabel::K0, CarrierLabel::K1, CarrierLabel::K0P, CarrierLabel::K1P}) {
    for (auto b : {Basis::B, Basis::BP}) {
      RandomStream rng(seed++);
      const auto s = carrier_state(l, t);
      const double p1 = outcome_probability(s, b, 1, t);
      int ones = 0;
      for (int i = 0; i < trials; ++i) ones += measure(s, b, t, rng);
      const double sigma = std::max(binomial_sigma(p1, trials), 1e-12);
      CHECK(within_sigmas(double(ones) / trials, p1, sigma));
    }
  }
}

TEST_CASE("fidelity and trace distance on pure qubit pairs") {
  const double t = 0.284;
  const auto r0 = DensityMatrix::pure(carrier_state(CarrierLabel::K0, t));
  const auto r0p = DensityMatrix::pure(carrier_state(CarrierLabel::K0P, t));
  const auto r1 = DensityMatrix::pure(carrier_state(CarrierLabel::K1, t));
  CHECK(fidelity(r0, r0p) == doctest::Approx(0.95995).epsilon(1e-5));
  CHECK(fidelity(r0, r0p) == doctest::Approx(std::cos(t)).epsilon(1e-12));
  CHECK(fidelity(r0p, r0p) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fidelity(r0, r1) < 1e-12);
  for (double th : theta_grid(20)) {
    const auto a = DensityMatrix::pure(carrier_state(CarrierLabel::K0, th));
    const auto b = DensityMatrix::pure(carrier_state(CarrierLabel::K0P, th));
    // Oracle: eigenvalues of the 2x2 difference of projectors are +-sin(theta).
    CHECK(std::abs(trace_distance(a, b) - std::sin(th)) < 1e-12);
  }
  CHECK(trace_distance(r0, r0) < 1e-15);
  CHECK(trace_distance(r0, r1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(fidelity(r0, DensityMatrix::maximally_mixed(4)), DomainError);
  CHECK_THROWS_AS(trace_distance(r0, DensityMatrix::maximally_mixed(4)), DomainError);
}

TEST_CASE("Fuchs-van de Graaf inequalities on random density matrices") {
  RandomStream rng(2024);
  for (std::size_t dim : {2u, 4u, 8u, 16u}) {
    for (int trial = 0; trial < 25; ++trial) {
      const std::size_t rank_a = 1 + rng.below(dim), rank_b = 1 + rng.below(dim);
      const auto a = random_density(dim, rng, rank_a);
      const auto b = random_density(dim, rng, rank_b);
      const double f = fidelity(a, b), d = trace_distance(a, b);
      CHECK(f >= 0.0);
      CHECK(f <= 1.0);
      CHECK(1.0 - f <= d + 1e-9);
      CHECK(d <= std::sqrt(std::max(0.0, 1.0 - f * f)) + 1e-9);
      CHECK(std::abs(fidelity(a, b) - fidelity(b, a)) < 1e-9);
    }
  }
}

TEST_CASE("both letter-pair mixtures are maximally mixed") {
  for (double t : theta_grid(20)) {
    const StateVector unprimed[] = {carrier_state(CarrierLabel::K0, t), carrier_state(CarrierLabel::K1, t)};
    const StateVector primed[] = {carrier_state(CarrierLabel::K0P, t), carrier_state(CarrierLabel::K1P, t)};
    const auto mm = DensityMatrix::maximally_mixed(2).entries();
    CHECK((DensityMatrix::uniform_mixture(unprimed).entries() - mm).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((DensityMatrix::uniform_mixture(primed).entries() - mm).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("density matrix validation") {
  Eigen::MatrixXcd bad(2, 2);
  bad << 1, 0, 0, 1;
  CHECK_THROWS_AS(DensityMatrix{bad}, DomainError);  // trace 2
  bad << 0.5, 0.2, 0.1, 0.5;
  CHECK_THROWS_AS(DensityMatrix{bad}, DomainError);  // not Hermitian
  CHECK_THROWS_AS(DensityMatrix::maximally_mixed(kMaxDensityDim * 2), CapacityError);
  CHECK_THROWS_AS(StateVector({Complex(1, 0), Complex(1, 0)}), DomainError);
  CHECK(DensityMatrix::maximally_mixed(8).is_positive());
}
