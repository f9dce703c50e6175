#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>

#include "qpq/random.hpp"

namespace qpq {

using Complex = std::complex<double>;

// Largest density-operator dimension accepted (12 qubits).
inline constexpr std::size_t kMaxDensityDim = std::size_t{1} << 12;

// The four protocol carriers |0>, |1>, |0'>, |1'>.
enum class CarrierLabel : std::uint8_t { K0 = 0, K1 = 1, K0P = 2, K1P = 3 };

// B = {|0>,|1>}, BP = {|0'>,|1'>}.
enum class Basis : std::uint8_t { B = 0, BP = 1 };

// Unprimed carriers code bit 0, primed carriers code bit 1.
constexpr std::uint8_t coded_bit(CarrierLabel label) {
  return (label == CarrierLabel::K0P || label == CarrierLabel::K1P) ? 1 : 0;
}

// Bob's public letter: 0 for {|0>,|0'>}, 1 for {|1>,|1'>}.
constexpr std::uint8_t declaration_letter(CarrierLabel label) {
  return (label == CarrierLabel::K1 || label == CarrierLabel::K1P) ? 1 : 0;
}

constexpr CarrierLabel make_label(std::uint8_t bit, std::uint8_t letter) {
  return static_cast<CarrierLabel>((bit ? 2 : 0) + (letter ? 1 : 0));
}

enum class AttackState : std::uint8_t { A0PP, A1PP };

// Normalized pure state over 2^m dimensions.
class StateVector {
 public:
  // Throws DomainError unless amps has power-of-two size >= 2 and unit norm
  // within 1e-12.
  explicit StateVector(Eigen::VectorXcd amps);
  StateVector(std::initializer_list<Complex> amps);

  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  const Eigen::VectorXcd& amps() const { return amps_; }
  Complex operator[](std::size_t i) const { return amps_(static_cast<Eigen::Index>(i)); }

  Complex inner(const StateVector& other) const { return amps_.dot(other.amps_); }

 private:
  Eigen::VectorXcd amps_;
};

// Hermitian, unit-trace operator. Construction checks hermiticity and trace;
// positivity is checked by is_positive() since it needs an eigensolve.
class DensityMatrix {
 public:
  explicit DensityMatrix(Eigen::MatrixXcd entries);

  static DensityMatrix pure(const StateVector& state);
  // Uniform mixture of pure states.
  static DensityMatrix uniform_mixture(std::span<const StateVector> states);
  static DensityMatrix maximally_mixed(std::size_t dim);

  std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
  const Eigen::MatrixXcd& entries() const { return entries_; }

  bool is_positive(double tol = 1e-10) const;

 private:
  Eigen::MatrixXcd entries_;
};

// Carriers: |0'> = cos t|0> + sin t|1>, |1'> = sin t|0> - cos t|1>.
// Throws DomainError unless 0 < theta < pi/2.
StateVector carrier_state(CarrierLabel label, double theta);

// Dishonest-Bob states |0''> = cos(t/2)|0> + sin(t/2)|1>,
// |1''> = sin(t/2)|0> - cos(t/2)|1>.
StateVector attack_state(AttackState which, double theta);

// Eigenvector for `outcome` of the measurement basis.
StateVector basis_vector(Basis basis, std::uint8_t outcome, double theta);

// Born probability of each outcome.
double outcome_probability(const StateVector& state, Basis basis, std::uint8_t outcome, double theta);

// Samples a single-qubit projective measurement; consumes one draw of rng.
std::uint8_t measure(const StateVector& state, Basis basis, double theta, RandomStream& rng);

StateVector tensor(std::span<const StateVector> factors);
Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

// Ascending eigenvalues of a Hermitian matrix.
Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& m);

// Square-root fidelity tr sqrt(sqrt(rho) sigma sqrt(rho)); equals |<psi|phi>|
// for pure states. Evaluated as the trace norm of A^dagger B where rho = A A^dagger
// and sigma = B B^dagger come from rank-revealing eigendecompositions, which
// avoids square roots of round-off eigenvalues.
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

// Half the sum of absolute eigenvalues of rho - sigma.
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

void check_theta(double theta);

}  // namespace qpq
