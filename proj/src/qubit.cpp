#include "qpq/qubit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qpq/errors.hpp"

#include <lapacke.h>

namespace qpq {

namespace {

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

void check_dim(std::size_t dim) {
  if (dim > kMaxDensityDim) {
    throw CapacityError("density operator dimension " + std::to_string(dim) + " exceeds cap " +
                        std::to_string(kMaxDensityDim));
  }
}

struct Eigensystem {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXcd vectors;
};

// Hermitian eigendecomposition via LAPACK zheevd; Eigen's solver is several
// times slower at the 2^10 dimensions used by the parity attacks.
Eigensystem hermitian_eigensystem(Eigen::MatrixXcd m, bool with_vectors) {
  const auto n = static_cast<lapack_int>(m.rows());
  Eigensystem es;
  es.values.resize(n);
  const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, with_vectors ? 'V' : 'N', 'L', n,
                                         reinterpret_cast<lapack_complex_double*>(m.data()), n, es.values.data());
  if (info != 0) throw ResourceError("zheevd failed to converge (info " + std::to_string(info) + ")");
  if (with_vectors) es.vectors = std::move(m);
  return es;
}

// Columns V_+ sqrt(lambda_+) for eigenvalues above the numerical rank cutoff.
Eigen::MatrixXcd psd_factor(const Eigen::MatrixXcd& m) {
  const Eigensystem eig = hermitian_eigensystem(m, true);
  const Eigen::VectorXd& w = eig.values;
  const double cutoff = std::max(1e-14 * std::abs(w.maxCoeff()), 1e-300);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) > cutoff) keep.push_back(i);
  }
  Eigen::MatrixXcd factor(m.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    factor.col(static_cast<Eigen::Index>(c)) = eig.vectors.col(keep[c]) * std::sqrt(w(keep[c]));
  }
  return factor;
}

// Eigen's divide-and-conquer SVD returns wrong singular values for some of the
// rank-deficient parity overlaps (k >= 5), so this goes to LAPACK's zgesvd.
double singular_value_sum(Eigen::MatrixXcd m) {
  const auto rows = static_cast<lapack_int>(m.rows()), cols = static_cast<lapack_int>(m.cols());
  Eigen::VectorXd sv(std::min(rows, cols));
  std::vector<double> superb(static_cast<std::size_t>(std::max<lapack_int>(1, std::min(rows, cols))));
  const lapack_int info =
      LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'N', 'N', rows, cols, reinterpret_cast<lapack_complex_double*>(m.data()), rows,
                     sv.data(), nullptr, 1, nullptr, 1, superb.data());
  if (info != 0) throw ResourceError("zgesvd failed to converge (info " + std::to_string(info) + ")");
  return sv.sum();
}

}  // namespace

void check_theta(double theta) {
  if (!(theta > 0.0 && theta < std::numbers::pi / 2)) {
    throw DomainError("theta must lie in (0, pi/2), got " + std::to_string(theta));
  }
}

StateVector::StateVector(Eigen::VectorXcd amps) : amps_(std::move(amps)) {
  if (!is_power_of_two(static_cast<std::size_t>(amps_.size()))) {
    throw DomainError("state dimension must be a power of two >= 2");
  }
  if (std::abs(amps_.squaredNorm() - 1.0) > 1e-12) throw DomainError("state vector is not normalized");
}

StateVector::StateVector(std::initializer_list<Complex> amps)
    : StateVector(Eigen::Map<const Eigen::VectorXcd>(amps.begin(), static_cast<Eigen::Index>(amps.size()))) {}

DensityMatrix::DensityMatrix(Eigen::MatrixXcd entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 1) throw DomainError("density matrix must be square");
  check_dim(dim());
  if ((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw DomainError("density matrix is not Hermitian");
  if (std::abs(entries_.trace() - Complex(1.0)) > 1e-12) throw DomainError("density matrix trace is not 1");
}

DensityMatrix DensityMatrix::pure(const StateVector& state) {
  return DensityMatrix(state.amps() * state.amps().adjoint());
}

DensityMatrix DensityMatrix::uniform_mixture(std::span<const StateVector> states) {
  if (states.empty()) throw DomainError("mixture of zero states");
  const auto d = static_cast<Eigen::Index>(states.front().dim());
  check_dim(static_cast<std::size_t>(d));
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& s : states) {
    if (static_cast<Eigen::Index>(s.dim()) != d) throw DomainError("mixture components differ in dimension");
    acc.noalias() += s.amps() * s.amps().adjoint();
  }
  acc /= static_cast<double>(states.size());
  return DensityMatrix(std::move(acc));
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return DensityMatrix(Eigen::MatrixXcd::Identity(d, d) / static_cast<double>(dim));
}

bool DensityMatrix::is_positive(double tol) const { return hermitian_eigenvalues(entries_).minCoeff() >= -tol; }

StateVector carrier_state(CarrierLabel label, double theta) {
  check_theta(theta);
  const double c = std::cos(theta), s = std::sin(theta);
  switch (label) {
    case CarrierLabel::K0: return {1.0, 0.0};
    case CarrierLabel::K1: return {0.0, 1.0};
    case CarrierLabel::K0P: return {c, s};
    case CarrierLabel::K1P: return {s, -c};
  }
  throw DomainError("unknown carrier label");
}

StateVector attack_state(AttackState which, double theta) {
  check_theta(theta);
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  if (which == AttackState::A0PP) return {c, s};
  return {s, -c};
}

StateVector basis_vector(Basis basis, std::uint8_t outcome, double theta) {
  if (basis == Basis::B) return carrier_state(outcome ? CarrierLabel::K1 : CarrierLabel::K0, theta);
  return carrier_state(outcome ? CarrierLabel::K1P : CarrierLabel::K0P, theta);
}

double outcome_probability(const StateVector& state, Basis basis, std::uint8_t outcome, double theta) {
  if (state.dim() != 2) throw DomainError("measure expects a single-qubit state");
  return std::norm(basis_vector(basis, outcome, theta).inner(state));
}

std::uint8_t measure(const StateVector& state, Basis basis, double theta, RandomStream& rng) {
  const double p0 = outcome_probability(state, basis, 0, theta);
  return rng.uniform() < p0 ? 0 : 1;
}

StateVector tensor(std::span<const StateVector> factors) {
  if (factors.empty()) throw DomainError("tensor of an empty list");
  Eigen::VectorXcd acc = factors.front().amps();
  for (std::size_t f = 1; f < factors.size(); ++f) {
    const Eigen::VectorXcd& b = factors[f].amps();
    Eigen::VectorXcd next(acc.size() * b.size());
    for (Eigen::Index i = 0; i < acc.size(); ++i) next.segment(i * b.size(), b.size()) = acc(i) * b;
    acc = std::move(next);
  }
  // Renormalize away accumulated rounding before the invariant check.
  acc /= acc.norm();
  return StateVector(std::move(acc));
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw DomainError("hermitian_eigenvalues expects a square matrix");
  return hermitian_eigensystem(m, false).values;
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DomainError("fidelity: dimension mismatch");
  const Eigen::MatrixXcd a = psd_factor(rho.entries());
  const Eigen::MatrixXcd b = psd_factor(sigma.entries());
  if (a.cols() == 0 || b.cols() == 0) return 0.0;
  const Eigen::MatrixXcd overlap = a.adjoint() * b;
  return std::clamp(singular_value_sum(overlap), 0.0, 1.0);
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DomainError("trace_distance: dimension mismatch");
  const Eigen::VectorXd w = hermitian_eigenvalues(rho.entries() - sigma.entries());
  return std::clamp(0.5 * w.cwiseAbs().sum(), 0.0, 1.0);
}

}  // namespace qpq
