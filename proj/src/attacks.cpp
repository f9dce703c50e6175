#include "qpq/attacks.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include "qpq/errors.hpp"
#include "qpq/planner.hpp"
#include "qpq/protocol.hpp"
#include "qpq/tables.hpp"

namespace qpq {

namespace {

constexpr std::uint64_t kChunkTrials = std::uint64_t{1} << 16;

// Splits `total` trials into fixed chunks with per-chunk derived seeds. The
// chunking does not depend on the worker count, so results are reproducible
// on any machine; the caller reduces in chunk order.
template <class Acc, class Fn>
std::vector<Acc> run_chunks(std::uint64_t total, std::uint64_t seed, Fn fn) {
  const std::uint64_t chunks = (total + kChunkTrials - 1) / kChunkTrials;
  std::vector<Acc> results(static_cast<std::size_t>(chunks));
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t c = next++; c < chunks; c = next++) {
      RandomStream rng(derive_seed(seed, c));
      const std::uint64_t count = std::min(kChunkTrials, total - c * kChunkTrials);
      results[static_cast<std::size_t>(c)] = fn(rng, count);
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto workers = static_cast<unsigned>(std::min<std::uint64_t>(hw, chunks));
  std::vector<std::jthread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  return results;
}

Eigen::Matrix2cd projector(const StateVector& s) {
  Eigen::Vector2cd v = s.amps();
  return v * v.adjoint();
}

struct RawTally {
  std::uint64_t blocks = 0;
  std::uint64_t blocks_known = 0;
  std::uint64_t raw_total = 0;
  std::uint64_t raw_success = 0;
  std::uint64_t wrong = 0;
};

}  // namespace

UsdPovm usd_povm(double theta) {
  check_theta(theta);
  const double c = std::cos(theta);
  UsdPovm povm;
  // e0 lies along |1'> (orthogonal to |0'>), e1 along |1> (orthogonal to |0>).
  povm.e0 = projector(carrier_state(CarrierLabel::K1P, theta)) / (1.0 + c);
  povm.e1 = projector(carrier_state(CarrierLabel::K1, theta)) / (1.0 + c);
  povm.e_fail = Eigen::Matrix2cd::Identity() - povm.e0 - povm.e1;
  return povm;
}

double povm_probability(const Eigen::Matrix2cd& element, const StateVector& state) {
  if (state.dim() != 2) throw DomainError("povm_probability expects a single-qubit state");
  const Eigen::Vector2cd v = state.amps();
  return std::real(v.dot(element * v));
}

std::string attack_name(AttackKind kind) {
  switch (kind) {
    case AttackKind::IndividualUsd: return "usd";
    case AttackKind::HonestProjective: return "honest";
    case AttackKind::Helstrom: return "helstrom";
    case AttackKind::JointUsd: return "joint-usd";
    case AttackKind::BobConclusiveness: return "bob";
  }
  return "?";
}

AttackKind parse_attack_kind(const std::string& name) {
  if (name == "usd") return AttackKind::IndividualUsd;
  if (name == "honest") return AttackKind::HonestProjective;
  if (name == "helstrom") return AttackKind::Helstrom;
  if (name == "joint-usd") return AttackKind::JointUsd;
  if (name == "bob") return AttackKind::BobConclusiveness;
  throw DomainError("unknown attack kind " + name);
}

AttackReport alice_individual_attack(AttackKind kind, std::size_t n, double theta, int k, std::uint64_t raw_bits,
                                     std::uint64_t seed) {
  if (kind != AttackKind::IndividualUsd && kind != AttackKind::HonestProjective) {
    throw DomainError("alice_individual_attack handles the usd and honest strategies only");
  }
  check_theta(theta);
  if (n < 1 || k < 1) throw DomainError("N and k must be >= 1");
  if (raw_bits < 1) throw DomainError("at least one raw bit is required");

  const bool usd = kind == AttackKind::IndividualUsd;
  const double per_bit = usd ? 1.0 - std::cos(theta) : conclusive_probability(theta);
  const std::uint64_t kk = static_cast<std::uint64_t>(k);
  const std::uint64_t blocks = (raw_bits + kk - 1) / kk;

  // USD: identify probabilities for inputs |0> (bit 0) and |0'> (bit 1).
  const UsdPovm povm = usd_povm(theta);
  double id0[2], id1[2];
  for (int b = 0; b < 2; ++b) {
    const StateVector s = carrier_state(b ? CarrierLabel::K0P : CarrierLabel::K0, theta);
    id0[b] = povm_probability(povm.e0, s);
    id1[b] = povm_probability(povm.e1, s);
  }
  // Honest: Born probability of outcome 0 per (carrier, basis).
  double born0[4][2];
  for (int l = 0; l < 4; ++l) {
    const StateVector s = carrier_state(static_cast<CarrierLabel>(l), theta);
    born0[l][0] = outcome_probability(s, Basis::B, 0, theta);
    born0[l][1] = outcome_probability(s, Basis::BP, 0, theta);
  }

  auto read_bit = [&](RandomStream& rng, RawTally& t) {
    ++t.raw_total;
    if (usd) {
      const int b = static_cast<int>(rng.next() >> 63);
      const double u = rng.uniform();
      if (u < id0[b]) {
        t.wrong += b != 0;
        ++t.raw_success;
        return true;
      }
      if (u < id0[b] + id1[b]) {
        t.wrong += b != 1;
        ++t.raw_success;
        return true;
      }
      return false;
    }
    const auto label = static_cast<CarrierLabel>(rng.next() >> 62);
    const auto basis = static_cast<Basis>(rng.next() >> 63);
    const std::uint8_t outcome = rng.uniform() < born0[static_cast<int>(label)][static_cast<int>(basis)] ? 0 : 1;
    const auto bit = sift(basis, outcome, declaration_letter(label));
    if (!bit) return false;
    t.wrong += *bit != coded_bit(label);
    ++t.raw_success;
    return true;
  };

  const auto tallies = run_chunks<RawTally>(blocks, seed, [&](RandomStream& rng, std::uint64_t count) {
    RawTally t;
    for (std::uint64_t b = 0; b < count; ++b) {
      bool all = true;
      for (int m = 0; m < k; ++m) all = read_bit(rng, t) && all;
      ++t.blocks;
      t.blocks_known += all;
    }
    return t;
  });
  RawTally total;
  for (const auto& t : tallies) {
    total.blocks += t.blocks;
    total.blocks_known += t.blocks_known;
    total.raw_total += t.raw_total;
    total.raw_success += t.raw_success;
    total.wrong += t.wrong;
  }

  AttackReport r;
  r.kind = kind;
  r.theta = theta;
  r.substrings = k;
  r.database_size = n;
  r.trials = total.raw_total;
  r.seed = seed;
  const double nd = static_cast<double>(n);
  r.analytic = nd * std::pow(per_bit, k);
  const double f = static_cast<double>(total.blocks_known) / static_cast<double>(total.blocks);
  r.estimate = nd * f;
  r.sigma = nd * std::sqrt(f * (1.0 - f) / static_cast<double>(total.blocks));
  r.per_bit_analytic = per_bit;
  const double rate = static_cast<double>(total.raw_success) / static_cast<double>(total.raw_total);
  r.per_bit_estimate = rate;
  r.per_bit_sigma = std::sqrt(rate * (1.0 - rate) / static_cast<double>(total.raw_total));
  r.wrong_identifications = total.wrong;
  return r;
}

ParityPair parity_mixtures(double theta, int k) {
  check_theta(theta);
  if (k < 1) throw DomainError("k must be >= 1");
  if (k > kMaxParitySubstrings) {
    throw CapacityError("parity mixtures limited to k <= " + std::to_string(kMaxParitySubstrings));
  }
  const Eigen::MatrixXcd s0 = projector(carrier_state(CarrierLabel::K0, theta));
  const Eigen::MatrixXcd s1 = projector(carrier_state(CarrierLabel::K0P, theta));
  Eigen::MatrixXcd even = s0, odd = s1;
  for (int m = 1; m < k; ++m) {
    // Prepending bit 0 keeps the parity, bit 1 flips it.
    Eigen::MatrixXcd next_even = 0.5 * (kron(s0, even) + kron(s1, odd));
    Eigen::MatrixXcd next_odd = 0.5 * (kron(s0, odd) + kron(s1, even));
    even = std::move(next_even);
    odd = std::move(next_odd);
  }
  return {DensityMatrix(std::move(even)), DensityMatrix(std::move(odd))};
}

double helstrom_guess(double theta, int k) {
  check_theta(theta);
  if (k < 1) throw DomainError("k must be >= 1");
  return 0.5 + 0.5 * std::pow(std::sin(theta), k);
}

double helstrom_guess_numeric(double theta, int k) {
  const ParityPair pair = parity_mixtures(theta, k);
  return 0.5 + 0.5 * trace_distance(pair.rho_even, pair.rho_odd);
}

double joint_usd_bound(double theta, int k) {
  const ParityPair pair = parity_mixtures(theta, k);
  return 1.0 - fidelity(pair.rho_even, pair.rho_odd);
}

BobAttackDistribution bob_attack_distribution(double theta, bool want_conclusive) {
  BobAttackDistribution d;
  for (int which = 0; which < 2; ++which) {
    const StateVector s = attack_state(which == 0 ? AttackState::A0PP : AttackState::A1PP, theta);
    const std::uint8_t letter = want_conclusive ? (which == 0 ? 1 : 0) : (which == 0 ? 0 : 1);
    for (Basis basis : {Basis::B, Basis::BP}) {
      for (std::uint8_t outcome = 0; outcome < 2; ++outcome) {
        const double w = 0.25 * outcome_probability(s, basis, outcome, theta);
        const auto bit = sift(basis, outcome, letter);
        if (!bit) {
          d.inconclusive += w;
        } else if (*bit == 0) {
          d.bit0 += w;
        } else {
          d.bit1 += w;
        }
      }
    }
  }
  return d;
}

AttackReport bob_conclusiveness_attack(double theta, bool want_conclusive, std::uint64_t trials, std::uint64_t seed) {
  check_theta(theta);
  if (trials < 1) throw DomainError("at least one trial is required");
  double born0[2][2];
  for (int which = 0; which < 2; ++which) {
    const StateVector s = attack_state(which == 0 ? AttackState::A0PP : AttackState::A1PP, theta);
    born0[which][0] = outcome_probability(s, Basis::B, 0, theta);
    born0[which][1] = outcome_probability(s, Basis::BP, 0, theta);
  }
  struct Tally {
    std::uint64_t bit0 = 0, bit1 = 0;
  };
  const auto tallies = run_chunks<Tally>(trials, seed, [&](RandomStream& rng, std::uint64_t count) {
    Tally t;
    for (std::uint64_t i = 0; i < count; ++i) {
      const int which = static_cast<int>(rng.next() >> 63);
      const auto basis = static_cast<Basis>(rng.next() >> 63);
      const std::uint8_t outcome = rng.uniform() < born0[which][static_cast<int>(basis)] ? 0 : 1;
      const std::uint8_t letter = want_conclusive ? (which == 0 ? 1 : 0) : (which == 0 ? 0 : 1);
      if (const auto bit = sift(basis, outcome, letter)) (*bit == 0 ? t.bit0 : t.bit1)++;
    }
    return t;
  });
  AttackReport r;
  r.kind = AttackKind::BobConclusiveness;
  r.theta = theta;
  r.trials = trials;
  r.seed = seed;
  for (const auto& t : tallies) {
    r.conclusive_bit0 += t.bit0;
    r.conclusive_bit1 += t.bit1;
  }
  const double half = theta / 2;
  r.analytic = want_conclusive ? std::pow(std::cos(half), 2) : std::pow(std::sin(half), 2);
  const double rate = static_cast<double>(r.conclusive_bit0 + r.conclusive_bit1) / static_cast<double>(trials);
  r.estimate = rate;
  r.sigma = std::sqrt(rate * (1.0 - rate) / static_cast<double>(trials));
  r.per_bit_analytic = r.analytic;
  r.per_bit_estimate = rate;
  r.per_bit_sigma = r.sigma;
  return r;
}

std::string figure_name(FigureId id) {
  static const char* names[] = {"F1", "F2", "F3", "F4", "F5"};
  return names[static_cast<int>(id)];
}

FigureId parse_figure_id(const std::string& name) {
  for (int i = 0; i < 5; ++i) {
    if (figure_name(static_cast<FigureId>(i)) == name) return static_cast<FigureId>(i);
  }
  throw DomainError("unknown figure " + name);
}

Series fig_data(FigureId id, const FigureGrid& grid) {
  const double quarter = std::numbers::pi / 4;
  auto theta_at = [&](int i) { return i * (std::numbers::pi / 2) / grid.theta_steps; };
  switch (id) {
    case FigureId::F1: return flexibility_curves();
    case FigureId::F2: return fixed_size_landscape();
    case FigureId::F3: {
      Series s{"F3", {"theta", "usd", "projective"}, {}};
      for (int i = 1; i < grid.theta_steps; ++i) {
        const double t = theta_at(i);
        s.rows.push_back({t, 1.0 - std::cos(t), std::pow(std::sin(t), 2) / 2.0});
      }
      return s;
    }
    case FigureId::F4: {
      Series s{"F4", {"theta", "k", "p_success", "expected_bits", "individual_usd"}, {}};
      for (double t : grid.thetas) {
        for (int k = 1; k <= grid.max_k; ++k) {
          const double bound = joint_usd_bound(t, k);
          s.rows.push_back({t, static_cast<double>(k), bound, grid.database_size * bound,
                            std::pow(1.0 - std::cos(t), k)});
        }
      }
      return s;
    }
    case FigureId::F5: {
      Series s{"F5", {"theta", "p_conclusive", "p_inconclusive", "reference"}, {}};
      const double reference = std::pow(std::cos(quarter / 2), 2);
      for (int i = 1; i < grid.theta_steps; ++i) {
        const double t = theta_at(i);
        s.rows.push_back({t, std::pow(std::cos(t / 2), 2), std::pow(std::sin(t / 2), 2), reference});
      }
      return s;
    }
  }
  throw DomainError("unknown figure");
}

}  // namespace qpq
