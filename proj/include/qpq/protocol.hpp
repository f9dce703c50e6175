#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpq/bits.hpp"
#include "qpq/qubit.hpp"
#include "qpq/random.hpp"

namespace qpq {

// Upper bound on photons generated for one key-distribution attempt.
inline constexpr std::uint64_t kPhotonSafetyCap = 1'000'000'000ULL;

inline constexpr std::size_t kDefaultPhotonBatch = 4096;

// Independent seeds for Bob's source, the channel simulator (loss and Born
// sampling) and Alice's basis choices.
struct SeedTriple {
  std::uint64_t source = 1;
  std::uint64_t channel = 2;
  std::uint64_t measurement = 3;

  bool operator==(const SeedTriple&) const = default;
};

// Expands one user seed into a triple.
SeedTriple seeds_from(std::uint64_t seed);

// Seeds for restart attempt r; attempt 0 returns the seeds unchanged. Each
// component is derived on its own so either party can compute its share.
std::uint64_t attempt_seed(std::uint64_t seed, int attempt);
SeedTriple attempt_seeds(const SeedTriple& seeds, int attempt);

// Seed of Alice's stream for picking the known index j.
std::uint64_t query_seed(std::uint64_t measurement_seed);

struct SessionConfig {
  std::size_t database_size = 0;  // N
  std::size_t substrings = 1;     // k
  double theta = 0.0;
  double loss = 0.0;              // eta
  double flip_probability = 0.0;  // channel bit-flip hook; 0 for noiseless runs
  std::size_t photon_batch = kDefaultPhotonBatch;
  SeedTriple seeds;
  int max_restarts = 20;
  double error_threshold = 0.15;
  double check_fraction = 0.0;  // fraction of known bits compared before the query; 0 disables
  bool record_lost_photons = false;

  std::size_t raw_length() const { return database_size * substrings; }
  // Throws DomainError on out-of-range fields.
  void validate() const;
};

struct PhotonRecord {
  std::uint64_t index = 0;
  CarrierLabel label = CarrierLabel::K0;
  bool received = false;
  Basis basis = Basis::B;
  std::uint8_t outcome = 0;
  std::uint8_t declaration = 0;
  std::optional<std::uint8_t> sift;
};

// `bits` is Bob's (true) view. alice_bits holds Alice's values where
// alice_mask is set and 0 elsewhere.
struct RawKey {
  Bits bits;
  Bits alice_mask;
  Bits alice_bits;
};

struct FinalKey {
  Bits bits;
  Bits alice_mask;
  Bits alice_bits;

  std::size_t known_count() const;
};

struct QueryExchange {
  std::optional<std::size_t> target;       // i, Alice-private
  std::optional<std::size_t> known_index;  // j, Alice-private
  std::size_t shift = 0;                   // s = (j - i) mod N
  Bits ciphertext;
  std::optional<std::uint8_t> retrieved_bit;
};

struct SessionReport {
  SessionConfig config;
  std::optional<std::size_t> item;
  std::uint64_t photons_sent = 0;
  std::uint64_t photons_received = 0;
  std::optional<std::size_t> conclusive_count;
  std::size_t known_final_count = 0;
  int restarted = 0;
  std::optional<double> error_rate;
  std::optional<QueryExchange> query;
  bool success = false;
  std::string failure;
};

// Labels i.i.d. uniform over the four carriers; one draw each.
std::vector<CarrierLabel> bob_prepare(std::size_t count, RandomStream& rng);

// Alice's uniform basis choice for each photon; one draw each.
std::vector<Basis> alice_choose_bases(std::size_t count, RandomStream& rng);

// Received flags; each photon lost with probability eta. One draw per photon
// regardless of eta.
Bits channel_transmit(std::span<const CarrierLabel> labels, double loss, RandomStream& rng);

struct ChannelBatch {
  Bits received;
  Bits outcomes;  // 0 for lost photons
};

// Bob-side channel simulator: loss draws for the whole batch, then one Born
// draw (plus one flip draw when flip_probability > 0) per received photon,
// all from the channel stream.
ChannelBatch simulate_channel(std::span<const CarrierLabel> labels, std::span<const Basis> bases, double theta,
                              double loss, double flip_probability, RandomStream& channel);

// Alice's interpretation of her outcome given Bob's letter. Conclusive exactly
// when the observed eigenstate is orthogonal to one of the two candidates.
std::optional<std::uint8_t> sift(Basis basis, std::uint8_t outcome, std::uint8_t declaration);

// Cuts the raw key into k substrings of length N and XORs them. Alice knows a
// final bit iff she knows all k contributors.
FinalKey xor_compress(const RawKey& raw, std::size_t k, std::size_t n);

struct KeyDistribution {
  std::vector<PhotonRecord> records;  // retained photons in order (plus lost ones when recorded)
  RawKey raw;
  FinalKey final_key;
  std::uint64_t photons_sent = 0;  // photons up to and including the kN-th retained one
  std::uint64_t photons_received = 0;
  std::size_t conclusive_count = 0;
};

// Steps 1-6 for one attempt with the given seeds. Throws ResourceError when
// the photon safety cap is hit before kN photons are retained.
KeyDistribution run_key_distribution(const SessionConfig& config, const SeedTriple& seeds);

// Bob's side of step 7: ciphertext_m = database_m XOR key_{(m+s) mod N}.
Bits bob_encrypt(std::span<const std::uint8_t> key, std::span<const std::uint8_t> database, std::size_t shift);

// Picks j uniformly among Alice's known, unconsumed positions.
std::size_t alice_pick_known_index(const FinalKey& key, RandomStream& rng, std::span<const std::size_t> consumed = {});

std::size_t shift_for(std::size_t known_index, std::size_t target, std::size_t n);

// Full step 7 in-process. Throws RestartRequired when Alice knows no bit.
QueryExchange oblivious_query(const FinalKey& key, std::span<const std::uint8_t> database, std::size_t target,
                              RandomStream& rng, std::span<const std::size_t> consumed = {});

struct ErrorEstimate {
  std::optional<double> rate;          // absent when no position was sampled
  std::vector<std::size_t> consumed;   // revealed positions, ascending
};

// Public comparison of a sample of Alice's known final-key bits against Bob's
// copy. Samples floor(fraction * known) positions, keeping at least one known
// bit unrevealed. Throws InsufficientKey when Alice knows fewer than two bits.
ErrorEstimate estimate_error_rate(const FinalKey& alice_key, const FinalKey& bob_key, double sample_fraction,
                                  RandomStream& rng);

struct SessionOutcome {
  SessionReport report;
  KeyDistribution key;  // last attempt
};

// Runs attempts until Alice knows a final bit (at most max_restarts
// restarts), then the optional error check and the query for `item`.
SessionOutcome run_session(const SessionConfig& config, std::span<const std::uint8_t> database, std::size_t item);

// Database of N bits drawn from a seed.
Bits random_database(std::size_t n, std::uint64_t seed);

}  // namespace qpq
