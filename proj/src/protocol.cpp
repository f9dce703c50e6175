#include "qpq/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qpq/errors.hpp"

namespace qpq {

namespace {

constexpr std::uint64_t kAttemptTag = 0x1000;
constexpr std::uint64_t kQueryTag = 0x51;
constexpr std::uint64_t kErrorCheckTag = 0x52;
constexpr std::uint64_t kDatabaseTag = 0xDB;

// Probability of outcome 0 for each (carrier, basis) pair.
using BornTable = std::array<std::array<double, 2>, 4>;

BornTable born_table(double theta) {
  BornTable t{};
  for (int l = 0; l < 4; ++l) {
    const StateVector s = carrier_state(static_cast<CarrierLabel>(l), theta);
    t[l][0] = outcome_probability(s, Basis::B, 0, theta);
    t[l][1] = outcome_probability(s, Basis::BP, 0, theta);
  }
  return t;
}

}  // namespace

SeedTriple seeds_from(std::uint64_t seed) {
  return {derive_seed(seed, 1), derive_seed(seed, 2), derive_seed(seed, 3)};
}

std::uint64_t attempt_seed(std::uint64_t seed, int attempt) {
  return attempt == 0 ? seed : derive_seed(seed, kAttemptTag + static_cast<std::uint64_t>(attempt));
}

SeedTriple attempt_seeds(const SeedTriple& seeds, int attempt) {
  return {attempt_seed(seeds.source, attempt), attempt_seed(seeds.channel, attempt),
          attempt_seed(seeds.measurement, attempt)};
}

std::uint64_t query_seed(std::uint64_t measurement_seed) { return derive_seed(measurement_seed, kQueryTag); }

void SessionConfig::validate() const {
  if (database_size < 1) throw DomainError("database size N must be >= 1");
  if (substrings < 1) throw DomainError("substring count k must be >= 1");
  check_theta(theta);
  if (!(loss >= 0.0 && loss < 1.0)) throw DomainError("loss rate must lie in [0, 1)");
  if (!(flip_probability >= 0.0 && flip_probability <= 1.0)) throw DomainError("flip probability must lie in [0, 1]");
  if (photon_batch < 1) throw DomainError("photon batch must be >= 1");
  if (max_restarts < 0) throw DomainError("max_restarts must be >= 0");
  if (!(check_fraction >= 0.0 && check_fraction <= 1.0)) throw DomainError("check fraction must lie in [0, 1]");
  if (raw_length() / substrings != database_size || raw_length() > kPhotonSafetyCap) {
    throw DomainError("raw key length kN too large");
  }
}

std::size_t FinalKey::known_count() const {
  return static_cast<std::size_t>(std::count(alice_mask.begin(), alice_mask.end(), std::uint8_t{1}));
}

std::vector<CarrierLabel> bob_prepare(std::size_t count, RandomStream& rng) {
  std::vector<CarrierLabel> labels(count);
  for (auto& l : labels) l = static_cast<CarrierLabel>(rng.next() >> 62);
  return labels;
}

std::vector<Basis> alice_choose_bases(std::size_t count, RandomStream& rng) {
  std::vector<Basis> bases(count);
  for (auto& b : bases) b = static_cast<Basis>(rng.next() >> 63);
  return bases;
}

Bits channel_transmit(std::span<const CarrierLabel> labels, double loss, RandomStream& rng) {
  Bits received(labels.size());
  for (auto& r : received) r = rng.bernoulli(loss) ? 0 : 1;
  return received;
}

ChannelBatch simulate_channel(std::span<const CarrierLabel> labels, std::span<const Basis> bases, double theta,
                              double loss, double flip_probability, RandomStream& channel) {
  if (labels.size() != bases.size()) throw DomainError("simulate_channel: labels and bases differ in length");
  const BornTable born = born_table(theta);
  ChannelBatch out;
  out.received = channel_transmit(labels, loss, channel);
  out.outcomes.assign(labels.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!out.received[i]) continue;
    const double p0 = born[static_cast<int>(labels[i])][static_cast<int>(bases[i])];
    std::uint8_t outcome = channel.uniform() < p0 ? 0 : 1;
    if (flip_probability > 0.0 && channel.bernoulli(flip_probability)) outcome ^= 1u;
    out.outcomes[i] = outcome;
  }
  return out;
}

std::optional<std::uint8_t> sift(Basis basis, std::uint8_t outcome, std::uint8_t declaration) {
  // Letter d leaves candidates {|d>, |d'>}. The outcome with index != d is
  // orthogonal to the candidate from the measured basis, so the photon was
  // the candidate from the other basis: |d'> (bit 1) after a B measurement,
  // |d> (bit 0) after a B' measurement.
  if (outcome == declaration) return std::nullopt;
  return basis == Basis::B ? std::uint8_t{1} : std::uint8_t{0};
}

FinalKey xor_compress(const RawKey& raw, std::size_t k, std::size_t n) {
  if (k < 1 || n < 1) throw DomainError("xor_compress: k and N must be >= 1");
  if (raw.bits.size() != k * n || raw.alice_mask.size() != k * n || raw.alice_bits.size() != k * n) {
    throw DomainError("xor_compress: raw key length is not kN");
  }
  FinalKey out{Bits(n, 0), Bits(n, 1), Bits(n, 0)};
  for (std::size_t m = 0; m < k; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = m * n + i;
      out.bits[i] ^= raw.bits[r];
      out.alice_mask[i] &= raw.alice_mask[r];
      out.alice_bits[i] ^= raw.alice_bits[r];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.alice_mask[i]) out.alice_bits[i] = 0;
  }
  return out;
}

KeyDistribution run_key_distribution(const SessionConfig& config, const SeedTriple& seeds) {
  config.validate();
  RandomStream source(seeds.source);
  RandomStream channel(seeds.channel);
  RandomStream measurement(seeds.measurement);

  const std::size_t target = config.raw_length();
  KeyDistribution kd;
  kd.records.reserve(target);
  std::size_t retained = 0;
  std::uint64_t sent = 0;

  while (retained < target) {
    if (sent >= kPhotonSafetyCap) {
      throw ResourceError("photon budget of " + std::to_string(kPhotonSafetyCap) + " exhausted with " +
                          std::to_string(retained) + " of " + std::to_string(target) + " bits retained");
    }
    const auto batch = static_cast<std::size_t>(std::min<std::uint64_t>(config.photon_batch, kPhotonSafetyCap - sent));
    const auto labels = bob_prepare(batch, source);
    const auto bases = alice_choose_bases(batch, measurement);
    const auto ch = simulate_channel(labels, bases, config.theta, config.loss, config.flip_probability, channel);
    for (std::size_t i = 0; i < batch && retained < target; ++i) {
      PhotonRecord rec;
      rec.index = sent + i;
      rec.label = labels[i];
      rec.received = ch.received[i] != 0;
      rec.basis = bases[i];
      if (rec.received) {
        rec.outcome = ch.outcomes[i];
        rec.declaration = declaration_letter(rec.label);
        rec.sift = sift(rec.basis, rec.outcome, rec.declaration);
        kd.records.push_back(rec);
        if (++retained == target) kd.photons_sent = rec.index + 1;
      } else if (config.record_lost_photons) {
        kd.records.push_back(rec);
      }
    }
    sent += batch;
  }
  kd.photons_received = target;

  kd.raw.bits.reserve(target);
  kd.raw.alice_mask.reserve(target);
  kd.raw.alice_bits.reserve(target);
  for (const auto& rec : kd.records) {
    if (!rec.received) continue;
    kd.raw.bits.push_back(coded_bit(rec.label));
    kd.raw.alice_mask.push_back(rec.sift ? 1 : 0);
    kd.raw.alice_bits.push_back(rec.sift.value_or(0));
    if (rec.sift) ++kd.conclusive_count;
  }
  kd.final_key = xor_compress(kd.raw, config.substrings, config.database_size);
  return kd;
}

Bits bob_encrypt(std::span<const std::uint8_t> key, std::span<const std::uint8_t> database, std::size_t shift) {
  const std::size_t n = key.size();
  if (database.size() != n) throw DomainError("database length differs from key length");
  if (shift >= n) throw DomainError("shift out of range");
  Bits c(n);
  for (std::size_t m = 0; m < n; ++m) c[m] = database[m] ^ key[(m + shift) % n];
  return c;
}

std::size_t alice_pick_known_index(const FinalKey& key, RandomStream& rng, std::span<const std::size_t> consumed) {
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < key.alice_mask.size(); ++i) {
    if (key.alice_mask[i] && std::find(consumed.begin(), consumed.end(), i) == consumed.end()) usable.push_back(i);
  }
  if (usable.empty()) throw RestartRequired("Alice knows no usable final-key bit; the protocol must be restarted");
  return usable[rng.below(usable.size())];
}

std::size_t shift_for(std::size_t known_index, std::size_t target, std::size_t n) {
  return (known_index + n - target % n) % n;
}

QueryExchange oblivious_query(const FinalKey& key, std::span<const std::uint8_t> database, std::size_t target,
                              RandomStream& rng, std::span<const std::size_t> consumed) {
  const std::size_t n = key.bits.size();
  if (target >= n) throw DomainError("query index out of range");
  if (database.size() != n) throw DomainError("database length differs from key length");
  QueryExchange q;
  q.target = target;
  q.known_index = alice_pick_known_index(key, rng, consumed);
  q.shift = shift_for(*q.known_index, target, n);
  q.ciphertext = bob_encrypt(key.bits, database, q.shift);
  q.retrieved_bit = q.ciphertext[target] ^ key.alice_bits[*q.known_index];
  return q;
}

ErrorEstimate estimate_error_rate(const FinalKey& alice_key, const FinalKey& bob_key, double sample_fraction,
                                  RandomStream& rng) {
  if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) throw DomainError("sample fraction must lie in (0, 1]");
  if (alice_key.alice_mask.size() != bob_key.bits.size()) throw DomainError("key lengths differ");
  std::vector<std::size_t> known;
  for (std::size_t i = 0; i < alice_key.alice_mask.size(); ++i) {
    if (alice_key.alice_mask[i]) known.push_back(i);
  }
  if (known.size() < 2) throw InsufficientKey("error check needs at least two known bits");
  const auto wanted = static_cast<std::size_t>(std::floor(sample_fraction * static_cast<double>(known.size())));
  const std::size_t m = std::min(wanted, known.size() - 1);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(known.size() - i));
    std::swap(known[i], known[j]);
  }
  ErrorEstimate est;
  est.consumed.assign(known.begin(), known.begin() + static_cast<std::ptrdiff_t>(m));
  std::sort(est.consumed.begin(), est.consumed.end());
  if (m == 0) return est;
  std::size_t mismatches = 0;
  for (std::size_t pos : est.consumed) mismatches += alice_key.alice_bits[pos] != bob_key.bits[pos];
  est.rate = static_cast<double>(mismatches) / static_cast<double>(m);
  return est;
}

SessionOutcome run_session(const SessionConfig& config, std::span<const std::uint8_t> database, std::size_t item) {
  config.validate();
  if (database.size() != config.database_size) throw DomainError("database length differs from N");
  if (item >= config.database_size) throw DomainError("item index out of range");

  SessionOutcome out;
  SessionReport& report = out.report;
  report.config = config;
  report.item = item;

  for (int attempt = 0;; ++attempt) {
    const SeedTriple seeds = attempt_seeds(config.seeds, attempt);
    out.key = run_key_distribution(config, seeds);
    report.photons_sent += out.key.photons_sent;
    report.photons_received += out.key.photons_received;
    report.conclusive_count = out.key.conclusive_count;
    report.known_final_count = out.key.final_key.known_count();
    if (report.known_final_count > 0) break;
    if (attempt == config.max_restarts) {
      report.failure = "restart limit reached with no known final-key bit";
      return out;
    }
    report.restarted = attempt + 1;
  }

  const std::uint64_t measurement_seed = attempt_seeds(config.seeds, report.restarted).measurement;
  std::vector<std::size_t> consumed;
  if (config.check_fraction > 0.0 && report.known_final_count >= 2) {
    RandomStream check_rng(derive_seed(measurement_seed, kErrorCheckTag));
    ErrorEstimate est = estimate_error_rate(out.key.final_key, out.key.final_key, config.check_fraction, check_rng);
    report.error_rate = est.rate;
    consumed = std::move(est.consumed);
    if (est.rate && *est.rate > config.error_threshold) {
      report.failure = "error rate above threshold";
      return out;
    }
  }

  RandomStream query_rng(query_seed(measurement_seed));
  report.query = oblivious_query(out.key.final_key, database, item, query_rng, consumed);
  report.success = true;
  return out;
}

Bits random_database(std::size_t n, std::uint64_t seed) {
  RandomStream rng(derive_seed(seed, kDatabaseTag));
  Bits db(n);
  for (auto& b : db) b = static_cast<std::uint8_t>(rng.next() >> 63);
  return db;
}

}  // namespace qpq
