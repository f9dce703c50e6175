#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <set>

#include "qpq/bits.hpp"
#include "qpq/errors.hpp"
#include "qpq/protocol.hpp"
#include "qpq/qubit.hpp"
#include "test_support.hpp"

using namespace qpq;
using qpq::test::binomial_sigma;
using qpq::test::theta_grid;
using qpq::test::within_sigmas;

namespace {

SessionConfig config_for(std::size_t n, std::size_t k, double theta, double loss = 0.0, std::uint64_t seed = 1) {
  SessionConfig c;
  c.database_size = n;
  c.substrings = k;
  c.theta = theta;
  c.loss = loss;
  c.seeds = seeds_from(seed);
  return c;
}

Bits bits(const char* s) { return bits_from_string(s); }

}  // namespace

TEST_CASE("bob_prepare is replayable and uniform") {
  RandomStream a(9), b(9);
  CHECK(bob_prepare(4, a) == bob_prepare(4, b));

  RandomStream rng(10);
  const std::size_t n = 100000;
  const auto labels = bob_prepare(n, rng);
  std::array<double, 4> freq{};
  double bit0 = 0;
  for (auto l : labels) {
    freq[static_cast<int>(l)] += 1.0 / n;
    bit0 += coded_bit(l) == 0 ? 1.0 / n : 0.0;
  }
  for (double f : freq) CHECK(within_sigmas(f, 0.25, binomial_sigma(0.25, n)));
  CHECK(within_sigmas(bit0, 0.5, binomial_sigma(0.5, n)));
}

TEST_CASE("channel_transmit") {
  RandomStream src(1);
  const auto labels = bob_prepare(100000, src);
  RandomStream r0(2);
  const auto all = channel_transmit(labels, 0.0, r0);
  CHECK(std::count(all.begin(), all.end(), 1) == 100000);

  RandomStream r1(3);
  const auto lossy = channel_transmit(labels, 0.9, r1);
  const double received = static_cast<double>(std::count(lossy.begin(), lossy.end(), 1));
  CHECK(std::abs(received - 1e4) <= 4 * std::sqrt(1e5 * 0.1 * 0.9));

  RandomStream r2(4), r3(4);
  CHECK(channel_transmit(labels, 0.5, r2) == channel_transmit(labels, 0.5, r3));
}

TEST_CASE("sift examples") {
  CHECK(sift(Basis::B, 1, 0) == std::optional<std::uint8_t>(1));
  CHECK_FALSE(sift(Basis::B, 0, 0).has_value());
  CHECK(sift(Basis::BP, 0, 1) == std::optional<std::uint8_t>(0));
}

TEST_CASE("sift truth table is sound for every theta") {
  const auto grid = theta_grid(50);
  for (double t : grid) {
    int conclusive_cases = 0, possible_conclusive = 0;
    for (int l = 0; l < 4; ++l) {
      const auto label = static_cast<CarrierLabel>(l);
      const auto state = carrier_state(label, t);
      for (auto b : {Basis::B, Basis::BP}) {
        for (std::uint8_t o : {0, 1}) {
          const auto s = sift(b, o, declaration_letter(label));
          if (!s) continue;
          ++conclusive_cases;
          // Eigenstate outcomes that cannot occur are skipped.
          if (outcome_probability(state, b, o, t) < 1e-24) continue;
          ++possible_conclusive;
          CHECK(*s == coded_bit(label));
          // The same outcome must be impossible for the other candidate with this letter.
          const auto other = make_label(coded_bit(label) ^ 1u, declaration_letter(label));
          CHECK(outcome_probability(carrier_state(other, t), b, o, t) < 1e-24);
        }
      }
    }
    CHECK(conclusive_cases == 8);
    CHECK(possible_conclusive == 4);
  }
}

TEST_CASE("xor_compress") {
  RawKey raw{bits("1100"), bits("1101"), bits("1100")};
  const FinalKey f = xor_compress(raw, 2, 2);
  // Substrings 11 and 00: bits 1^0, 1^0; mask 1&0, 1&1.
  CHECK(bits_to_string(f.bits) == "11");
  CHECK(bits_to_string(f.alice_mask) == "01");
  CHECK(bits_to_string(f.alice_bits) == "01");

  RawKey one{bits("10110"), bits("10010"), bits("10010")};
  const FinalKey g = xor_compress(one, 1, 5);
  CHECK(g.bits == one.bits);
  CHECK(g.alice_mask == one.alice_mask);

  RawKey full{bits("011011"), bits("111111"), bits("011011")};
  const FinalKey h = xor_compress(full, 3, 2);
  CHECK(bits_to_string(h.alice_mask) == "11");
  CHECK(h.alice_bits == h.bits);

  CHECK_THROWS_AS(xor_compress(raw, 3, 2), DomainError);
}

TEST_CASE("key distribution retains exactly kN photons and the raw key is consistent") {
  for (double loss : {0.0, 0.4}) {
    auto c = config_for(300, 3, 0.6, loss, 77);
    c.photon_batch = 128;
    const auto kd = run_key_distribution(c, c.seeds);
    REQUIRE(kd.raw.bits.size() == 900);
    CHECK(kd.records.size() == 900);
    CHECK(kd.photons_received == 900);
    CHECK(kd.photons_sent >= 900);
    CHECK(kd.records.back().index + 1 == kd.photons_sent);
    for (std::size_t i = 0; i < kd.raw.bits.size(); ++i) {
      if (kd.raw.alice_mask[i]) CHECK(kd.raw.alice_bits[i] == kd.raw.bits[i]);
      CHECK(kd.records[i].declaration == declaration_letter(kd.records[i].label));
    }
    for (std::size_t i = 0; i < 300; ++i) {
      const bool all = kd.raw.alice_mask[i] && kd.raw.alice_mask[300 + i] && kd.raw.alice_mask[600 + i];
      CHECK(bool(kd.final_key.alice_mask[i]) == all);
      CHECK(kd.final_key.bits[i] == (kd.raw.bits[i] ^ kd.raw.bits[300 + i] ^ kd.raw.bits[600 + i]));
    }
  }
}

TEST_CASE("conclusive rate matches sin^2(theta)/2 over a theta grid") {
  const std::size_t n = 100000;
  std::uint64_t seed = 500;
  for (double t : theta_grid(20)) {
    const auto c = config_for(n, 1, t, 0.0, seed++);
    const auto kd = run_key_distribution(c, c.seeds);
    const double p = std::pow(std::sin(t), 2) / 2;
    CHECK(within_sigmas(double(kd.conclusive_count) / n, p, binomial_sigma(p, n)));
  }
  const auto c = config_for(n, 1, std::numbers::pi / 4, 0.0, 3);
  const auto kd = run_key_distribution(c, c.seeds);
  CHECK(within_sigmas(double(kd.conclusive_count) / n, 0.25, binomial_sigma(0.25, n)));
}

TEST_CASE("conclusive fraction does not depend on loss") {
  const std::size_t n = 100000;
  const double p = std::pow(std::sin(0.5), 2) / 2;
  for (double loss : {0.0, 0.5}) {
    const auto c = config_for(n, 1, 0.5, loss, 42);
    const auto kd = run_key_distribution(c, c.seeds);
    CHECK(within_sigmas(double(kd.conclusive_count) / n, p, binomial_sigma(p, n)));
  }
}

TEST_CASE("retained records do not depend on lost photons' labels") {
  auto c = config_for(50, 1, 0.5, 0.3, 5);
  c.record_lost_photons = true;
  const auto kd = run_key_distribution(c, c.seeds);
  std::size_t lost = 0;
  for (const auto& r : kd.records) lost += !r.received;
  CHECK(kd.records.size() == 50 + lost);
  CHECK(kd.raw.bits.size() == 50);
}

TEST_CASE("oblivious query worked example") {
  const Bits k = bits("10110"), x = bits("01010");
  CHECK(shift_for(4, 2, 5) == 2);
  CHECK(bits_to_string(bob_encrypt(k, x, 2)) == "10000");

  // Only position 4 known, so j is forced.
  FinalKey key{k, bits("00001"), bits("00000")};
  RandomStream rng(1);
  const auto q = oblivious_query(key, x, 2, rng);
  CHECK(q.known_index == std::optional<std::size_t>(4));
  CHECK(q.shift == 2);
  CHECK(bits_to_string(q.ciphertext) == "10000");
  CHECK(q.retrieved_bit == std::optional<std::uint8_t>(0));

  FinalKey self{k, bits("00100"), bits("00100")};
  const auto z = oblivious_query(self, x, 2, rng);
  CHECK(z.shift == 0);
  CHECK(z.retrieved_bit == std::optional<std::uint8_t>(x[2]));

  FinalKey none{k, bits("00000"), bits("00000")};
  CHECK_THROWS_AS(oblivious_query(none, x, 2, rng), RestartRequired);
  CHECK_THROWS_AS(oblivious_query(self, x, 5, rng), DomainError);
}

TEST_CASE("j is uniform over known positions") {
  FinalKey key{bits("1111111111"), bits("1010010001"), bits("1010010001")};
  const Bits db(10, 0);
  RandomStream rng(8);
  std::array<int, 10> hits{};
  const int trials = 40000;
  for (int t = 0; t < trials; ++t) ++hits[*oblivious_query(key, db, 3, rng).known_index];
  for (std::size_t i = 0; i < 10; ++i) {
    if (!key.alice_mask[i]) {
      CHECK(hits[i] == 0);
    } else {
      CHECK(within_sigmas(double(hits[i]) / trials, 0.25, binomial_sigma(0.25, trials)));
    }
  }
}

TEST_CASE("noiseless sessions always retrieve the database bit") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    auto c = config_for(40 + seed, 1 + seed % 3, 0.3 + 0.01 * seed, (seed % 4) * 0.2, seed);
    const Bits db = random_database(c.database_size, seed);
    const std::size_t item = (seed * 7) % c.database_size;
    const auto out = run_session(c, db, item);
    if (!out.report.success) {
      CHECK(out.report.known_final_count == 0);
      continue;
    }
    REQUIRE(out.report.query);
    CHECK(*out.report.query->retrieved_bit == db[item]);
    CHECK(out.report.query->shift == (*out.report.query->known_index + c.database_size - item) % c.database_size);
  }
}

TEST_CASE("sessions restart when Alice knows nothing") {
  // p^k tiny: almost every attempt ends with no known bit.
  auto c = config_for(5, 3, 0.2, 0.0, 3);
  c.max_restarts = 2;
  const auto out = run_session(c, Bits(5, 1), 0);
  CHECK_FALSE(out.report.success);
  CHECK(out.report.restarted == 2);
  CHECK(out.report.known_final_count == 0);
  CHECK_FALSE(out.report.query.has_value());

  auto easy = config_for(200, 1, 0.7, 0.0, 3);
  const auto ok = run_session(easy, Bits(200, 1), 0);
  CHECK(ok.report.success);
  CHECK(ok.report.restarted == 0);
}

TEST_CASE("restarted sessions are counted and still retrieve correctly") {
  int restarted = 0;
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    auto c = config_for(20, 1, 0.2, 0.0, seed);  // P0 = (1-0.0197)^20 ~ 0.67
    const Bits db = random_database(20, seed);
    const auto out = run_session(c, db, 3);
    if (out.report.restarted > 0) ++restarted;
    if (out.report.success) CHECK(*out.report.query->retrieved_bit == db[3]);
  }
  CHECK(restarted > 150);
}

TEST_CASE("error-rate estimation") {
  const std::size_t n = 200000;
  Bits truth(n), mask(n, 1);
  RandomStream fill(4);
  for (auto& b : truth) b = fill.next() >> 63;
  FinalKey alice{truth, mask, truth};
  RandomStream rng(5);
  auto est = estimate_error_rate(alice, alice, 0.5, rng);
  REQUIRE(est.rate);
  CHECK(*est.rate == 0.0);
  CHECK(est.consumed.size() == n / 2);
  CHECK(std::is_sorted(est.consumed.begin(), est.consumed.end()));

  FinalKey bob = alice;
  RandomStream flip(6);
  for (auto& b : bob.bits) {
    if (flip.bernoulli(0.1)) b ^= 1u;
  }
  est = estimate_error_rate(alice, bob, 0.5, rng);
  CHECK(within_sigmas(*est.rate, 0.1, binomial_sigma(0.1, n / 2.0)));

  FinalKey few{bits("0110"), bits("0110"), bits("0110")};
  est = estimate_error_rate(few, few, 0.1, rng);
  CHECK_FALSE(est.rate.has_value());
  CHECK(est.consumed.empty());

  est = estimate_error_rate(few, few, 1.0, rng);
  CHECK(est.consumed.size() == 1);  // one known bit always stays unrevealed

  FinalKey single{bits("0110"), bits("0100"), bits("0100")};
  CHECK_THROWS_AS(estimate_error_rate(single, single, 0.5, rng), InsufficientKey);
}

TEST_CASE("noisy channel feeds the error check") {
  auto c = config_for(2000, 1, 0.785, 0.0, 11);
  c.flip_probability = 0.2;
  c.check_fraction = 0.5;
  c.error_threshold = 0.15;
  const auto out = run_session(c, random_database(2000, 11), 0);
  REQUIRE(out.report.error_rate);
  CHECK(*out.report.error_rate > 0.05);
  CHECK_FALSE(out.report.success);
  CHECK(out.report.failure == "error rate above threshold");
}

TEST_CASE("config validation") {
  auto c = config_for(10, 1, 0.5);
  c.loss = 1.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = config_for(10, 1, 0.0);
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = config_for(0, 1, 0.5);
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = config_for(10, 0, 0.5);
  CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("seed derivation") {
  CHECK(seeds_from(7) == seeds_from(7));
  CHECK_FALSE(seeds_from(7) == seeds_from(8));
  const auto s = seeds_from(7);
  CHECK(std::set<std::uint64_t>{s.source, s.channel, s.measurement}.size() == 3);
  CHECK(attempt_seeds(s, 0) == s);
  CHECK_FALSE(attempt_seeds(s, 1) == s);
  CHECK(random_database(64, 3) == random_database(64, 3));
}

TEST_CASE("database parsing") {
  CHECK(bits_to_string(parse_database("0101", 4)) == "0101");
  CHECK(bits_to_string(parse_database("a", 4)) == "1010");
  CHECK(bits_to_string(parse_database("0xA3", 8)) == "10100011");
  CHECK(bits_to_string(parse_database(" 1 1 0\n", 3, DatabaseFormat::Binary)) == "110");
  CHECK(bits_to_string(parse_database("e", 3, DatabaseFormat::Hex)) == "111");
  CHECK_THROWS_AS(parse_database("012", 3, DatabaseFormat::Binary), DomainError);
  CHECK_THROWS_AS(parse_database("0101", 5), DomainError);
}
