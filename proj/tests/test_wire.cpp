#include <doctest.h>

#include <thread>

#include "qpq/bits.hpp"
#include "qpq/endpoints.hpp"
#include "qpq/protocol.hpp"
#include "qpq/transport.hpp"
#include "qpq/wire.hpp"
#include "wire_support.hpp"

using namespace qpq;
using namespace qpq::wire;
using qpq::test::random_message;
using qpq::test::run_over_pipe;

namespace {

using Bytes = std::vector<std::uint8_t>;

SessionConfig session(std::size_t n, std::size_t k, double theta, double loss, std::uint64_t seed) {
  SessionConfig c;
  c.database_size = n;
  c.substrings = k;
  c.theta = theta;
  c.loss = loss;
  c.seeds = seeds_from(seed);
  return c;
}

}  // namespace

TEST_CASE("SHIFT layout") { CHECK(encode_frame(Shift{2}) == Bytes{0, 0, 0, 5, 0x07, 0, 0, 0, 2}); }

TEST_CASE("DECLARATION packs letters MSB first after a count") {
  const Bytes frame = encode_frame(Declaration{bits_from_string("1011")});
  CHECK(frame == Bytes{0, 0, 0, 6, 0x05, 0, 0, 0, 4, 0xB0});
}

TEST_CASE("HELLO layout") {
  const Bytes frame = encode_frame(Hello{0.5, 1000, 2, 0.25});
  REQUIRE(frame.size() == 4 + 1 + 24);
  CHECK(frame[4] == 0x01);
  // 0.5 = 0x3FE0000000000000
  CHECK(Bytes(frame.begin() + 5, frame.begin() + 13) == Bytes{0x3F, 0xE0, 0, 0, 0, 0, 0, 0});
  CHECK(Bytes(frame.begin() + 13, frame.begin() + 17) == Bytes{0, 0, 0x03, 0xE8});
}

TEST_CASE("randomized round trip") {
  RandomStream rng(123);
  for (int i = 0; i < 20000; ++i) {
    const Message m = random_message(rng);
    const Bytes frame = encode_frame(m);
    CHECK(decode_frame(frame) == m);
  }
}

TEST_CASE("malformed frames are rejected") {
  const Bytes good = encode_frame(Declaration{bits_from_string("10110")});
  for (std::size_t cut = 0; cut < good.size(); ++cut) {
    CHECK_THROWS_AS(decode_frame(std::span(good).first(cut)), DecodeError);
  }
  Bytes trailing = good;
  trailing.push_back(0);
  CHECK_THROWS_AS(decode_frame(trailing), DecodeError);

  Bytes oversize{0x01, 0x00, 0x00, 0x01, 0x08};
  try {
    decode_frame(oversize);
    FAIL("oversize frame accepted");
  } catch (const DecodeError& e) {
    CHECK(std::string(e.what()).find("cap") != std::string::npos);
  }
  CHECK_THROWS_AS(encode_frame(Ciphertext{Bits((std::size_t{1} << 27) + 64, 1)}), DecodeError);

  Bytes unknown{0, 0, 0, 1, 0x42};
  try {
    decode_frame(unknown);
    FAIL("unknown type accepted");
  } catch (const DecodeError& e) {
    CHECK(e.code() == ErrorCode::UnknownType);
  }
  // Nonzero padding bits.
  Bytes padded{0, 0, 0, 6, 0x05, 0, 0, 0, 4, 0xB1};
  CHECK_THROWS_AS(decode_frame(padded), DecodeError);
  // Body longer than its fields.
  Bytes long_shift{0, 0, 0, 6, 0x07, 0, 0, 0, 2, 0};
  CHECK_THROWS_AS(decode_frame(long_shift), DecodeError);
}

TEST_CASE("frames survive a pipe and a socket") {
  auto [a, b] = make_pipe_pair();
  write_frame(*a, Shift{9});
  CHECK(read_frame(*b) == Message{Shift{9}});

  TcpListener listener("127.0.0.1", 0);
  std::thread client([port = listener.port()] {
    auto s = connect_tcp("127.0.0.1", port);
    write_frame(*s, SiftAck{3});
    CHECK(read_frame(*s) == Message{Ciphertext{bits_from_string("101")}});
  });
  auto server = listener.accept();
  CHECK(read_frame(*server) == Message{SiftAck{3}});
  write_frame(*server, Ciphertext{bits_from_string("101")});
  client.join();
  CHECK(parse_address("localhost:7341") == std::pair<std::string, std::uint16_t>{"localhost", 7341});
  CHECK_THROWS(parse_address("nohost"));
}

TEST_CASE("endpoints match the in-process engine") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    auto c = session(60 + 13 * seed, 1 + seed % 3, 0.35 + 0.03 * seed, (seed % 3) * 0.3, seed);
    c.photon_batch = seed % 2 ? 4096 : 97;
    const Bits db = random_database(c.database_size, seed);
    const std::size_t item = (seed * 31) % c.database_size;
    const auto local = run_session(c, db, item);
    const auto wire = run_over_pipe(c, db, item);
    CHECK_FALSE(wire.alice.aborted);
    CHECK_FALSE(wire.bob.aborted);
    CHECK(wire.alice.report.success == local.report.success);
    CHECK(wire.bob.report.success == local.report.success);
    CHECK(wire.alice.report.restarted == local.report.restarted);
    CHECK(wire.bob.report.photons_sent == local.report.photons_sent);
    CHECK(wire.alice.report.photons_sent == local.report.photons_sent);
    CHECK(wire.alice.report.known_final_count == local.report.known_final_count);
    CHECK(wire.bob.final_key.bits == local.key.final_key.bits);
    CHECK(wire.alice.final_key.alice_mask == local.key.final_key.alice_mask);
    CHECK(wire.alice.final_key.alice_bits == local.key.final_key.alice_bits);
    if (local.report.success) {
      CHECK(wire.alice.report.query->retrieved_bit == local.report.query->retrieved_bit);
      CHECK(*wire.alice.report.query->retrieved_bit == db[item]);
      CHECK(wire.bob.report.query->shift == local.report.query->shift);
      CHECK(wire.bob.report.query->ciphertext == local.report.query->ciphertext);
    }
  }
}

TEST_CASE("restarts and the restart limit over the wire") {
  auto c = session(5, 3, 0.2, 0.0, 3);
  c.max_restarts = 2;
  const auto local = run_session(c, Bits(5, 1), 0);
  const auto wire = run_over_pipe(c, Bits(5, 1), 0);
  CHECK_FALSE(local.report.success);
  CHECK_FALSE(wire.alice.report.success);
  CHECK_FALSE(wire.alice.aborted);
  CHECK(wire.alice.report.restarted == local.report.restarted);
  CHECK(wire.bob.report.restarted == local.report.restarted);
  CHECK(wire.alice.report.failure.find("restart limit") != std::string::npos);
}

TEST_CASE("frame audit: nothing private crosses the wire") {
  auto c = session(300, 2, 0.5, 0.2, 17);
  c.photon_batch = 256;
  const Bits db = random_database(300, 17);
  std::vector<std::pair<Direction, Message>> frames;
  std::mutex mu;
  const FrameObserver audit = [&](Direction d, const Message& m) {
    std::lock_guard lock(mu);
    frames.emplace_back(d, m);
  };
  const std::size_t item = 123;
  const auto local = run_session(c, db, item);
  const auto wire = run_over_pipe(c, db, item, audit);
  REQUIRE(wire.alice.report.success);

  std::size_t shifts = 0;
  for (const auto& [dir, msg] : frames) {
    const MessageType t = type_of(msg);
    if (dir == Direction::BobToAlice) {
      // Bob: parameters, channel outcomes, letters, ciphertext. No labels or coded bits.
      CHECK((t == MessageType::Hello || t == MessageType::OutcomeBatch || t == MessageType::Declaration ||
             t == MessageType::Ciphertext));
      if (const auto* d = std::get_if<Declaration>(&msg)) {
        for (std::size_t r = 0; r < d->letters.size(); ++r) {
          CHECK(d->letters[r] == local.key.records[r].declaration);
        }
        CHECK(d->letters != local.key.raw.bits);
      }
    } else {
      // Alice: batch sizes, bases, the known count and the shift. Never i or her mask.
      CHECK((t == MessageType::PhotonBatchRequest || t == MessageType::MeasureSubmit || t == MessageType::SiftAck ||
             t == MessageType::Shift));
      if (const auto* ack = std::get_if<SiftAck>(&msg)) CHECK(ack->known_count == local.report.known_final_count);
      if (const auto* s = std::get_if<Shift>(&msg)) {
        ++shifts;
        CHECK(s->shift == local.report.query->shift);
      }
    }
  }
  CHECK(shifts == 1);
}

TEST_CASE("invalid HELLO makes Alice refuse with code 2") {
  auto [bob_end, alice_end] = make_pipe_pair();
  std::thread bob([stream = bob_end.get()] {
    write_frame(*stream, Hello{0.0, 10, 1, 0.0});
    const Message reply = read_frame(*stream);
    REQUIRE(std::holds_alternative<Error>(reply));
    CHECK(std::get<Error>(reply).code == ErrorCode::InvalidParameters);
  });
  const auto alice = run_alice_endpoint(0, 1, *alice_end);
  bob.join();
  CHECK(alice.aborted);
  CHECK_FALSE(alice.report.success);
  CHECK(alice.diagnostic.find("HELLO") != std::string::npos);
}

TEST_CASE("out-of-order frames abort with a phase violation") {
  auto [bob_end, alice_end] = make_pipe_pair();
  std::thread alice([stream = alice_end.get()] {
    CHECK(std::holds_alternative<Hello>(read_frame(*stream)));
    write_frame(*stream, Shift{1});  // expected PHOTON_BATCH_REQ
    const Message reply = read_frame(*stream);
    REQUIRE(std::holds_alternative<Error>(reply));
    CHECK(std::get<Error>(reply).code == ErrorCode::PhaseViolation);
  });
  const auto c = session(10, 1, 0.5, 0.0, 1);
  const auto bob = run_bob_endpoint(c, Bits(10, 0), *bob_end);
  alice.join();
  CHECK(bob.aborted);
  CHECK(bob.diagnostic.find("SHIFT") != std::string::npos);
}

TEST_CASE("peer disconnect is a clean abort") {
  auto [bob_end, alice_end] = make_pipe_pair();
  std::thread alice([stream = alice_end.get()] {
    read_frame(*stream);
    stream->close();
  });
  const auto c = session(10, 1, 0.5, 0.0, 1);
  const auto bob = run_bob_endpoint(c, Bits(10, 0), *bob_end);
  alice.join();
  CHECK(bob.aborted);
  CHECK(bob.diagnostic.find("transport") != std::string::npos);
}

TEST_CASE("garbage bytes produce a decode error") {
  auto [bob_end, alice_end] = make_pipe_pair();
  std::thread bob([stream = bob_end.get()] {
    const std::uint8_t junk[] = {0, 0, 0, 2, 0x07, 1};  // SHIFT with a 1-byte body
    stream->write_all(junk);
    const Message reply = read_frame(*stream);
    REQUIRE(std::holds_alternative<Error>(reply));
    CHECK(std::get<Error>(reply).code == ErrorCode::Decode);
  });
  const auto alice = run_alice_endpoint(0, 1, *alice_end);
  bob.join();
  CHECK(alice.aborted);
}
