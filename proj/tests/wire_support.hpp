#pragma once

#include <bit>
#include <cmath>
#include <thread>

#include "qpq/endpoints.hpp"
#include "qpq/random.hpp"
#include "qpq/transport.hpp"
#include "qpq/wire.hpp"

namespace qpq::test {

inline Bits random_bits(RandomStream& rng, std::size_t max_len) {
  Bits b(rng.below(max_len + 1));
  for (auto& x : b) x = rng.next() >> 63;
  return b;
}

// Any finite double, including subnormals and signed zero.
inline double random_double(RandomStream& rng) {
  for (;;) {
    const double d = std::bit_cast<double>(rng.next());
    if (std::isfinite(d)) return d;
  }
}

inline wire::Message random_message(RandomStream& rng) {
  auto u32 = [&] { return static_cast<std::uint32_t>(rng.next()); };
  switch (rng.below(9)) {
    case 0: return wire::Hello{random_double(rng), u32(), u32(), random_double(rng)};
    case 1: return wire::PhotonBatchRequest{u32()};
    case 2: return wire::MeasureSubmit{random_bits(rng, 300)};
    case 3: {
      wire::OutcomeBatch b;
      b.received = random_bits(rng, 300);
      b.outcomes.resize(b.received.size());
      for (auto& x : b.outcomes) x = rng.next() >> 63;
      return b;
    }
    case 4: return wire::Declaration{random_bits(rng, 300)};
    case 5: return wire::SiftAck{u32()};
    case 6: return wire::Shift{u32()};
    case 7: return wire::Ciphertext{random_bits(rng, 300)};
    default: {
      wire::Error e;
      e.code = static_cast<wire::ErrorCode>(1 + rng.below(5));
      e.message.resize(rng.below(40));
      for (auto& c : e.message) c = static_cast<char>(rng.next() >> 56);
      return e;
    }
  }
}

struct PipeRun {
  EndpointResult bob;
  EndpointResult alice;
};

// Runs both endpoints over an in-memory pipe, Bob on a worker thread. The
// observer is attached to Alice's side, which sees every frame once.
inline PipeRun run_over_pipe(const SessionConfig& config, std::span<const std::uint8_t> database, std::size_t item,
                             const FrameObserver& observer = {}) {
  auto [bob_end, alice_end] = make_pipe_pair();
  PipeRun out;
  std::thread bob([&, stream = bob_end.get()] { out.bob = run_bob_endpoint(config, database, *stream); });
  out.alice = run_alice_endpoint(item, config.seeds.measurement, *alice_end, observer, config.photon_batch);
  bob.join();
  return out;
}

}  // namespace qpq::test
