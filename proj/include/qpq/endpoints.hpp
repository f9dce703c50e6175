#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "qpq/protocol.hpp"
#include "qpq/transport.hpp"
#include "qpq/wire.hpp"

namespace qpq {

// Largest photon batch either endpoint accepts in one request.
inline constexpr std::uint32_t kMaxWireBatch = std::uint32_t{1} << 20;

enum class Direction { BobToAlice, AliceToBob };

// Called for every frame an endpoint sends or receives (test audit hook).
using FrameObserver = std::function<void(Direction, const wire::Message&)>;

struct EndpointResult {
  SessionReport report;
  // Bob: bits only. Alice: alice_mask and alice_bits, with bits = alice_bits.
  FinalKey final_key;
  bool aborted = false;
  std::string diagnostic;
};

// Bob's side: announces the parameters, serves photon batches through the
// channel simulator, declares letters, and answers the shift with the
// encrypted database. Restarts (fresh derived seeds) while Alice reports no
// known bit, up to config.max_restarts.
EndpointResult run_bob_endpoint(const SessionConfig& config, std::span<const std::uint8_t> database,
                                ByteStream& stream, const FrameObserver& observer = {});

// Alice's side for target index `item`. Only her measurement seed is needed;
// everything else arrives in HELLO.
EndpointResult run_alice_endpoint(std::size_t item, std::uint64_t measurement_seed, ByteStream& stream,
                                  const FrameObserver& observer = {}, std::size_t photon_batch = kDefaultPhotonBatch);

}  // namespace qpq
