#include "qpq/endpoints.hpp"

#include <cmath>
#include <numbers>

#include "qpq/errors.hpp"

namespace qpq {

namespace {

using wire::ErrorCode;

// Local failure that is reported to the peer before aborting.
class SessionAbort : public std::runtime_error {
 public:
  SessionAbort(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// ERROR frame received from the peer.
class PeerError : public std::runtime_error {
 public:
  PeerError(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

class Peer {
 public:
  Peer(ByteStream& stream, Direction outgoing, const FrameObserver& observer)
      : stream_(stream), outgoing_(outgoing), observer_(observer) {}

  void send(const wire::Message& msg) {
    if (observer_) observer_(outgoing_, msg);
    write_frame(stream_, msg);
  }

  wire::Message receive() {
    wire::Message msg = read_frame(stream_);
    if (observer_) observer_(incoming(), msg);
    if (const auto* err = std::get_if<wire::Error>(&msg)) throw PeerError(err->code, err->message);
    return msg;
  }

  template <class T>
  T expect() {
    wire::Message msg = receive();
    if (auto* m = std::get_if<T>(&msg)) return std::move(*m);
    throw SessionAbort(ErrorCode::PhaseViolation, "unexpected " + wire::type_name(wire::type_of(msg)) + " frame");
  }

  // Best effort: the stream may already be gone.
  void abort(ErrorCode code, const std::string& message) {
    try {
      send(wire::Error{code, message});
    } catch (const std::exception&) {
    }
    stream_.close();
  }

 private:
  Direction incoming() const {
    return outgoing_ == Direction::BobToAlice ? Direction::AliceToBob : Direction::BobToAlice;
  }

  ByteStream& stream_;
  Direction outgoing_;
  const FrameObserver& observer_;
};

// Runs `body`, turning every failure mode into a clean abort with diagnostic.
template <class Body>
void guarded(Peer& peer, EndpointResult& result, Body body) {
  auto fail = [&](const std::string& what) {
    result.aborted = true;
    result.diagnostic = what;
    result.report.success = false;
    result.report.failure = what;
  };
  try {
    body();
  } catch (const SessionAbort& e) {
    peer.abort(e.code(), e.what());
    fail(e.what());
  } catch (const wire::DecodeError& e) {
    peer.abort(e.code(), e.what());
    fail(std::string("decode error: ") + e.what());
  } catch (const PeerError& e) {
    if (e.code() == ErrorCode::RestartLimit) {
      result.report.success = false;
      result.report.failure = e.what();
      result.diagnostic = e.what();
    } else {
      fail(std::string("peer reported error ") + std::to_string(static_cast<int>(e.code())) + ": " + e.what());
    }
  } catch (const TransportError& e) {
    fail(std::string("transport: ") + e.what());
  }
}

std::size_t checked_target(std::size_t n, std::size_t k) {
  if (n < 1 || k < 1 || n * k / k != n || n * k > kPhotonSafetyCap) {
    throw SessionAbort(ErrorCode::InvalidParameters, "invalid N or k");
  }
  return n * k;
}

}  // namespace

EndpointResult run_bob_endpoint(const SessionConfig& config, std::span<const std::uint8_t> database,
                                ByteStream& stream, const FrameObserver& observer) {
  config.validate();
  if (database.size() != config.database_size) throw DomainError("database length differs from N");
  if (config.database_size > UINT32_MAX || config.substrings > UINT32_MAX) throw DomainError("N or k too large for the wire");

  EndpointResult result;
  SessionReport& report = result.report;
  report.config = config;
  Peer peer(stream, Direction::BobToAlice, observer);
  const wire::Hello hello{config.theta, static_cast<std::uint32_t>(config.database_size),
                          static_cast<std::uint32_t>(config.substrings), config.loss};

  guarded(peer, result, [&] {
    const std::size_t n = config.database_size;
    const std::size_t target = checked_target(n, config.substrings);
    peer.send(hello);
    for (int attempt = 0;; ++attempt) {
      const SeedTriple seeds = attempt_seeds(config.seeds, attempt);
      RandomStream source(seeds.source);
      RandomStream channel(seeds.channel);
      std::vector<CarrierLabel> kept;
      kept.reserve(target);
      std::uint64_t sent = 0, sent_to_last = 0;
      while (kept.size() < target) {
        const auto req = peer.expect<wire::PhotonBatchRequest>();
        if (req.count == 0 || req.count > kMaxWireBatch || sent + req.count > kPhotonSafetyCap) {
          throw SessionAbort(ErrorCode::InvalidParameters, "photon batch request out of range");
        }
        const auto labels = bob_prepare(req.count, source);
        const auto submit = peer.expect<wire::MeasureSubmit>();
        if (submit.bases.size() != req.count) {
          throw SessionAbort(ErrorCode::InvalidParameters, "basis count differs from batch size");
        }
        std::vector<Basis> bases(req.count);
        for (std::size_t i = 0; i < bases.size(); ++i) bases[i] = static_cast<Basis>(submit.bases[i]);
        auto ch = simulate_channel(labels, bases, config.theta, config.loss, config.flip_probability, channel);
        for (std::size_t i = 0; i < labels.size() && kept.size() < target; ++i) {
          if (!ch.received[i]) continue;
          kept.push_back(labels[i]);
          if (kept.size() == target) sent_to_last = sent + i + 1;
        }
        sent += req.count;
        peer.send(wire::OutcomeBatch{std::move(ch.received), std::move(ch.outcomes)});
      }
      report.photons_sent += sent_to_last;
      report.photons_received += target;

      RawKey raw;
      wire::Declaration decl;
      decl.letters.reserve(target);
      for (CarrierLabel l : kept) {
        decl.letters.push_back(declaration_letter(l));
        raw.bits.push_back(coded_bit(l));
      }
      raw.alice_mask.assign(target, 0);
      raw.alice_bits.assign(target, 0);
      peer.send(decl);
      const FinalKey key = xor_compress(raw, config.substrings, n);
      result.final_key = FinalKey{key.bits, {}, {}};

      const auto ack = peer.expect<wire::SiftAck>();
      report.known_final_count = ack.known_count;
      if (ack.known_count == 0) {
        if (attempt == config.max_restarts) {
          peer.send(wire::Error{ErrorCode::RestartLimit, "restart limit reached with no known final-key bit"});
          report.failure = "restart limit reached with no known final-key bit";
          return;
        }
        report.restarted = attempt + 1;
        peer.send(hello);
        continue;
      }
      const auto shift = peer.expect<wire::Shift>();
      if (shift.shift >= n) throw SessionAbort(ErrorCode::InvalidParameters, "shift out of range");
      QueryExchange q;
      q.shift = shift.shift;
      q.ciphertext = bob_encrypt(key.bits, database, q.shift);
      peer.send(wire::Ciphertext{q.ciphertext});
      report.query = std::move(q);
      report.success = true;
      return;
    }
  });
  return result;
}

EndpointResult run_alice_endpoint(std::size_t item, std::uint64_t measurement_seed, ByteStream& stream,
                                  const FrameObserver& observer, std::size_t photon_batch) {
  if (photon_batch < 1 || photon_batch > kMaxWireBatch) throw DomainError("photon batch out of range");
  EndpointResult result;
  SessionReport& report = result.report;
  report.item = item;
  report.config.seeds = SeedTriple{0, 0, measurement_seed};
  report.config.photon_batch = photon_batch;
  Peer peer(stream, Direction::AliceToBob, observer);

  guarded(peer, result, [&] {
    auto hello = peer.expect<wire::Hello>();
    const bool theta_ok = hello.theta > 0.0 && hello.theta < std::numbers::pi / 2;
    const bool loss_ok = hello.loss >= 0.0 && hello.loss < 1.0;
    if (!theta_ok || !loss_ok || hello.database_size < 1 || hello.substrings < 1) {
      throw SessionAbort(ErrorCode::InvalidParameters, "invalid HELLO parameters");
    }
    const std::size_t n = hello.database_size;
    const std::size_t k = hello.substrings;
    const std::size_t target = checked_target(n, k);
    if (item >= n) throw SessionAbort(ErrorCode::InvalidParameters, "query index out of range");
    report.config.database_size = n;
    report.config.substrings = k;
    report.config.theta = hello.theta;
    report.config.loss = hello.loss;

    for (int attempt = 0;; ++attempt) {
      const std::uint64_t seed = attempt_seed(measurement_seed, attempt);
      RandomStream measurement(seed);
      Bits bases_kept, outcomes_kept;
      bases_kept.reserve(target);
      outcomes_kept.reserve(target);
      std::uint64_t sent = 0, sent_to_last = 0;
      while (bases_kept.size() < target) {
        const auto count = static_cast<std::uint32_t>(photon_batch);
        peer.send(wire::PhotonBatchRequest{count});
        const auto bases = alice_choose_bases(count, measurement);
        wire::MeasureSubmit submit;
        submit.bases.reserve(count);
        for (Basis b : bases) submit.bases.push_back(static_cast<std::uint8_t>(b));
        peer.send(submit);
        const auto batch = peer.expect<wire::OutcomeBatch>();
        if (batch.received.size() != count) {
          throw SessionAbort(ErrorCode::InvalidParameters, "outcome batch size differs from request");
        }
        for (std::size_t i = 0; i < count && bases_kept.size() < target; ++i) {
          if (!batch.received[i]) continue;
          bases_kept.push_back(submit.bases[i]);
          outcomes_kept.push_back(batch.outcomes[i]);
          if (bases_kept.size() == target) sent_to_last = sent + i + 1;
        }
        sent += count;
      }
      report.photons_sent += sent_to_last;
      report.photons_received += target;

      const auto decl = peer.expect<wire::Declaration>();
      if (decl.letters.size() != target) {
        throw SessionAbort(ErrorCode::InvalidParameters, "declaration count differs from kN");
      }
      RawKey raw;
      raw.alice_mask.resize(target);
      raw.alice_bits.resize(target);
      std::size_t conclusive = 0;
      for (std::size_t r = 0; r < target; ++r) {
        const auto bit = sift(static_cast<Basis>(bases_kept[r]), outcomes_kept[r], decl.letters[r]);
        raw.alice_mask[r] = bit ? 1 : 0;
        raw.alice_bits[r] = bit.value_or(0);
        conclusive += bit.has_value();
      }
      raw.bits = raw.alice_bits;
      result.final_key = xor_compress(raw, k, n);
      report.conclusive_count = conclusive;
      report.known_final_count = result.final_key.known_count();
      peer.send(wire::SiftAck{static_cast<std::uint32_t>(report.known_final_count)});

      if (report.known_final_count == 0) {
        const auto again = peer.expect<wire::Hello>();
        if (!(again == hello)) throw SessionAbort(ErrorCode::InvalidParameters, "parameters changed on restart");
        report.restarted = attempt + 1;
        continue;
      }

      RandomStream query_rng(query_seed(seed));
      QueryExchange q;
      q.target = item;
      q.known_index = alice_pick_known_index(result.final_key, query_rng);
      q.shift = shift_for(*q.known_index, item, n);
      peer.send(wire::Shift{static_cast<std::uint32_t>(q.shift)});
      auto cipher = peer.expect<wire::Ciphertext>();
      if (cipher.bits.size() != n) throw SessionAbort(ErrorCode::InvalidParameters, "ciphertext length differs from N");
      q.ciphertext = std::move(cipher.bits);
      q.retrieved_bit = q.ciphertext[item] ^ result.final_key.alice_bits[*q.known_index];
      report.query = std::move(q);
      report.success = true;
      return;
    }
  });
  return result;
}

}  // namespace qpq
