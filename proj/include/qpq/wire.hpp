#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qpq/bits.hpp"

namespace qpq::wire {

// Frame: u32 big-endian length (counting the type byte and body), u8 type,
// body. Integers are big-endian; bit arrays are a u32 count followed by the
// bits packed most significant bit first.
inline constexpr std::uint32_t kMaxFrameLength = std::uint32_t{1} << 24;

enum class MessageType : std::uint8_t {
  Hello = 0x01,
  PhotonBatchRequest = 0x02,
  MeasureSubmit = 0x03,
  OutcomeBatch = 0x04,
  Declaration = 0x05,
  SiftAck = 0x06,
  Shift = 0x07,
  Ciphertext = 0x08,
  Error = 0x7F,
};

enum class ErrorCode : std::uint8_t {
  Decode = 1,
  InvalidParameters = 2,
  PhaseViolation = 3,
  RestartLimit = 4,
  UnknownType = 5,
};

// Bob -> Alice. theta and eta travel as IEEE-754 bit patterns.
struct Hello {
  double theta = 0.0;
  std::uint32_t database_size = 0;
  std::uint32_t substrings = 0;
  double loss = 0.0;
  bool operator==(const Hello&) const = default;
};

// Alice -> Bob: send `count` more photons.
struct PhotonBatchRequest {
  std::uint32_t count = 0;
  bool operator==(const PhotonBatchRequest&) const = default;
};

// Alice -> Bob: her basis per photon of the batch (0 = B, 1 = B').
struct MeasureSubmit {
  Bits bases;
  bool operator==(const MeasureSubmit&) const = default;
};

// Bob's channel simulator -> Alice: detection flag and outcome per photon.
// Encoded as count, packed flags, packed outcomes.
struct OutcomeBatch {
  Bits received;
  Bits outcomes;
  bool operator==(const OutcomeBatch&) const = default;
};

// Bob -> Alice: letter per retained photon.
struct Declaration {
  Bits letters;
  bool operator==(const Declaration&) const = default;
};

// Alice -> Bob: number of final-key bits she knows (u32). Zero asks for a
// restart.
struct SiftAck {
  std::uint32_t known_count = 0;
  bool operator==(const SiftAck&) const = default;
};

// Alice -> Bob: s = (j - i) mod N.
struct Shift {
  std::uint32_t shift = 0;
  bool operator==(const Shift&) const = default;
};

// Bob -> Alice: database XOR shifted key.
struct Ciphertext {
  Bits bits;
  bool operator==(const Ciphertext&) const = default;
};

// u8 code, then UTF-8 text filling the rest of the body.
struct Error {
  ErrorCode code = ErrorCode::Decode;
  std::string message;
  bool operator==(const Error&) const = default;
};

using Message =
    std::variant<Hello, PhotonBatchRequest, MeasureSubmit, OutcomeBatch, Declaration, SiftAck, Shift, Ciphertext, Error>;

MessageType type_of(const Message& msg);
std::string type_name(MessageType type);

class DecodeError : public std::runtime_error {
 public:
  DecodeError(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Throws DecodeError when the encoded frame would exceed the length cap.
std::vector<std::uint8_t> encode_frame(const Message& msg);

// Decodes exactly one complete frame. Truncated or trailing bytes, unknown
// types, over-cap lengths and malformed bodies raise DecodeError.
Message decode_frame(std::span<const std::uint8_t> bytes);

// Decodes a body whose length prefix has already been consumed.
Message decode_body(MessageType type, std::span<const std::uint8_t> body);

}  // namespace qpq::wire
