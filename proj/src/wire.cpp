#include "qpq/wire.hpp"

#include <bit>
#include <cstring>

#include "qpq/errors.hpp"

namespace qpq::wire {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void u64(std::uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void packed(std::span<const std::uint8_t> bits) {
    const auto bytes = pack_bits(bits);
    out_.insert(out_.end(), bytes.begin(), bytes.end());
  }
  void counted_bits(const Bits& bits) {
    u32(count(bits.size()));
    packed(bits);
  }
  void text(const std::string& s) { out_.insert(out_.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

  static std::uint32_t count(std::size_t n) {
    if (n > kMaxFrameLength * 8ULL) throw DecodeError(ErrorCode::Decode, "bit array too long for one frame");
    return static_cast<std::uint32_t>(n);
  }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() {
    auto b = take(4);
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
  }
  std::uint64_t u64() {
    const std::uint64_t hi = u32();
    return (hi << 32) | u32();
  }
  double f64() { return std::bit_cast<double>(u64()); }
  Bits packed(std::size_t count) {
    auto bytes = take((count + 7) / 8);
    try {
      return unpack_bits(bytes, count);
    } catch (const DomainError& e) {
      throw DecodeError(ErrorCode::Decode, e.what());
    }
  }
  Bits counted_bits() { return packed(u32()); }
  std::string rest() {
    auto b = take(in_.size() - pos_);
    return std::string(b.begin(), b.end());
  }
  void finish() const {
    if (pos_ != in_.size()) throw DecodeError(ErrorCode::Decode, "trailing bytes in message body");
  }

 private:
  std::span<const std::uint8_t> take(std::size_t n) {
    if (in_.size() - pos_ < n) throw DecodeError(ErrorCode::Decode, "truncated message body");
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void write_body(Writer& w, const Message& msg) {
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Hello>) {
          w.f64(m.theta);
          w.u32(m.database_size);
          w.u32(m.substrings);
          w.f64(m.loss);
        } else if constexpr (std::is_same_v<T, PhotonBatchRequest>) {
          w.u32(m.count);
        } else if constexpr (std::is_same_v<T, MeasureSubmit>) {
          w.counted_bits(m.bases);
        } else if constexpr (std::is_same_v<T, OutcomeBatch>) {
          if (m.received.size() != m.outcomes.size()) {
            throw DecodeError(ErrorCode::Decode, "outcome batch flag and outcome counts differ");
          }
          w.u32(Writer::count(m.received.size()));
          w.packed(m.received);
          w.packed(m.outcomes);
        } else if constexpr (std::is_same_v<T, Declaration>) {
          w.counted_bits(m.letters);
        } else if constexpr (std::is_same_v<T, SiftAck>) {
          w.u32(m.known_count);
        } else if constexpr (std::is_same_v<T, Shift>) {
          w.u32(m.shift);
        } else if constexpr (std::is_same_v<T, Ciphertext>) {
          w.counted_bits(m.bits);
        } else if constexpr (std::is_same_v<T, Error>) {
          w.u8(static_cast<std::uint8_t>(m.code));
          w.text(m.message);
        }
      },
      msg);
}

}  // namespace

MessageType type_of(const Message& msg) {
  static constexpr MessageType types[] = {
      MessageType::Hello,       MessageType::PhotonBatchRequest, MessageType::MeasureSubmit,
      MessageType::OutcomeBatch, MessageType::Declaration,       MessageType::SiftAck,
      MessageType::Shift,       MessageType::Ciphertext,         MessageType::Error,
  };
  return types[msg.index()];
}

std::string type_name(MessageType type) {
  switch (type) {
    case MessageType::Hello: return "HELLO";
    case MessageType::PhotonBatchRequest: return "PHOTON_BATCH_REQ";
    case MessageType::MeasureSubmit: return "MEASURE_SUBMIT";
    case MessageType::OutcomeBatch: return "OUTCOME_BATCH";
    case MessageType::Declaration: return "DECLARATION";
    case MessageType::SiftAck: return "SIFT_ACK";
    case MessageType::Shift: return "SHIFT";
    case MessageType::Ciphertext: return "CIPHERTEXT";
    case MessageType::Error: return "ERROR";
  }
  return "UNKNOWN";
}

std::vector<std::uint8_t> encode_frame(const Message& msg) {
  Writer body;
  write_body(body, msg);
  std::vector<std::uint8_t> payload = body.take();
  if (payload.size() + 1 > kMaxFrameLength) throw DecodeError(ErrorCode::Decode, "frame exceeds 16 MiB cap");
  Writer frame;
  frame.u32(static_cast<std::uint32_t>(payload.size() + 1));
  frame.u8(static_cast<std::uint8_t>(type_of(msg)));
  std::vector<std::uint8_t> out = frame.take();
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Message decode_body(MessageType type, std::span<const std::uint8_t> body) {
  Reader r(body);
  Message msg;
  switch (type) {
    case MessageType::Hello: {
      Hello h;
      h.theta = r.f64();
      h.database_size = r.u32();
      h.substrings = r.u32();
      h.loss = r.f64();
      msg = h;
      break;
    }
    case MessageType::PhotonBatchRequest: msg = PhotonBatchRequest{r.u32()}; break;
    case MessageType::MeasureSubmit: msg = MeasureSubmit{r.counted_bits()}; break;
    case MessageType::OutcomeBatch: {
      const std::uint32_t n = r.u32();
      OutcomeBatch b;
      b.received = r.packed(n);
      b.outcomes = r.packed(n);
      msg = std::move(b);
      break;
    }
    case MessageType::Declaration: msg = Declaration{r.counted_bits()}; break;
    case MessageType::SiftAck: msg = SiftAck{r.u32()}; break;
    case MessageType::Shift: msg = Shift{r.u32()}; break;
    case MessageType::Ciphertext: msg = Ciphertext{r.counted_bits()}; break;
    case MessageType::Error: {
      Error e;
      e.code = static_cast<ErrorCode>(r.u8());
      e.message = r.rest();
      msg = std::move(e);
      break;
    }
    default:
      throw DecodeError(ErrorCode::UnknownType,
                        "unknown message type " + std::to_string(static_cast<unsigned>(type)));
  }
  r.finish();
  return msg;
}

Message decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 5) throw DecodeError(ErrorCode::Decode, "truncated frame header");
  const std::uint32_t length = (std::uint32_t{bytes[0]} << 24) | (std::uint32_t{bytes[1]} << 16) |
                               (std::uint32_t{bytes[2]} << 8) | bytes[3];
  if (length > kMaxFrameLength) throw DecodeError(ErrorCode::Decode, "frame length exceeds 16 MiB cap");
  if (length < 1) throw DecodeError(ErrorCode::Decode, "frame length is zero");
  if (bytes.size() - 4 < length) throw DecodeError(ErrorCode::Decode, "truncated frame");
  if (bytes.size() - 4 > length) throw DecodeError(ErrorCode::Decode, "trailing bytes after frame");
  return decode_body(static_cast<MessageType>(bytes[4]), bytes.subspan(5));
}

}  // namespace qpq::wire
