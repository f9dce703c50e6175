#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

#include "qpq/wire.hpp"

namespace qpq {

// Peer closed the stream or an I/O call failed.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reliable, ordered, blocking byte stream.
class ByteStream {
 public:
  virtual ~ByteStream() = default;
  virtual void write_all(std::span<const std::uint8_t> bytes) = 0;
  virtual void read_exact(std::span<std::uint8_t> bytes) = 0;
  virtual void close() = 0;
};

// Two connected in-memory endpoints, safe to drive from two threads.
std::pair<std::unique_ptr<ByteStream>, std::unique_ptr<ByteStream>> make_pipe_pair();

// TCP stream over a connected socket descriptor; owns the descriptor.
class SocketStream final : public ByteStream {
 public:
  explicit SocketStream(int fd) : fd_(fd) {}
  ~SocketStream() override;
  SocketStream(const SocketStream&) = delete;
  SocketStream& operator=(const SocketStream&) = delete;

  void write_all(std::span<const std::uint8_t> bytes) override;
  void read_exact(std::span<std::uint8_t> bytes) override;
  void close() override;

 private:
  int fd_;
};

// Listening TCP socket.
class TcpListener {
 public:
  TcpListener(const std::string& host, std::uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  std::unique_ptr<SocketStream> accept();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

std::unique_ptr<SocketStream> connect_tcp(const std::string& host, std::uint16_t port);

// "host:port" -> parts. Throws DomainError on malformed input.
std::pair<std::string, std::uint16_t> parse_address(const std::string& address);

void write_frame(ByteStream& stream, const wire::Message& msg);
// Reads one frame; DecodeError for malformed frames, TransportError on EOF.
wire::Message read_frame(ByteStream& stream);

}  // namespace qpq
