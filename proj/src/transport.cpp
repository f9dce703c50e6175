#include "qpq/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <vector>

#include "qpq/errors.hpp"

namespace qpq {

namespace {

// One direction of an in-memory pipe.
struct Channel {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::uint8_t> data;
  bool closed = false;
};

class PipeEnd final : public ByteStream {
 public:
  PipeEnd(std::shared_ptr<Channel> in, std::shared_ptr<Channel> out) : in_(std::move(in)), out_(std::move(out)) {}
  ~PipeEnd() override { close(); }

  void write_all(std::span<const std::uint8_t> bytes) override {
    std::lock_guard lock(out_->mu);
    if (out_->closed) throw TransportError("pipe closed");
    out_->data.insert(out_->data.end(), bytes.begin(), bytes.end());
    out_->cv.notify_all();
  }

  void read_exact(std::span<std::uint8_t> bytes) override {
    std::unique_lock lock(in_->mu);
    std::size_t got = 0;
    while (got < bytes.size()) {
      in_->cv.wait(lock, [&] { return !in_->data.empty() || in_->closed; });
      if (in_->data.empty()) throw TransportError("peer closed the stream");
      while (got < bytes.size() && !in_->data.empty()) {
        bytes[got++] = in_->data.front();
        in_->data.pop_front();
      }
    }
  }

  void close() override {
    for (auto* ch : {in_.get(), out_.get()}) {
      std::lock_guard lock(ch->mu);
      ch->closed = true;
      ch->cv.notify_all();
    }
  }

 private:
  std::shared_ptr<Channel> in_;
  std::shared_ptr<Channel> out_;
};

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

}  // namespace

std::pair<std::unique_ptr<ByteStream>, std::unique_ptr<ByteStream>> make_pipe_pair() {
  auto a_to_b = std::make_shared<Channel>();
  auto b_to_a = std::make_shared<Channel>();
  return {std::make_unique<PipeEnd>(b_to_a, a_to_b), std::make_unique<PipeEnd>(a_to_b, b_to_a)};
}

SocketStream::~SocketStream() { close(); }

void SocketStream::write_all(std::span<const std::uint8_t> bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_text("send"));
    }
    sent += static_cast<std::size_t>(n);
  }
}

void SocketStream::read_exact(std::span<std::uint8_t> bytes) {
  std::size_t got = 0;
  while (got < bytes.size()) {
    const ssize_t n = ::recv(fd_, bytes.data() + got, bytes.size() - got, 0);
    if (n == 0) throw TransportError("peer closed the connection");
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_text("recv"));
    }
    got += static_cast<std::size_t>(n);
  }
}

void SocketStream::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw TransportError(errno_text("socket"));
  int yes = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host == "localhost" ? "127.0.0.1" : host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw DomainError("listen address must be an IPv4 literal: " + host);
  }
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(fd_, 8) < 0) {
    const std::string msg = errno_text("bind/listen");
    ::close(fd_);
    throw TransportError(msg);
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<SocketStream> TcpListener::accept() {
  for (;;) {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) {
      int yes = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);
      return std::make_unique<SocketStream>(fd);
    }
    if (errno != EINTR) throw TransportError(errno_text("accept"));
  }
}

std::unique_ptr<SocketStream> connect_tcp(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || res == nullptr) {
    throw TransportError("cannot resolve " + host);
  }
  const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0) {
    ::freeaddrinfo(res);
    throw TransportError(errno_text("socket"));
  }
  const int rc = ::connect(fd, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc < 0) {
    const std::string msg = errno_text("connect");
    ::close(fd);
    throw TransportError(msg);
  }
  int yes = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);
  return std::make_unique<SocketStream>(fd);
}

std::pair<std::string, std::uint16_t> parse_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == address.size()) {
    throw DomainError("address must look like host:port, got " + address);
  }
  const std::string port_text = address.substr(colon + 1);
  std::size_t used = 0;
  unsigned long port = 0;
  try {
    port = std::stoul(port_text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != port_text.size() || port > 65535) throw DomainError("invalid port in address " + address);
  return {address.substr(0, colon), static_cast<std::uint16_t>(port)};
}

void write_frame(ByteStream& stream, const wire::Message& msg) { stream.write_all(wire::encode_frame(msg)); }

wire::Message read_frame(ByteStream& stream) {
  std::uint8_t header[5];
  stream.read_exact(header);
  const std::uint32_t length = (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
                               (std::uint32_t{header[2]} << 8) | header[3];
  if (length > wire::kMaxFrameLength) {
    throw wire::DecodeError(wire::ErrorCode::Decode, "frame length exceeds 16 MiB cap");
  }
  if (length < 1) throw wire::DecodeError(wire::ErrorCode::Decode, "frame length is zero");
  std::vector<std::uint8_t> body(length - 1);
  stream.read_exact(body);
  return wire::decode_body(static_cast<wire::MessageType>(header[4]), body);
}

}  // namespace qpq
