#pragma once

#include <sys/socket.h>

#include <boost/asio.hpp>

#include <atomic>
#include <exception>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "dmpc/market/roles.hpp"

// A role is reached through an Endpoint: the driver hands it one encoded frame
// and gets back the frames the role emitted in response. LocalEndpoint calls
// the role directly; TcpEndpoint ships the same bytes to a role served on a
// socket. Either way every frame is encoded and parsed once per hop.
//
// TCP stream layout, both directions: a sequence of frames, each with its
// 4-byte big-endian length prefix. A zero length is a control marker: from the
// driver it means "start", from the role it closes the batch of replies.
namespace dmpc::market {

class Endpoint {
 public:
  virtual ~Endpoint() = default;
  virtual PartyId id() const = 0;
  virtual std::vector<Bytes> start() = 0;
  virtual std::vector<Bytes> deliver(const Bytes& frame) = 0;
};

inline std::vector<Bytes> encode_all(const std::vector<Frame>& fs) {
  std::vector<Bytes> out;
  out.reserve(fs.size());
  for (const auto& f : fs) out.push_back(f.encode());
  return out;
}

class LocalEndpoint final : public Endpoint {
 public:
  explicit LocalEndpoint(Role& role) : role_(role) {}
  PartyId id() const override { return role_.id(); }
  std::vector<Bytes> start() override { return encode_all(role_.start()); }
  std::vector<Bytes> deliver(const Bytes& frame) override { return encode_all(role_.handle(Frame::decode(frame))); }

 private:
  Role& role_;
};

namespace detail {

namespace asio = boost::asio;
using asio::ip::tcp;

// Reads one length-prefixed unit. Returns false on a zero-length marker.
inline bool read_unit(tcp::socket& s, Bytes& out) {
  std::uint8_t len_be[4];
  boost::system::error_code ec;
  asio::read(s, asio::buffer(len_be), ec);
  if (ec) throw TransportError("connection lost: " + ec.message());
  const std::uint32_t len = (std::uint32_t{len_be[0]} << 24) | (std::uint32_t{len_be[1]} << 16) | (std::uint32_t{len_be[2]} << 8) | len_be[3];
  if (len == 0) return false;
  if (len < Frame::kHeaderBytes || len > Frame::kMaxBody) throw TransportError("malformed frame length " + std::to_string(len));
  out.resize(4 + static_cast<std::size_t>(len));
  std::copy(len_be, len_be + 4, out.begin());
  asio::read(s, asio::buffer(out.data() + 4, len), ec);
  if (ec) throw TransportError("connection lost mid-frame (" + std::to_string(len) + "-byte frame): " + ec.message());
  return true;
}

inline void write_bytes(tcp::socket& s, std::span<const std::uint8_t> b) {
  boost::system::error_code ec;
  asio::write(s, asio::buffer(b.data(), b.size()), ec);
  if (ec) throw TransportError("write failed: " + ec.message());
}

inline void write_marker(tcp::socket& s) {
  static constexpr std::uint8_t zero[4] = {0, 0, 0, 0};
  write_bytes(s, zero);
}

}  // namespace detail

// Serves one role to one driver connection on a background thread.
class TcpRoleServer {
 public:
  TcpRoleServer(Role& role, const std::string& host = "127.0.0.1", std::uint16_t port = 0)
      : role_(role), acceptor_(io_) {
    namespace asio = boost::asio;
    boost::system::error_code ec;
    const auto addr = asio::ip::make_address(host, ec);
    if (ec) throw ConfigError("invalid listen address '" + host + "'");
    const detail::tcp::endpoint ep(addr, port);
    acceptor_.open(ep.protocol(), ec);
    if (!ec) acceptor_.set_option(asio::socket_base::reuse_address(true), ec);
    if (!ec) acceptor_.bind(ep, ec);
    if (!ec) acceptor_.listen(1, ec);
    if (ec) throw TransportError("cannot listen on " + host + ":" + std::to_string(port) + ": " + ec.message());
    port_ = acceptor_.local_endpoint().port();
    thread_ = std::thread([this] { serve(); });
  }

  // shutdown(2) wakes a blocked accept or read; close from another thread
  // would not.
  ~TcpRoleServer() {
    ::shutdown(acceptor_.native_handle(), SHUT_RDWR);
    if (const int fd = conn_fd_.load(); fd >= 0) ::shutdown(fd, SHUT_RDWR);
    if (thread_.joinable()) thread_.join();
  }

  TcpRoleServer(const TcpRoleServer&) = delete;
  TcpRoleServer& operator=(const TcpRoleServer&) = delete;

  std::uint16_t port() const { return port_; }
  void join() {
    if (thread_.joinable()) thread_.join();
  }
  std::exception_ptr error() const { return error_; }

 private:
  void serve() {
    try {
      detail::tcp::socket sock(io_);
      boost::system::error_code ec;
      acceptor_.accept(sock, ec);
      if (ec) return;
      conn_fd_ = sock.native_handle();
      sock.set_option(detail::tcp::no_delay(true));
      Bytes in;
      for (;;) {
        bool is_frame = false;
        try {
          is_frame = detail::read_unit(sock, in);
        } catch (const TransportError&) {
          return;  // driver hung up; the session is over
        }
        std::vector<Frame> replies;
        bool failed = false;
        try {
          replies = is_frame ? role_.handle(Frame::decode(in)) : role_.start();
        } catch (const std::exception& e) {
          Frame abort;
          abort.type = MsgType::Abort;
          abort.session = role_.spec().session_id;
          abort.from = role_.id();
          abort.to = role_.id();
          abort.payload = AbortMsg::from_exception(e).encode();
          replies = {std::move(abort)};
          failed = true;
        }
        for (const auto& f : replies) detail::write_bytes(sock, f.encode());
        detail::write_marker(sock);
        if (failed) return;
      }
    } catch (...) {
      error_ = std::current_exception();
    }
  }

  Role& role_;
  boost::asio::io_context io_;
  detail::tcp::acceptor acceptor_;
  std::uint16_t port_ = 0;
  std::atomic<int> conn_fd_{-1};
  std::thread thread_;
  std::exception_ptr error_;
};

// Driver-side proxy for a role served over TCP.
class TcpEndpoint final : public Endpoint {
 public:
  TcpEndpoint(PartyId id, const std::string& host, std::uint16_t port) : id_(id), sock_(io_) {
    boost::system::error_code ec;
    const auto addr = boost::asio::ip::make_address(host, ec);
    if (ec) throw ConfigError("invalid address '" + host + "'");
    sock_.connect(detail::tcp::endpoint(addr, port), ec);
    if (ec) throw TransportError("cannot connect to " + id.str() + " at " + host + ":" + std::to_string(port) + ": " + ec.message());
    sock_.set_option(detail::tcp::no_delay(true));
  }

  PartyId id() const override { return id_; }

  std::vector<Bytes> start() override {
    detail::write_marker(sock_);
    return collect();
  }

  std::vector<Bytes> deliver(const Bytes& frame) override {
    detail::write_bytes(sock_, frame);
    return collect();
  }

 private:
  // Reads reply frames up to the batch marker; a remote Abort is rethrown.
  std::vector<Bytes> collect() {
    std::vector<Bytes> out;
    Bytes unit;
    while (detail::read_unit(sock_, unit)) {
      const Frame f = Frame::decode(unit);
      if (f.type == MsgType::Abort) AbortMsg::decode(f.payload).rethrow();
      out.push_back(std::move(unit));
    }
    return out;
  }

  PartyId id_;
  boost::asio::io_context io_;
  detail::tcp::socket sock_;
};

// Serves `role` on host:port (0 picks a free port).
inline std::unique_ptr<TcpRoleServer> transport_serve(Role& role, const std::string& host = "127.0.0.1", std::uint16_t port = 0) {
  return std::make_unique<TcpRoleServer>(role, host, port);
}

inline std::unique_ptr<Endpoint> transport_connect(PartyId id, const std::string& host, std::uint16_t port) {
  return std::make_unique<TcpEndpoint>(id, host, port);
}

}  // namespace dmpc::market
