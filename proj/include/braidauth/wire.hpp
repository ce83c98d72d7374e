#pragma once

// Framed TCP transport for running prover and verifier as separate
// processes.
//
// Frame: length:u32 BE (payload bytes + 1) | type:u8 | payload.
//
//   HELLO      prover -> verifier  scheme:u8 | n:u16 | exponents 2 x u32 | X | [base]
//   CHALLENGE  verifier -> prover  serialized challenge braid
//   RESPONSE   prover -> verifier  32-byte digest
//   VERDICT    verifier -> prover  accept:u8 | round:u16 (0-based)
//   ERROR      either direction    code:u8, then the connection closes
//
// One session per connection. The verifier closes after the last verdict.

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstdint>
#include <cstring>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <variant>

#include "braidauth/error.hpp"
#include "braidauth/hash.hpp"
#include "braidauth/keyfile.hpp"
#include "braidauth/protocol.hpp"

namespace braidauth::wire {

enum class MsgType : std::uint8_t { hello = 0x01, challenge = 0x02, response = 0x03, verdict = 0x04, error = 0x05 };

enum class ErrorCode : std::uint8_t {
  unknown_type = 0x01,
  bad_length = 0x02,
  malformed_payload = 0x03,
  unexpected_message = 0x04,
  scheme_mismatch = 0x05,
  key_mismatch = 0x06,
  internal = 0x07,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::unknown_type: return "unknown message type";
    case ErrorCode::bad_length: return "bad length";
    case ErrorCode::malformed_payload: return "malformed payload";
    case ErrorCode::unexpected_message: return "unexpected message";
    case ErrorCode::scheme_mismatch: return "scheme mismatch";
    case ErrorCode::key_mismatch: return "public key mismatch";
    case ErrorCode::internal: return "internal error";
  }
  return "unknown error";
}

inline constexpr std::size_t kMaxPayload = 16u << 20;

inline bool is_known_type(std::uint8_t t) { return t >= 0x01 && t <= 0x05; }

struct Frame {
  std::uint8_t type = 0;
  Bytes payload;
};

// The peer broke the protocol; answered with an ERROR frame carrying `code`.
class ProtocolViolation : public std::runtime_error {
 public:
  ProtocolViolation(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline Bytes encode_frame(std::uint8_t type, std::span<const std::uint8_t> payload) {
  if (payload.size() > kMaxPayload) throw InvalidParameter("frame payload too large");
  Bytes out;
  out.reserve(5 + payload.size());
  braidauth::detail::put_be(out, payload.size() + 1, 4);
  out.push_back(type);
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

inline Bytes encode_frame(MsgType type, std::span<const std::uint8_t> payload) {
  return encode_frame(static_cast<std::uint8_t>(type), payload);
}

// ------------------------------------------------------------- payloads

inline Bytes encode_hello(const PublicKey& key) {
  Bytes out;
  if (const auto* k = std::get_if<SchemeIPublic>(&key)) {
    out.push_back(1);
    braidauth::detail::put_be(out, static_cast<std::uint64_t>(k->n), 2);
    braidauth::detail::put_be(out, static_cast<std::uint64_t>(k->r), 4);
    braidauth::detail::put_be(out, static_cast<std::uint64_t>(k->s), 4);
    const Bytes x = serialize(k->public_braid);
    out.insert(out.end(), x.begin(), x.end());
  } else {
    const auto& k2 = std::get<SchemeIIPublic>(key);
    out.push_back(2);
    braidauth::detail::put_be(out, static_cast<std::uint64_t>(k2.n), 2);
    braidauth::detail::put_be(out, static_cast<std::uint64_t>(k2.e), 4);
    braidauth::detail::put_be(out, static_cast<std::uint64_t>(k2.f), 4);
    const Bytes x = serialize(k2.public_braid);
    const Bytes b = serialize(k2.base);
    out.insert(out.end(), x.begin(), x.end());
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

// Throws ProtocolViolation(malformed_payload) on anything it cannot accept.
inline PublicKey decode_hello(std::span<const std::uint8_t> p) {
  auto bad = [](const std::string& why) { return ProtocolViolation(ErrorCode::malformed_payload, "HELLO: " + why); };
  if (p.size() < 11) throw bad("too short");
  const int scheme = p[0];
  const auto n = static_cast<int>(braidauth::detail::get_be(p, 1, 2));
  const auto left = braidauth::detail::get_be(p, 3, 4);
  const auto right = braidauth::detail::get_be(p, 7, 4);
  if (scheme != 1 && scheme != 2) throw bad("unknown scheme");
  if (n < 4 || n % 2 != 0 || n > kMaxStrands) throw bad("n must be even");
  if (left < 2 || right < 2 || left > kMaxExponent || right > kMaxExponent) throw bad("exponents out of range");
  std::size_t offset = 11;
  try {
    CanonicalForm x = deserialize_prefix(p, offset);
    if (x.strands() != n) throw bad("X has the wrong strand count");
    if (scheme == 1) {
      if (offset != p.size()) throw bad("trailing bytes");
      return SchemeIPublic{n, static_cast<int>(left), static_cast<int>(right), std::move(x)};
    }
    CanonicalForm base = deserialize_prefix(p, offset);
    if (base.strands() != n) throw bad("base has the wrong strand count");
    if (offset != p.size()) throw bad("trailing bytes");
    return SchemeIIPublic{n, static_cast<int>(left), static_cast<int>(right), std::move(base), std::move(x)};
  } catch (const ParseError& e) {
    throw bad(e.what());
  }
}

inline Bytes encode_verdict(bool accept, std::uint16_t round) {
  Bytes out{static_cast<std::uint8_t>(accept ? 1 : 0)};
  braidauth::detail::put_be(out, round, 2);
  return out;
}

// ------------------------------------------------------------- sockets

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      close();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  ~Socket() { close(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }

  void close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

  void set_timeout(int seconds) {
    timeval tv{};
    tv.tv_sec = seconds;
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    ::setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
  }

  void send_all(std::span<const std::uint8_t> data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
      const ssize_t k = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
      if (k < 0 && errno == EINTR) continue;
      if (k <= 0) throw TransportError(std::string("send failed: ") + std::strerror(errno));
      sent += static_cast<std::size_t>(k);
    }
  }

  void recv_exact(std::span<std::uint8_t> out) {
    std::size_t got = 0;
    while (got < out.size()) {
      const ssize_t k = ::recv(fd_, out.data() + got, out.size() - got, 0);
      if (k < 0 && errno == EINTR) continue;
      if (k == 0) throw TransportError("connection closed by peer");
      if (k < 0) throw TransportError(std::string("recv failed: ") + std::strerror(errno));
      got += static_cast<std::size_t>(k);
    }
  }

 private:
  int fd_ = -1;
};

inline void send_frame(Socket& s, MsgType type, std::span<const std::uint8_t> payload) {
  s.send_all(encode_frame(type, payload));
}

inline void send_error(Socket& s, ErrorCode code) {
  const std::uint8_t c = static_cast<std::uint8_t>(code);
  try {
    send_frame(s, MsgType::error, std::span<const std::uint8_t>(&c, 1));
  } catch (const TransportError&) {
  }
}

// Reads one frame. A zero or oversized length is a ProtocolViolation
// (bad_length); the payload is not read in that case.
inline Frame read_frame(Socket& s) {
  std::uint8_t header[4];
  s.recv_exact(header);
  const auto length = braidauth::detail::get_be(header, 0, 4);
  if (length == 0 || length - 1 > kMaxPayload)
    throw ProtocolViolation(ErrorCode::bad_length, "frame length " + std::to_string(length));
  Frame f;
  std::uint8_t type = 0;
  s.recv_exact(std::span<std::uint8_t>(&type, 1));
  f.type = type;
  f.payload.resize(static_cast<std::size_t>(length - 1));
  s.recv_exact(f.payload);
  return f;
}

inline Socket connect_to(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0)
    throw TransportError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, &::freeaddrinfo);
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!s.valid()) continue;
    if (::connect(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
      int one = 1;
      ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return s;
    }
  }
  throw TransportError("cannot connect to " + host + ":" + service);
}

// ------------------------------------------------------------- verifier

struct SessionOutcome;

struct VerifierConfig {
  int scheme = 1;
  int rounds = 1;
  // Word length used to draw challenge braids; n comes from the HELLO key.
  SamplerConfig sampler;
  // When set, the HELLO key must equal this key.
  std::optional<PublicKey> pinned_key;
  std::uint64_t seed = 0;
  int io_timeout_seconds = 30;
  // Called from the session's thread when it ends.
  std::function<void(std::uint64_t, const SessionOutcome&)> on_session;
};

struct SessionOutcome {
  Transcript transcript;
  std::optional<ErrorCode> error;
};

namespace detail {

template <class Scheme>
Transcript verify_rounds(Socket& s, const typename Scheme::Public& pub, const VerifierConfig& cfg,
                         CoinStream& coins) {
  Transcript t;
  for (int k = 0; k < cfg.rounds; ++k) {
    const auto ch = Scheme::challenge(pub, cfg.sampler, coins);
    send_frame(s, MsgType::challenge, serialize(ch.braid));
    const Frame f = read_frame(s);
    if (!is_known_type(f.type)) throw ProtocolViolation(ErrorCode::unknown_type, "type " + std::to_string(f.type));
    if (f.type != static_cast<std::uint8_t>(MsgType::response))
      throw ProtocolViolation(ErrorCode::unexpected_message, "expected RESPONSE");
    if (f.payload.size() != Digest::kSize)
      throw ProtocolViolation(ErrorCode::bad_length, "response must be 32 bytes");
    Response z;
    std::copy(f.payload.begin(), f.payload.end(), z.digest.bytes.begin());
    const bool ok = Scheme::verify(pub, ch, z);
    t.rounds.push_back({ch.braid, z.digest, ok});
    send_frame(s, MsgType::verdict, encode_verdict(ok, static_cast<std::uint16_t>(k)));
    if (!ok) return t;
  }
  t.accepted = true;
  return t;
}

}  // namespace detail

// Runs the verifier side of one session on a connected socket. Never throws;
// protocol violations are answered with an ERROR frame.
inline SessionOutcome serve_session(Socket& s, const VerifierConfig& cfg, CoinStream& coins) {
  SessionOutcome out;
  try {
    const Frame hello = read_frame(s);
    if (!is_known_type(hello.type))
      throw ProtocolViolation(ErrorCode::unknown_type, "type " + std::to_string(hello.type));
    if (hello.type != static_cast<std::uint8_t>(MsgType::hello))
      throw ProtocolViolation(ErrorCode::unexpected_message, "expected HELLO");
    const PublicKey key = decode_hello(hello.payload);
    if (scheme_of(key) != cfg.scheme) throw ProtocolViolation(ErrorCode::scheme_mismatch, "HELLO scheme");
    if (cfg.pinned_key && !(*cfg.pinned_key == key))
      throw ProtocolViolation(ErrorCode::key_mismatch, "HELLO key differs from the configured key");
    if (const auto* k1 = std::get_if<SchemeIPublic>(&key))
      out.transcript = detail::verify_rounds<SchemeI>(s, *k1, cfg, coins);
    else
      out.transcript = detail::verify_rounds<SchemeII>(s, std::get<SchemeIIPublic>(key), cfg, coins);
  } catch (const ProtocolViolation& e) {
    out.error = e.code();
    send_error(s, e.code());
  } catch (const TransportError&) {
    out.transcript.aborted_at = out.transcript.rounds.size();
  } catch (const std::exception&) {
    out.error = ErrorCode::internal;
    send_error(s, ErrorCode::internal);
  }
  return out;
}

// Accepts connections and runs each session on its own thread.
class VerifierServer {
 public:
  VerifierServer(VerifierConfig cfg, const std::string& host, int port) : cfg_(std::move(cfg)) {
    listener_ = Socket(::socket(AF_INET, SOCK_STREAM, 0));
    if (!listener_.valid()) throw TransportError("socket() failed");
    int one = 1;
    ::setsockopt(listener_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) throw TransportError("bad listen address " + host);
    if (::bind(listener_.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
      throw TransportError(std::string("bind failed: ") + std::strerror(errno));
    if (::listen(listener_.fd(), 64) != 0) throw TransportError("listen failed");
    socklen_t len = sizeof addr;
    ::getsockname(listener_.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
  }

  ~VerifierServer() {
    stop();
    join_all();
  }

  int port() const { return port_; }

  // Serves until stop() or until `max_connections` sessions were accepted
  // (0 = unlimited); waits for running sessions before returning.
  void run(std::uint64_t max_connections = 0) {
    std::uint64_t accepted = 0;
    while (!stopping_ && (max_connections == 0 || accepted < max_connections)) {
      const int fd = ::accept(listener_.fd(), nullptr, nullptr);
      if (fd < 0) {
        if (errno == EINTR) continue;
        if (stopping_) break;
        continue;
      }
      const std::uint64_t id = accepted++;
      reap();
      auto done = std::make_shared<std::atomic<bool>>(false);
      std::lock_guard lock(mu_);
      workers_.push_back({std::thread([this, fd, id, done] {
                            Socket s(fd);
                            s.set_timeout(cfg_.io_timeout_seconds);
                            CoinStream coins(cfg_.seed, "verifier/" + std::to_string(id));
                            const SessionOutcome outcome = serve_session(s, cfg_, coins);
                            record(outcome);
                            if (cfg_.on_session) cfg_.on_session(id, outcome);
                            *done = true;
                          }),
                          done});
    }
    join_all();
  }

  void stop() {
    stopping_ = true;
    if (listener_.valid()) ::shutdown(listener_.fd(), SHUT_RDWR);
  }

  std::uint64_t sessions_accepted() const { return accepted_sessions_; }
  std::uint64_t sessions_rejected() const { return rejected_sessions_; }
  std::uint64_t sessions_errored() const { return errored_sessions_; }

 private:
  struct Worker {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };

  void record(const SessionOutcome& o) {
    if (o.error || o.transcript.aborted_at)
      ++errored_sessions_;
    else if (o.transcript.accepted)
      ++accepted_sessions_;
    else
      ++rejected_sessions_;
  }

  void reap() {
    std::lock_guard lock(mu_);
    for (auto it = workers_.begin(); it != workers_.end();) {
      if (*it->done) {
        it->thread.join();
        it = workers_.erase(it);
      } else {
        ++it;
      }
    }
  }

  void join_all() {
    std::list<Worker> pending;
    {
      std::lock_guard lock(mu_);
      pending.swap(workers_);
    }
    for (auto& w : pending)
      if (w.thread.joinable()) w.thread.join();
  }

  VerifierConfig cfg_;
  Socket listener_;
  int port_ = 0;
  std::atomic<bool> stopping_{false};
  std::mutex mu_;
  std::list<Worker> workers_;
  std::atomic<std::uint64_t> accepted_sessions_{0};
  std::atomic<std::uint64_t> rejected_sessions_{0};
  std::atomic<std::uint64_t> errored_sessions_{0};
};

// --------------------------------------------------------------- prover

enum class ProveStatus { accepted, rejected, protocol_error };

struct ProveOutcome {
  ProveStatus status = ProveStatus::protocol_error;
  int rounds = 0;
  std::optional<ErrorCode> peer_error;
  std::string message;
};

inline ProveOutcome prove_over(Socket& s, const KeyPair& keys) {
  ProveOutcome out;
  const PublicKey pub = std::visit([](const auto& k) -> PublicKey { return k.pub; }, keys);
  try {
    send_frame(s, MsgType::hello, encode_hello(pub));
    for (;;) {
      Frame f;
      try {
        f = read_frame(s);
      } catch (const TransportError&) {
        if (out.rounds > 0) {
          out.status = ProveStatus::accepted;
          return out;
        }
        throw;
      }
      switch (f.type) {
        case static_cast<std::uint8_t>(MsgType::challenge): {
          const CanonicalForm y = deserialize(f.payload);
          const Response z = std::visit(
              [&](const auto& k) {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, SchemeIKeys>)
                  return respond1(k, y);
                else
                  return respond2(k, y);
              },
              keys);
          send_frame(s, MsgType::response, z.digest.bytes);
          break;
        }
        case static_cast<std::uint8_t>(MsgType::verdict): {
          if (f.payload.size() != 3) throw ProtocolViolation(ErrorCode::bad_length, "VERDICT must be 3 bytes");
          ++out.rounds;
          if (f.payload[0] != 1) {
            out.status = ProveStatus::rejected;
            out.message = "rejected in round " + std::to_string(braidauth::detail::get_be(f.payload, 1, 2));
            return out;
          }
          break;
        }
        case static_cast<std::uint8_t>(MsgType::error): {
          out.status = ProveStatus::protocol_error;
          if (f.payload.size() == 1) out.peer_error = static_cast<ErrorCode>(f.payload[0]);
          out.message = std::string("verifier sent ERROR: ") +
                        (out.peer_error ? to_string(*out.peer_error) : "malformed error frame");
          return out;
        }
        default:
          throw ProtocolViolation(ErrorCode::unexpected_message, "type " + std::to_string(f.type));
      }
    }
  } catch (const ProtocolViolation& e) {
    send_error(s, e.code());
    out.status = ProveStatus::protocol_error;
    out.message = e.what();
  } catch (const ParseError& e) {
    send_error(s, ErrorCode::malformed_payload);
    out.status = ProveStatus::protocol_error;
    out.message = e.what();
  } catch (const TransportError& e) {
    out.status = ProveStatus::protocol_error;
    out.message = e.what();
  } catch (const InvalidParameter& e) {
    out.status = ProveStatus::protocol_error;
    out.message = e.what();
  }
  return out;
}

inline ProveOutcome prove(const std::string& host, int port, const KeyPair& keys, int io_timeout_seconds = 30) {
  Socket s;
  try {
    s = connect_to(host, port);
  } catch (const TransportError& e) {
    return {ProveStatus::protocol_error, 0, std::nullopt, e.what()};
  }
  s.set_timeout(io_timeout_seconds);
  return prove_over(s, keys);
}

}  // namespace braidauth::wire
