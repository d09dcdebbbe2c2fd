// Loopback socket transport: a minimal HTTP/1.1 server and client speaking
// exactly the byte format of http.hpp's serializer, so a chain run over real
// sockets produces a ledger byte-identical to the in-process run.
#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "ccsim/http.hpp"
#include "ccsim/node.hpp"
#include "ccsim/simulate.hpp"

namespace ccsim {

namespace detail {

inline void write_all(int fd, const char* data, std::size_t n) {
  while (n > 0) {
    ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::ProbeTransportError,
                  std::string("send failed: ") + std::strerror(errno));
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

inline std::size_t header_block_content_length(const std::string& head) {
  std::size_t pos = 0;
  while (pos < head.size()) {
    std::size_t eol = head.find("\r\n", pos);
    if (eol == std::string::npos) eol = head.size();
    std::string_view line(head.data() + pos, eol - pos);
    std::size_t colon = line.find(':');
    if (colon != std::string_view::npos) {
      std::string name(line.substr(0, colon));
      for (char& c : name) c = static_cast<char>(std::tolower(
                               static_cast<unsigned char>(c)));
      if (name == "content-length") {
        std::size_t v = colon + 1;
        while (v < line.size() && line[v] == ' ') ++v;
        return static_cast<std::size_t>(
            std::stoull(std::string(line.substr(v))));
      }
    }
    pos = eol + 2;
  }
  return 0;
}

// Reads one full message: headers to the blank line, then Content-Length
// bytes of body. One message per connection keeps framing trivial.
inline std::string read_http_message_raw(int fd) {
  std::string raw;
  char buf[8192];
  std::size_t total = std::string::npos;
  for (;;) {
    if (total == std::string::npos) {
      std::size_t he = raw.find("\r\n\r\n");
      if (he != std::string::npos)
        total = he + 4 + header_block_content_length(raw.substr(0, he + 2));
    }
    if (total != std::string::npos) {
      if (raw.size() == total) return raw;
      if (raw.size() > total)
        throw Error(Errc::ProbeTransportError,
                    "peer sent bytes past the framed message");
    }
    ssize_t r = ::recv(fd, buf, sizeof buf, 0);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::ProbeTransportError,
                  std::string("recv failed: ") + std::strerror(errno));
    }
    if (r == 0)
      throw Error(Errc::ProbeTransportError,
                  "peer closed before a full message arrived");
    raw.append(buf, static_cast<std::size_t>(r));
  }
}

inline void set_io_timeout(int fd, int seconds) {
  timeval tv{};
  tv.tv_sec = seconds;
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

}  // namespace detail

// Single-threaded accept loop on an ephemeral 127.0.0.1 port. Connections are
// served one at a time; a handler is free to make its own loopback_exchange
// calls to other servers while serving (the chain nests that way).
class LoopbackServer {
 public:
  using Handler = std::function<HttpMessage(const HttpMessage&)>;

  explicit LoopbackServer(Handler handler) : handler_(std::move(handler)) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0)
      throw Error(Errc::ProbeTransportError, "socket() failed");
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) !=
            0 ||
        ::listen(listen_fd_, 16) != 0) {
      ::close(listen_fd_);
      throw Error(Errc::ProbeTransportError, "bind/listen failed on loopback");
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    thread_ = std::thread([this] { serve(); });
  }

  LoopbackServer(const LoopbackServer&) = delete;
  LoopbackServer& operator=(const LoopbackServer&) = delete;
  ~LoopbackServer() { stop(); }

  std::uint16_t port() const { return port_; }

  void stop() {
    if (stopping_.exchange(true)) return;
    if (thread_.joinable()) thread_.join();
    ::close(listen_fd_);
  }

 private:
  void serve() {
    while (!stopping_.load()) {
      pollfd pfd{listen_fd_, POLLIN, 0};
      int pr = ::poll(&pfd, 1, 50);
      if (pr <= 0) continue;
      int conn = ::accept(listen_fd_, nullptr, nullptr);
      if (conn < 0) continue;
      detail::set_io_timeout(conn, 30);
      serve_connection(conn);
      ::close(conn);
    }
  }

  void serve_connection(int conn) {
    HttpMessage resp;
    try {
      std::string raw = detail::read_http_message_raw(conn);
      bool ok = false;
      HttpMessage req = parse_http(raw, &ok);
      if (!ok) {
        resp.start_line = "HTTP/1.1 400 Bad Request";
        resp.set_header("X-Ccsim-Error", "unparseable request");
        resp.set_body({}, Coding::identity);
      } else {
        resp = handler_(req);
      }
    } catch (const std::exception& e) {
      resp = HttpMessage{};
      resp.start_line = "HTTP/1.1 500 Internal Server Error";
      resp.set_header("X-Ccsim-Error", e.what());
      resp.set_body({}, Coding::identity);
    }
    try {
      std::string out = serialize(resp);
      detail::write_all(conn, out.data(), out.size());
    } catch (...) {
      // Peer is gone; nothing useful left to do with this connection.
    }
  }

  Handler handler_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread thread_;
};

struct ExchangeResult {
  HttpMessage response;
  std::size_t request_bytes = 0;   // serialized bytes actually sent
  std::size_t response_bytes = 0;  // serialized bytes actually received
};

// One request/response over a fresh connection. Error replies minted by a
// LoopbackServer for a failed handler surface as UpstreamError here.
inline ExchangeResult loopback_exchange(std::uint16_t port,
                                        const HttpMessage& request) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw Error(Errc::ProbeTransportError, "socket() failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    int err = errno;
    ::close(fd);
    throw Error(Errc::ProbeTransportError,
                "connect to 127.0.0.1:" + std::to_string(port) +
                    " failed: " + std::strerror(err));
  }
  detail::set_io_timeout(fd, 30);
  ExchangeResult out;
  try {
    std::string wire = serialize(request);
    detail::write_all(fd, wire.data(), wire.size());
    out.request_bytes = wire.size();
    std::string raw = detail::read_http_message_raw(fd);
    out.response_bytes = raw.size();
    bool ok = false;
    out.response = parse_http(raw, &ok);
    if (!ok)
      throw Error(Errc::ProbeTransportError, "unparseable response");
    if (auto err = out.response.header("X-Ccsim-Error"))
      throw Error(Errc::UpstreamError, *err);
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
  return out;
}

// Runs the scenario chain with every party behind a real socket: one server
// per CDN node plus the origin, wired front to back. Ledger bytes are counted
// from the raw strings on the wire, not from message objects, so equality
// with run_scenario is a statement about the transport, not an identity.
inline SimulationResult run_scenario_loopback(
    const Scenario& s, const std::vector<CdnProfile>& registry) {
  detail::validate_scenario(s, registry);

  SimulationResult result;
  result.scenario = s;

  Bytes payload = detail::scenario_payload(s);
  OriginConfig origin = detail::scenario_origin(s, std::move(payload));
  std::vector<NodeState> nodes = detail::scenario_nodes(s, registry);

  TrafficLedger& ledger = result.ledger;
  ledger.links.resize(nodes.size() + 1);
  ledger.links[0].name = "client<->" + nodes[0].profile.name;
  for (std::size_t i = 1; i < nodes.size(); ++i)
    ledger.links[i].name =
        nodes[i - 1].profile.name + "<->" + nodes[i].profile.name;
  ledger.links.back().name = nodes.back().profile.name + "<->origin";

  // Servers come up back to front so each node's upstream port exists before
  // the node does. servers[i] runs node i; servers[nodes.size()] is the
  // origin. Each link is written by exactly one server's thread, and the
  // joins in stop() publish everything back to this thread.
  std::vector<std::unique_ptr<LoopbackServer>> servers(nodes.size() + 1);
  servers[nodes.size()] = std::make_unique<LoopbackServer>(
      [&origin](const HttpMessage& req) { return origin_respond(origin, req); });
  for (std::size_t i = nodes.size(); i-- > 0;) {
    servers[i] = std::make_unique<LoopbackServer>(
        [&, i](const HttpMessage& req) {
          UpstreamFn upstream = [&, i](const HttpMessage& fwd) {
            ExchangeResult ex =
                loopback_exchange(servers[i + 1]->port(), fwd);
            LinkStats& link = ledger.links[i + 1];
            link.request_bytes += wire_size(ex.request_bytes, s.overhead);
            link.response_bytes += wire_size(ex.response_bytes, s.overhead);
            ++link.exchanges;
            return std::move(ex.response);
          };
          return handle_request(nodes[i], req, upstream);
        });
  }

  std::mt19937_64 rng(s.seed);
  for (int rep = 0; rep < s.repetitions; ++rep) {
    std::string target = detail::scenario_path(s);
    if (s.cache_bypass) target += "?cb=" + detail::bypass_token(rng);
    HttpMessage req = make_client_request(target, s.client_ae);
    ExchangeResult ex = loopback_exchange(servers[0]->port(), req);
    ledger.links[0].request_bytes += wire_size(ex.request_bytes, s.overhead);
    ledger.links[0].response_bytes += wire_size(ex.response_bytes, s.overhead);
    ++ledger.links[0].exchanges;
  }

  for (auto& srv : servers) srv->stop();

  result.report.kind = s.kind;
  result.report.ucdn = s.ucdn;
  result.report.ocdn = s.ocdn;
  result.report.case_label =
      s.client_ae.has_value()
          ? coding_token(primary_coding(parse_accept_encoding(*s.client_ae)))
          : "absent";
  result.report.client_link_bytes = ledger.links[0].total();
  result.report.upstream_link_bytes = ledger.links[1].total();
  result.report.factor = amplification(ledger);
  for (const NodeState& n : nodes)
    for (const NodeDecision& d : n.decisions)
      result.decisions.emplace_back(n.profile.name, d);
  result.cache_front = nodes.front().cache.stats();
  return result;
}

}  // namespace ccsim
