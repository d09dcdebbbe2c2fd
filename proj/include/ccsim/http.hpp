// HTTP/1.1 message model with exact byte accounting. Every traffic number in
// the simulator comes from serialized_size/wire_size of these messages, so
// the serialization here IS the wire format of the loopback transport.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ccsim/accept_encoding.hpp"
#include "ccsim/codecs.hpp"
#include "ccsim/errors.hpp"

namespace ccsim {

struct HttpMessage {
  std::string start_line;  // request line or status line, no CRLF
  std::vector<std::pair<std::string, std::string>> headers;
  Bytes body;

  // Cached coding of the body; kept consistent with the Content-Encoding
  // header by the helpers below.
  Coding content_coding = Coding::identity;

  void add_header(std::string name, std::string value) {
    headers.emplace_back(std::move(name), std::move(value));
  }

  // Case-insensitive lookup of the first matching header.
  std::optional<std::string> header(std::string_view name) const {
    for (const auto& [n, v] : headers) {
      if (n.size() != name.size()) continue;
      bool eq = true;
      for (std::size_t i = 0; i < n.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(n[i])) !=
            std::tolower(static_cast<unsigned char>(name[i]))) {
          eq = false;
          break;
        }
      }
      if (eq) return v;
    }
    return std::nullopt;
  }

  void remove_header(std::string_view name) {
    std::erase_if(headers, [&](const auto& h) {
      if (h.first.size() != name.size()) return false;
      for (std::size_t i = 0; i < name.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(h.first[i])) !=
            std::tolower(static_cast<unsigned char>(name[i])))
          return false;
      }
      return true;
    });
  }

  void set_header(std::string name, std::string value) {
    remove_header(name);
    add_header(std::move(name), std::move(value));
  }

  std::optional<AcceptEncoding> accept_encoding() const {
    auto v = header("Accept-Encoding");
    if (!v.has_value()) return std::nullopt;
    return parse_accept_encoding(*v);
  }

  // Sets body + coding + the Content-Encoding/Content-Length headers as one
  // unit so the invariant (coding field == CE header) cannot drift.
  void set_body(Bytes b, Coding coding) {
    body = std::move(b);
    content_coding = coding;
    remove_header("Content-Encoding");
    if (coding != Coding::identity)
      add_header("Content-Encoding", coding_token(coding));
    set_header("Content-Length", std::to_string(body.size()));
  }

  bool coding_header_consistent() const {
    auto ce = header("Content-Encoding");
    if (content_coding == Coding::identity) return !ce.has_value();
    return ce.has_value() && coding_from_token(*ce) == content_coding;
  }
};

// Exact serialized size: start line + CRLF, each "Name: value" + CRLF, the
// blank separator line, then the body bytes.
inline std::size_t serialized_size(const HttpMessage& m) {
  std::size_t n = m.start_line.size() + 2;
  for (const auto& [name, value] : m.headers)
    n += name.size() + 2 + value.size() + 2;
  n += 2;
  n += m.body.size();
  return n;
}

inline std::string serialize(const HttpMessage& m) {
  std::string out;
  out.reserve(serialized_size(m));
  out += m.start_line;
  out += "\r\n";
  for (const auto& [name, value] : m.headers) {
    out += name;
    out += ": ";
    out += value;
    out += "\r\n";
  }
  out += "\r\n";
  out.append(m.body.begin(), m.body.end());
  return out;
}

// Per-link transport overhead model. http_only counts serialized bytes as
// they are; packetized charges a fixed per-packet cost per MSS-sized slice
// (defaults: 1460-byte MSS, 66 bytes of Ethernet+IP+TCP framing).
struct OverheadModel {
  enum class Kind { http_only, packetized };
  Kind kind = Kind::packetized;
  std::size_t mss = 1460;
  std::size_t per_packet = 66;

  bool operator==(const OverheadModel&) const = default;
};

inline OverheadModel http_only_overhead() {
  return {OverheadModel::Kind::http_only, 0, 0};
}

inline OverheadModel packetized_overhead(std::size_t mss = 1460,
                                         std::size_t per_packet = 66) {
  if (mss == 0) throw Error(Errc::ConfigError, "mss must be positive");
  return {OverheadModel::Kind::packetized, mss, per_packet};
}

inline std::size_t wire_size(std::size_t serialized, const OverheadModel& o) {
  if (o.kind == OverheadModel::Kind::http_only) return serialized;
  if (serialized == 0) return 0;
  std::size_t packets = (serialized + o.mss - 1) / o.mss;
  return serialized + packets * o.per_packet;
}

inline std::size_t wire_size(const HttpMessage& m, const OverheadModel& o) {
  return wire_size(serialized_size(m), o);
}

// ---------------------------------------------------------------------------
// Parsing (used by the loopback socket transport).

inline HttpMessage parse_http(std::string_view raw, bool* ok = nullptr) {
  HttpMessage m;
  if (ok) *ok = false;
  std::size_t line_end = raw.find("\r\n");
  if (line_end == std::string_view::npos) return m;
  m.start_line = std::string(raw.substr(0, line_end));
  std::size_t pos = line_end + 2;
  while (pos < raw.size()) {
    std::size_t eol = raw.find("\r\n", pos);
    if (eol == std::string_view::npos) return m;
    if (eol == pos) {  // blank line: headers done
      pos += 2;
      m.body.assign(raw.begin() + static_cast<std::ptrdiff_t>(pos), raw.end());
      auto ce = m.header("Content-Encoding");
      m.content_coding = ce ? coding_from_token(*ce) : Coding::identity;
      if (ok) *ok = true;
      return m;
    }
    std::string_view line = raw.substr(pos, eol - pos);
    std::size_t colon = line.find(':');
    if (colon == std::string_view::npos) return m;
    std::string_view name = line.substr(0, colon);
    std::string_view value = line.substr(colon + 1);
    while (!value.empty() && value.front() == ' ') value.remove_prefix(1);
    m.add_header(std::string(name), std::string(value));
    pos = eol + 2;
  }
  return m;
}

// Request path without the query string.
inline std::string_view request_path(const HttpMessage& req) {
  std::string_view line = req.start_line;
  std::size_t sp1 = line.find(' ');
  if (sp1 == std::string_view::npos) return {};
  std::size_t sp2 = line.find(' ', sp1 + 1);
  std::string_view target = line.substr(
      sp1 + 1, sp2 == std::string_view::npos ? std::string_view::npos
                                             : sp2 - sp1 - 1);
  std::size_t q = target.find('?');
  return q == std::string_view::npos ? target : target.substr(0, q);
}

inline std::string_view request_target(const HttpMessage& req) {
  std::string_view line = req.start_line;
  std::size_t sp1 = line.find(' ');
  if (sp1 == std::string_view::npos) return {};
  std::size_t sp2 = line.find(' ', sp1 + 1);
  return line.substr(sp1 + 1, sp2 == std::string_view::npos
                                  ? std::string_view::npos
                                  : sp2 - sp1 - 1);
}

inline std::string_view request_query(const HttpMessage& req) {
  std::string_view target = request_target(req);
  std::size_t q = target.find('?');
  return q == std::string_view::npos ? std::string_view{}
                                     : target.substr(q + 1);
}

}  // namespace ccsim
