// Chain actors: the origin server model and the CDN edge node, including the
// transformation decision (compress / decompress / convert / pass) that
// drives every amplification effect in the simulator.
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ccsim/accept_encoding.hpp"
#include "ccsim/codecs.hpp"
#include "ccsim/errors.hpp"
#include "ccsim/http.hpp"
#include "ccsim/policy.hpp"

namespace ccsim {

// Every request in a chain is padded to this serialized size, and every
// response's header block to the profile's response_header_bytes, so link
// byte counts depend only on bodies, codings and the overhead model.
inline constexpr std::size_t kRequestHeaderTotal = 260;
inline constexpr std::size_t kOriginHeaderTotal = 700;
inline const char* const kPadHeader = "X-Pad";
inline const char* const kCdnIdHeader = "X-Cdn-Id";

namespace detail {

// Pads the header block to exactly `target` serialized bytes (excluding the
// body) via the filler header. Throws if the block already exceeds target:
// padding is a modeling constant, never a truncation.
inline void pad_headers_to(HttpMessage& m, std::size_t target) {
  m.remove_header(kPadHeader);
  std::size_t base = serialized_size(m) - m.body.size();
  std::size_t overhead = std::string(kPadHeader).size() + 2 + 2;  // ": " CRLF
  if (base + overhead + 1 > target)
    throw Error(Errc::ConfigError,
                "header block of " + std::to_string(base) +
                    " bytes cannot be padded to " + std::to_string(target));
  m.add_header(kPadHeader, std::string(target - base - overhead, 'x'));
}

}  // namespace detail

// Builds a client request, padded to kRequestHeaderTotal. `ae` empty means
// the header is absent (not an empty header value).
inline HttpMessage make_client_request(
    const std::string& target, const std::optional<std::string>& ae) {
  HttpMessage req;
  req.start_line = "GET " + target + " HTTP/1.1";
  req.add_header("Host", "origin.internal.test");
  req.add_header("User-Agent", "ccsim/1.0");
  req.add_header("Accept", "*/*");
  if (ae.has_value()) req.add_header("Accept-Encoding", *ae);
  detail::pad_headers_to(req, kRequestHeaderTotal);
  return req;
}

// ---------------------------------------------------------------------------
// Origin model.

struct OriginConfig {
  enum class Mode { negotiate, always_encoded };
  Mode mode = Mode::negotiate;

  // negotiate: codings the origin can produce, with levels. Empty models the
  // classic victim origin that serves identity no matter what.
  std::vector<std::pair<Coding, int>> supported;

  // Mitigated origins also compress when the request carries no usable
  // Accept-Encoding (the dual-codec defense); unmitigated origins keep the
  // standard fall-back-to-identity behavior.
  std::optional<Coding> identity_fallback;

  // always_encoded: a pre-compressed representation served unconditionally.
  Coding fixed_coding = Coding::gzip;
  int fixed_level = 9;

  Bytes body_plain;
  std::size_t extra_response_header_bytes = 0;
};

namespace detail {

inline std::optional<std::pair<Coding, int>> origin_pick(
    const OriginConfig& cfg, const AcceptEncoding& ae) {
  // Highest-q client coding the origin supports; br preferred on q ties.
  std::optional<std::pair<Coding, int>> best;
  int best_q = -1;
  for (const AeEntry& e : ae.entries) {
    if (e.q_milli == 0) continue;
    for (const auto& [coding, level] : cfg.supported) {
      if (coding != e.coding) continue;
      if (e.q_milli > best_q ||
          (e.q_milli == best_q && coding == Coding::br && best &&
           best->first != Coding::br)) {
        best = {coding, level};
        best_q = e.q_milli;
      }
    }
  }
  return best;
}

}  // namespace detail

inline HttpMessage origin_respond(const OriginConfig& cfg,
                                  const HttpMessage& request) {
  HttpMessage resp;
  resp.start_line = "HTTP/1.1 200 OK";
  resp.add_header("Date", "Thu, 01 Jan 2026 00:00:00 GMT");
  resp.add_header("Server", "ccsim-origin");
  resp.add_header("Content-Type", "application/octet-stream");

  if (cfg.mode == OriginConfig::Mode::always_encoded) {
    resp.set_body(compress(cfg.body_plain, cfg.fixed_coding, cfg.fixed_level),
                  cfg.fixed_coding);
  } else {
    std::optional<std::pair<Coding, int>> pick;
    auto ae = request.accept_encoding();
    if (ae.has_value()) pick = detail::origin_pick(cfg, *ae);
    if (!pick.has_value() && cfg.identity_fallback.has_value()) {
      for (const auto& [coding, level] : cfg.supported)
        if (coding == *cfg.identity_fallback) pick = {coding, level};
    }
    if (pick.has_value())
      resp.set_body(compress(cfg.body_plain, pick->first, pick->second),
                    pick->first);
    else
      resp.set_body(cfg.body_plain, Coding::identity);
    if (!cfg.supported.empty()) resp.add_header("Vary", "Accept-Encoding");
  }
  detail::pad_headers_to(
      resp, kOriginHeaderTotal + cfg.extra_response_header_bytes);
  return resp;
}

// ---------------------------------------------------------------------------
// Edge transformation decision.

// Which side of this node issued the request it is serving.
enum class HopKind { client_facing, inter_cdn };

struct NodeDecision {
  enum class Action { pass_through, compressed, decompressed, converted };
  Action action = Action::pass_through;
  Coding source = Coding::identity;
  Coding target = Coding::identity;
  int level = 0;
  std::string reason;
};

inline const char* action_name(NodeDecision::Action a) {
  switch (a) {
    case NodeDecision::Action::pass_through: return "pass_through";
    case NodeDecision::Action::compressed: return "compressed";
    case NodeDecision::Action::decompressed: return "decompressed";
    case NodeDecision::Action::converted: return "converted";
  }
  return "pass_through";
}

namespace detail {

// Codings this node may serve on this hop. Brotli is never served between
// CDNs (cascades run over plain HTTP, where edges fall back to gzip).
inline std::vector<Coding> servable_codings(const CdnProfile& profile,
                                            HopKind hop) {
  std::vector<Coding> out;
  for (const auto& [coding, level] : profile.edge.levels) {
    if (hop == HopKind::inter_cdn && coding == Coding::br) continue;
    out.push_back(coding);
  }
  return out;
}

// Most preferred acceptable coding that is servable; br wins q ties.
inline std::optional<Coding> pick_target(
    const std::optional<AcceptEncoding>& ae,
    const std::vector<Coding>& servable) {
  if (!ae.has_value()) return std::nullopt;
  std::optional<Coding> best;
  int best_q = -1;
  for (const AeEntry& e : by_preference(*ae)) {
    if (e.q_milli == 0 || e.coding == Coding::identity ||
        e.coding == Coding::other)
      continue;
    if (std::find(servable.begin(), servable.end(), e.coding) ==
        servable.end())
      continue;
    if (e.q_milli > best_q) {
      best = e.coding;
      best_q = e.q_milli;
    } else if (e.q_milli == best_q && e.coding == Coding::br) {
      best = e.coding;
    }
  }
  return best;
}

}  // namespace detail

// Decides what the edge does with the upstream body before answering the
// request it received. `received_ae` is the Accept-Encoding on the incoming
// request (before this node's own forwarding policy touched it).
inline NodeDecision decide_transformation(
    const CdnProfile& profile, const std::optional<AcceptEncoding>& received_ae,
    Coding upstream_coding, bool upstream_is_cdn_response, HopKind hop) {
  NodeDecision d;
  d.source = upstream_coding;
  d.target = upstream_coding;
  std::vector<Coding> servable = detail::servable_codings(profile, hop);

  // Another CDN already shaped this body; vendors that treat CDN-marked
  // responses as final leave them alone.
  if (upstream_is_cdn_response && !profile.compresses_upstream_cdn_responses) {
    d.reason = "upstream response is CDN-marked";
    return d;
  }

  // Plain upstream body, compressible client: the edge compresses.
  if (upstream_coding == Coding::identity) {
    if (auto target = detail::pick_target(received_ae, servable)) {
      d.action = NodeDecision::Action::compressed;
      d.target = *target;
      d.level = profile.edge.level_for(*target);
      d.reason = "edge-compressed identity body";
    }
    return d;
  }

  if (identity_only(received_ae)) {
    // Clients that cannot decode gzip get plaintext from vendors that
    // decompress; nobody decompresses brotli for them.
    if (upstream_coding == Coding::gzip &&
        profile.decompresses_gzip_for_identity) {
      d.action = NodeDecision::Action::decompressed;
      d.target = Coding::identity;
      d.reason = "decompressed gzip for identity-only requester";
    }
    return d;
  }

  const AcceptEncoding& ae = *received_ae;  // non-identity-only implies value
  Coding preferred = primary_coding(ae);

  // Format converter (gzip<->br re-encoding) when the stored coding is not
  // the requester's preference.
  if (profile.converts_between_codings && preferred != upstream_coding) {
    auto target = detail::pick_target(received_ae, servable);
    if (target.has_value() && *target != upstream_coding) {
      d.action = NodeDecision::Action::converted;
      d.target = *target;
      d.level = profile.edge.level_for(*target);
      d.reason = "converted to requester-preferred coding";
      return d;
    }
    if (!target.has_value() && upstream_coding == Coding::gzip &&
        hop == HopKind::inter_cdn && profile.decompresses_gzip_for_identity) {
      d.action = NodeDecision::Action::decompressed;
      d.target = Coding::identity;
      d.reason = "no servable conversion target; unpacked for downstream CDN";
      return d;
    }
  }

  // Aggressive vendors unpack gzip on cascade hops when the requester's
  // preferred coding is not the stored one and cannot be produced on this
  // hop (brotli never is, between CDNs).
  if (profile.decompresses_for_unservable_client &&
      upstream_coding == Coding::gzip && hop == HopKind::inter_cdn &&
      preferred != upstream_coding &&
      std::find(servable.begin(), servable.end(), preferred) ==
          servable.end()) {
    d.action = NodeDecision::Action::decompressed;
    d.target = Coding::identity;
    d.reason = "requester-preferred coding unservable; unpacked gzip";
    return d;
  }

  d.reason = "no transformation applies";
  return d;
}

// ---------------------------------------------------------------------------
// Edge node with a variant cache.

struct CacheStats {
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::size_t stores = 0;
};

// Variants are keyed on (request target, canonical received Accept-Encoding):
// Vary: Accept-Encoding semantics.
class CacheState {
 public:
  static std::string variant_key(const HttpMessage& request) {
    std::string key(request_target(request));
    key += '|';
    auto ae = request.accept_encoding();
    key += ae.has_value() ? serialize_accept_encoding(*ae) : "<absent>";
    return key;
  }

  const HttpMessage* lookup(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) {
      ++stats_.misses;
      return nullptr;
    }
    ++stats_.hits;
    return &it->second;
  }

  void store(const std::string& key, HttpMessage response) {
    ++stats_.stores;
    entries_[key] = std::move(response);
  }

  const CacheStats& stats() const { return stats_; }
  void clear() { entries_.clear(); }

 private:
  std::map<std::string, HttpMessage> entries_;
  CacheStats stats_;
};

struct NodeState {
  CdnProfile profile;
  HopKind hop = HopKind::client_facing;
  bool customer_deletes_ae = false;
  std::size_t safety_cap = kDefaultSafetyCap;
  CacheState cache;
  std::vector<NodeDecision> decisions;  // decision log, newest last
};

using UpstreamFn = std::function<HttpMessage(const HttpMessage&)>;

// Serves one request through the node: variant-cache lookup, policy-rewritten
// upstream fetch, transformation, response shaping. The upstream callable is
// the next hop (another node or the origin).
inline HttpMessage handle_request(NodeState& node, const HttpMessage& request,
                                  const UpstreamFn& upstream) {
  std::string key = CacheState::variant_key(request);
  if (const HttpMessage* cached = node.cache.lookup(key)) return *cached;

  std::optional<AcceptEncoding> received_ae = request.accept_encoding();

  HttpMessage fwd = request;
  std::optional<AcceptEncoding> fwd_ae =
      apply_forwarding_policy(node.profile.policy, received_ae);
  if (node.customer_deletes_ae) {
    if (!node.profile.allows_customer_header_deletion)
      throw Error(Errc::ConfigError,
                  node.profile.name +
                      " does not allow customer header deletion");
    fwd_ae = std::nullopt;
  }
  fwd.remove_header("Accept-Encoding");
  if (fwd_ae.has_value())
    fwd.add_header("Accept-Encoding", serialize_accept_encoding(*fwd_ae));
  detail::pad_headers_to(fwd, kRequestHeaderTotal);

  HttpMessage up;
  try {
    up = upstream(fwd);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::UpstreamError, e.what());
  }

  bool upstream_cdn_marked = up.header(kCdnIdHeader).has_value();
  NodeDecision decision = decide_transformation(
      node.profile, received_ae, up.content_coding, upstream_cdn_marked,
      node.hop);
  node.decisions.push_back(decision);

  HttpMessage resp = up;
  switch (decision.action) {
    case NodeDecision::Action::pass_through:
      break;
    case NodeDecision::Action::compressed: {
      Bytes packed = compress(resp.body, decision.target, decision.level,
                              node.profile.gzip_backend);
      resp.set_body(std::move(packed), decision.target);
      break;
    }
    case NodeDecision::Action::decompressed: {
      Bytes plain = decompress(resp.body, decision.source, node.safety_cap);
      resp.set_body(std::move(plain), Coding::identity);
      break;
    }
    case NodeDecision::Action::converted: {
      Bytes plain = decompress(resp.body, decision.source, node.safety_cap);
      Bytes packed = compress(plain, decision.target, decision.level,
                              node.profile.gzip_backend);
      resp.set_body(std::move(packed), decision.target);
      break;
    }
  }
  resp.set_header("Vary", "Accept-Encoding");
  if (node.profile.emits_cdn_identity_header)
    resp.set_header(kCdnIdHeader, node.profile.name);
  // Vendor header weight is a client-facing property; cache-fill responses to
  // a downstream CDN carry the lean base header block.
  detail::pad_headers_to(resp, node.hop == HopKind::client_facing
                                   ? node.profile.response_header_bytes
                                   : kOriginHeaderTotal);

  node.cache.store(key, resp);
  return resp;
}

}  // namespace ccsim
