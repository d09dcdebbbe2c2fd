// Live-probe toolkit: a recording origin you stand up behind the endpoint
// under test, a fixed low-volume request suite, and the classifier that turns
// the responses into a forwarding-policy class, per-coding actions, estimated
// edge compression levels, and decompression-behavior flags.
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ccsim/accept_encoding.hpp"
#include "ccsim/codecs.hpp"
#include "ccsim/errors.hpp"
#include "ccsim/http.hpp"
#include "ccsim/loopback.hpp"
#include "ccsim/node.hpp"
#include "ccsim/policy.hpp"

namespace ccsim {

// Reference material the prober planted on its own origin. Classification
// compares observed response sizes against local compressions of these exact
// bytes, so they must be the same bytes the origin serves.
struct ProbeMaterials {
  Bytes asset_plain;  // served identity on /asset (negotiation disabled)
  Bytes bomb_plain;   // served pre-compressed on /bomb-gzip and /bomb-br

  static ProbeMaterials standard(std::uint64_t seed = 42) {
    ProbeMaterials m;
    m.asset_plain = make_text_corpus({}, seed);
    m.bomb_plain = make_bomb({1024 * 1024, '0'});
    return m;
  }
};

// The origin half of a probe rig. Routes:
//   /echo      identity JSON body reporting the Accept-Encoding it received
//   /asset     the reference corpus, always identity (edge must compress)
//   /bomb-gzip the bomb, always gzip level 9
//   /bomb-br   the bomb, always brotli level 9
// Every request is also logged for offline inspection.
class RecordingOrigin {
 public:
  struct Record {
    std::string target;
    std::optional<std::string> accept_encoding;
  };

  explicit RecordingOrigin(ProbeMaterials materials)
      : materials_(std::move(materials)) {}

  HttpMessage respond(const HttpMessage& request) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      log_.push_back({std::string(request_target(request)),
                      request.header("Accept-Encoding")});
    }
    std::string_view path = request_path(request);
    if (path == "/echo") return echo(request);
    OriginConfig cfg;
    if (path == "/asset") {
      cfg.mode = OriginConfig::Mode::negotiate;  // no codings: identity only
      cfg.body_plain = materials_.asset_plain;
    } else if (path == "/bomb-gzip") {
      cfg.mode = OriginConfig::Mode::always_encoded;
      cfg.fixed_coding = Coding::gzip;
      cfg.fixed_level = 9;
      cfg.body_plain = materials_.bomb_plain;
    } else if (path == "/bomb-br") {
      cfg.mode = OriginConfig::Mode::always_encoded;
      cfg.fixed_coding = Coding::br;
      cfg.fixed_level = 9;
      cfg.body_plain = materials_.bomb_plain;
    } else {
      HttpMessage resp;
      resp.start_line = "HTTP/1.1 404 Not Found";
      resp.add_header("Date", "Thu, 01 Jan 2026 00:00:00 GMT");
      resp.add_header("Server", "ccsim-origin");
      resp.set_body({}, Coding::identity);
      detail::pad_headers_to(resp, kOriginHeaderTotal);
      return resp;
    }
    return origin_respond(cfg, request);
  }

  std::vector<Record> log() const {
    std::lock_guard<std::mutex> lock(mu_);
    return log_;
  }

  const ProbeMaterials& materials() const { return materials_; }

 private:
  HttpMessage echo(const HttpMessage& request) const {
    nlohmann::json j;
    auto ae = request.header("Accept-Encoding");
    j["accept_encoding"] =
        ae.has_value() ? nlohmann::json(*ae) : nlohmann::json(nullptr);
    j["target"] = std::string(request_target(request));
    std::string text = j.dump();
    HttpMessage resp;
    resp.start_line = "HTTP/1.1 200 OK";
    resp.add_header("Date", "Thu, 01 Jan 2026 00:00:00 GMT");
    resp.add_header("Server", "ccsim-origin");
    resp.add_header("Content-Type", "application/json");
    resp.set_body(Bytes(text.begin(), text.end()), Coding::identity);
    detail::pad_headers_to(resp, kOriginHeaderTotal);
    return resp;
  }

  ProbeMaterials materials_;
  mutable std::mutex mu_;
  mutable std::vector<Record> log_;
};

// How the probe reaches the endpoint: in-process against a NodeState, or a
// socket to whatever answers on a loopback port.
class ProbeTransport {
 public:
  virtual ~ProbeTransport() = default;
  virtual HttpMessage exchange(const HttpMessage& request) = 0;
};

class InProcessTransport : public ProbeTransport {
 public:
  InProcessTransport(NodeState& node, RecordingOrigin& origin)
      : node_(node), origin_(origin) {}

  HttpMessage exchange(const HttpMessage& request) override {
    return handle_request(node_, request, [this](const HttpMessage& fwd) {
      return origin_.respond(fwd);
    });
  }

 private:
  NodeState& node_;
  RecordingOrigin& origin_;
};

class SocketTransport : public ProbeTransport {
 public:
  explicit SocketTransport(std::uint16_t port) : port_(port) {}

  HttpMessage exchange(const HttpMessage& request) override {
    return loopback_exchange(port_, request).response;
  }

 private:
  std::uint16_t port_;
};

struct ProbeOptions {
  // Probing is only permissible against infrastructure whose origin you run.
  // Nothing in this module works until the caller asserts that.
  bool i_control_the_origin = false;
  int interval_ms = 200;  // pacing between requests
  int max_requests = 32;  // hard budget; the standard suite uses 12
  std::uint64_t seed = 1;
};

struct CodingProbeResult {
  Coding sent = Coding::identity;
  std::optional<std::string> forwarded;  // raw header the origin saw
  std::string action;                    // "kept" / "dropped" / "replaced ..."
};

struct LevelEstimate {
  Coding coding = Coding::gzip;
  std::size_t observed_size = 0;
  int level = 0;
  GzipBackend backend = GzipBackend::standard;  // meaningful for gzip only
  std::string confidence;  // "exact" / "within-2%" / "ambiguous"
};

struct EndpointClassification {
  PolicyClass policy_class = PolicyClass::mixed;
  std::vector<CodingProbeResult> coding_results;      // 5 canonical probes
  std::optional<std::string> forwarded_when_absent;   // AE-less client
  std::vector<LevelEstimate> edge_levels;             // codings the edge served
  bool decompresses_gzip_for_identity = false;
  bool supports_br_decompression = false;
  bool vary_ok = false;
  int requests_used = 0;
};

// Raw outputs of the request suite, before interpretation. Separating the
// wire phase from classification lets tests replay recorded observations.
struct ProbeObservations {
  struct Served {
    Coding coding = Coding::identity;
    std::size_t body_size = 0;
  };

  std::vector<CodingProbeResult> coding_results;     // echoes, 5 codings
  std::optional<std::string> forwarded_when_absent;  // AE-less echo
  std::optional<Served> asset_for_gzip;              // /asset with AE: gzip
  std::optional<Served> asset_for_br;                // /asset with AE: br
  bool bomb_gzip_unpacked = false;   // gzip bomb arrived as the plaintext
  bool bomb_br_unpacked = false;     // br bomb arrived as the plaintext
  Coding vary_first = Coding::identity;   // shared cache key, gzip client
  Coding vary_second = Coding::identity;  // same key, br client
  int requests_used = 0;
};

namespace detail {

inline LevelEstimate estimate_gzip_level(const Bytes& plain,
                                         std::size_t observed) {
  struct Candidate {
    int level;
    GzipBackend backend;
    std::size_t size;
  };
  std::vector<Candidate> candidates;
  for (int level = 1; level <= 9; ++level) {
    candidates.push_back(
        {level, GzipBackend::standard,
         compress(plain, Coding::gzip, level, GzipBackend::standard).size()});
    if (level <= 3)
      candidates.push_back(
          {level, GzipBackend::tuned,
           compress(plain, Coding::gzip, level, GzipBackend::tuned).size()});
  }
  // Candidates are ordered by (level, standard-before-tuned); strict < keeps
  // the first of any tie, which encodes both tie rules.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) {
                     if (a.level != b.level) return a.level < b.level;
                     return a.backend == GzipBackend::standard &&
                            b.backend == GzipBackend::tuned;
                   });
  const Candidate* best = nullptr;
  std::size_t best_diff = 0;
  for (const Candidate& c : candidates) {
    std::size_t diff =
        c.size > observed ? c.size - observed : observed - c.size;
    if (!best || diff < best_diff) {
      best = &c;
      best_diff = diff;
    }
  }
  LevelEstimate est;
  est.coding = Coding::gzip;
  est.observed_size = observed;
  est.level = best->level;
  est.backend = best->backend;
  if (best_diff == 0) {
    std::size_t same = 0;
    for (const Candidate& c : candidates)
      if (c.size == observed) ++same;
    est.confidence = same == 1 ? "exact" : "ambiguous";
  } else if (best_diff * 50 <= observed) {  // within 2%
    est.confidence = "within-2%";
  } else {
    est.confidence = "ambiguous";
  }
  return est;
}

inline LevelEstimate estimate_br_level(const Bytes& plain,
                                       std::size_t observed) {
  std::vector<std::pair<int, std::size_t>> candidates;
  for (int level = 0; level <= 11; ++level)
    candidates.emplace_back(level,
                            compress(plain, Coding::br, level).size());
  const std::pair<int, std::size_t>* best = nullptr;
  std::size_t best_diff = 0;
  for (const auto& c : candidates) {
    std::size_t diff =
        c.second > observed ? c.second - observed : observed - c.second;
    if (!best || diff < best_diff) {
      best = &c;
      best_diff = diff;
    }
  }
  LevelEstimate est;
  est.coding = Coding::br;
  est.observed_size = observed;
  est.level = best->first;
  if (best_diff == 0) {
    std::size_t same = 0;
    for (const auto& c : candidates)
      if (c.second == observed) ++same;
    est.confidence = same == 1 ? "exact" : "ambiguous";
  } else if (best_diff * 50 <= observed) {
    est.confidence = "within-2%";
  } else {
    est.confidence = "ambiguous";
  }
  return est;
}

}  // namespace detail

// Runs the standard 12-request suite and records what came back. Throws
// ConfigError unless the caller asserted control of the origin, and
// IncompleteObservation when a response cannot be interpreted.
inline ProbeObservations run_probe_suite(ProbeTransport& transport,
                                         const ProbeMaterials& materials,
                                         const ProbeOptions& options) {
  if (!options.i_control_the_origin)
    throw Error(Errc::ConfigError,
                "refusing to probe: pass i_control_the_origin only for "
                "endpoints whose origin you operate");

  ProbeObservations out;
  std::mt19937_64 rng(options.seed);

  auto request = [&](const std::string& target,
                     const std::optional<std::string>& ae) {
    if (out.requests_used >= options.max_requests)
      throw Error(Errc::IncompleteObservation,
                  "probe request budget exhausted after " +
                      std::to_string(out.requests_used) + " requests");
    if (out.requests_used > 0 && options.interval_ms > 0)
      std::this_thread::sleep_for(
          std::chrono::milliseconds(options.interval_ms));
    ++out.requests_used;
    return transport.exchange(make_client_request(target, ae));
  };
  auto bypass = [&](const std::string& path) {
    return path + "?cb=" + detail::bypass_token(rng);
  };
  auto body_text = [](const HttpMessage& resp) {
    Bytes raw = resp.content_coding == Coding::identity
                    ? resp.body
                    : decompress(resp.body, resp.content_coding);
    return std::string(raw.begin(), raw.end());
  };

  // 1-5: canonical single-coding echoes -> forwarding behavior per coding.
  for (Coding coding : {Coding::gzip, Coding::compress, Coding::deflate,
                        Coding::br, Coding::identity}) {
    std::string sent = coding_token(coding);
    HttpMessage resp = request(bypass("/echo"), sent);
    nlohmann::json j = nlohmann::json::parse(body_text(resp), nullptr, false);
    if (j.is_discarded() || !j.contains("accept_encoding"))
      throw Error(Errc::IncompleteObservation,
                  "echo response for '" + sent + "' is not interpretable");
    CodingProbeResult r;
    r.sent = coding;
    if (!j["accept_encoding"].is_null())
      r.forwarded = j["accept_encoding"].get<std::string>();
    if (!r.forwarded.has_value()) {
      r.action = "dropped";
    } else {
      AcceptEncoding fwd = parse_accept_encoding(*r.forwarded);
      if (serialize_accept_encoding(fwd) == sent)
        r.action = "kept";
      else
        r.action = "replaced with '" + serialize_accept_encoding(fwd) + "'";
    }
    out.coding_results.push_back(std::move(r));
  }

  // 6: AE-less client.
  {
    HttpMessage resp = request(bypass("/echo"), std::nullopt);
    nlohmann::json j = nlohmann::json::parse(body_text(resp), nullptr, false);
    if (j.is_discarded() || !j.contains("accept_encoding"))
      throw Error(Errc::IncompleteObservation,
                  "echo response for the header-less probe is not "
                  "interpretable");
    if (!j["accept_encoding"].is_null())
      out.forwarded_when_absent = j["accept_encoding"].get<std::string>();
  }

  // 7-8: reference asset -> which coding the edge serves, and at what size.
  {
    HttpMessage resp = request(bypass("/asset"), "gzip");
    out.asset_for_gzip = ProbeObservations::Served{resp.content_coding,
                                                   resp.body.size()};
  }
  {
    HttpMessage resp = request(bypass("/asset"), "br");
    out.asset_for_br = ProbeObservations::Served{resp.content_coding,
                                                 resp.body.size()};
  }

  // 9-10: pre-compressed bombs for an identity-only client -> decompression
  // behavior. Body equality against the planted plaintext confirms the edge
  // actually unpacked rather than substituted.
  {
    HttpMessage resp = request(bypass("/bomb-gzip"), "identity");
    out.bomb_gzip_unpacked = resp.content_coding == Coding::identity &&
                             resp.body == materials.bomb_plain;
  }
  {
    HttpMessage resp = request(bypass("/bomb-br"), "identity");
    out.bomb_br_unpacked = resp.content_coding == Coding::identity &&
                           resp.body == materials.bomb_plain;
  }

  // 11-12: shared cache key, different codings -> Vary handling. A cache
  // that ignores Accept-Encoding hands the second client the first client's
  // gzip variant.
  {
    std::string target = bypass("/asset");
    out.vary_first = request(target, "gzip").content_coding;
    out.vary_second = request(target, "br").content_coding;
  }

  return out;
}

// Interprets recorded observations: forwarding-policy class, level estimates
// for the codings the edge actually served, and the decompression flags.
inline EndpointClassification classify_endpoint(
    const ProbeObservations& observations, const ProbeMaterials& materials) {
  EndpointClassification out;
  out.coding_results = observations.coding_results;
  out.forwarded_when_absent = observations.forwarded_when_absent;
  out.requests_used = observations.requests_used;

  std::vector<PolicyObservation> policy;
  for (const CodingProbeResult& r : observations.coding_results)
    policy.push_back({coding_token(r.sent), r.forwarded});
  out.policy_class = classify_policy(policy);

  if (observations.asset_for_gzip &&
      observations.asset_for_gzip->coding == Coding::gzip)
    out.edge_levels.push_back(detail::estimate_gzip_level(
        materials.asset_plain, observations.asset_for_gzip->body_size));
  if (observations.asset_for_br &&
      observations.asset_for_br->coding == Coding::br)
    out.edge_levels.push_back(detail::estimate_br_level(
        materials.asset_plain, observations.asset_for_br->body_size));

  out.decompresses_gzip_for_identity = observations.bomb_gzip_unpacked;
  out.supports_br_decompression = observations.bomb_br_unpacked;
  out.vary_ok = observations.vary_first == Coding::gzip &&
                observations.vary_second != Coding::gzip;
  return out;
}

// One-call convenience: run the suite, then classify what it saw.
inline EndpointClassification probe_endpoint(ProbeTransport& transport,
                                             const ProbeMaterials& materials,
                                             const ProbeOptions& options) {
  return classify_endpoint(run_probe_suite(transport, materials, options),
                           materials);
}

}  // namespace ccsim
