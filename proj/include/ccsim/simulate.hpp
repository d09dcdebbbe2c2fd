// Attack-chain simulation: scenario description, per-link traffic ledger,
// amplification factors, the closed-form oracle, and the matrix sweep over
// all builtin profiles.
#pragma once

#include <cinttypes>
#include <cstdio>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ccsim/codecs.hpp"
#include "ccsim/http.hpp"
#include "ccsim/node.hpp"
#include "ccsim/policy.hpp"

namespace ccsim {

enum class AttackKind { cccf, ccuf1, ccuf2 };

inline const char* attack_kind_name(AttackKind k) {
  switch (k) {
    case AttackKind::cccf: return "cccf";
    case AttackKind::ccuf1: return "ccuf1";
    case AttackKind::ccuf2: return "ccuf2";
  }
  return "cccf";
}

inline AttackKind attack_kind_from(const std::string& s) {
  if (s == "cccf") return AttackKind::cccf;
  if (s == "ccuf1") return AttackKind::ccuf1;
  if (s == "ccuf2") return AttackKind::ccuf2;
  throw Error(Errc::ConfigError, "unknown scenario kind '" + s + "'");
}

enum class Mitigation { origin_dual_codec, ucdn_laziness, ocdn_no_convert };

inline const char* mitigation_name(Mitigation m) {
  switch (m) {
    case Mitigation::origin_dual_codec: return "origin_dual_codec";
    case Mitigation::ucdn_laziness: return "ucdn_laziness";
    case Mitigation::ocdn_no_convert: return "ocdn_no_convert";
  }
  return "origin_dual_codec";
}

inline Mitigation mitigation_from(const std::string& s) {
  if (s == "origin_dual_codec") return Mitigation::origin_dual_codec;
  if (s == "ucdn_laziness") return Mitigation::ucdn_laziness;
  if (s == "ocdn_no_convert") return Mitigation::ocdn_no_convert;
  throw Error(Errc::ConfigError, "unknown mitigation '" + s + "'");
}

struct Payload {
  enum class Kind { bomb, corpus };
  Kind kind = Kind::bomb;
  std::size_t plain_size = 1024 * 1024;
  double target_ratio = 6.0;  // corpus only
};

struct Scenario {
  AttackKind kind = AttackKind::cccf;
  std::string ucdn;  // cccf: the single CDN in the chain
  std::string ocdn;  // ccuf only
  std::optional<std::string> client_ae = "gzip";
  Payload payload;
  int repetitions = 1;
  bool cache_bypass = true;
  OverheadModel overhead = packetized_overhead();
  std::set<Mitigation> mitigations;
  bool customer_deletes_ae = false;
  std::uint64_t seed = 1;
  std::size_t safety_cap = kDefaultSafetyCap;
};

struct LinkStats {
  std::string name;
  std::size_t request_bytes = 0;
  std::size_t response_bytes = 0;
  std::size_t exchanges = 0;

  std::size_t total() const { return request_bytes + response_bytes; }
};

// links[0] is client<->first CDN; the last link is last CDN<->origin.
struct TrafficLedger {
  std::vector<LinkStats> links;
};

struct AmplificationReport {
  AttackKind kind = AttackKind::cccf;
  std::string ucdn;
  std::string ocdn;           // empty for cccf
  std::string case_label;     // client coding, e.g. "gzip" / "br"
  std::size_t client_link_bytes = 0;
  std::size_t upstream_link_bytes = 0;
  double factor = 0.0;
};

struct SimulationResult {
  Scenario scenario;
  TrafficLedger ledger;
  AmplificationReport report;
  std::vector<std::pair<std::string, NodeDecision>> decisions;  // node, what
  CacheStats cache_front;  // client-facing node's cache counters
};

// ---------------------------------------------------------------------------

namespace detail {

inline void validate_scenario(const Scenario& s,
                              const std::vector<CdnProfile>& registry) {
  if (s.ucdn.empty())
    throw Error(Errc::ConfigError, "scenario needs a CDN name");
  find_profile(registry, s.ucdn);
  if (s.kind == AttackKind::cccf) {
    if (!s.ocdn.empty())
      throw Error(Errc::ConfigError, "cccf chains have a single CDN");
  } else {
    if (s.ocdn.empty())
      throw Error(Errc::ConfigError, "ccuf chains need ucdn and ocdn");
    find_profile(registry, s.ocdn);
  }
  if (s.repetitions < 1)
    throw Error(Errc::ConfigError, "repetitions must be >= 1");
  if (s.payload.plain_size == 0)
    throw Error(Errc::ConfigError, "payload size must be positive");
}

inline Bytes scenario_payload(const Scenario& s) {
  if (s.payload.kind == Payload::Kind::bomb)
    return make_bomb({s.payload.plain_size, '0'}, s.safety_cap);
  return make_text_corpus({s.payload.plain_size, s.payload.target_ratio},
                          s.seed);
}

inline const char* scenario_path(const Scenario& s) {
  return s.payload.kind == Payload::Kind::bomb ? "/bomb" : "/asset";
}

// The origin model each attack assumes: CCCF targets a victim origin that
// cannot compress; CCUF chains use an attacker-run origin serving the bomb
// pre-compressed. The dual-codec mitigation replaces either with a
// negotiate-capable origin that also compresses for AE-less requests.
inline OriginConfig scenario_origin(const Scenario& s, Bytes payload) {
  OriginConfig origin;
  origin.body_plain = std::move(payload);
  if (s.mitigations.count(Mitigation::origin_dual_codec)) {
    origin.mode = OriginConfig::Mode::negotiate;
    origin.supported = {{Coding::gzip, 6}, {Coding::br, 5}};
    origin.identity_fallback = Coding::gzip;
    return origin;
  }
  if (s.kind == AttackKind::cccf) {
    origin.mode = OriginConfig::Mode::negotiate;  // no codings: identity only
  } else {
    origin.mode = OriginConfig::Mode::always_encoded;
    origin.fixed_coding = Coding::gzip;
    origin.fixed_level = 9;
  }
  return origin;
}

inline PolicyTable keep_all_policy() {
  PolicyTable t;
  for (Coding c : {Coding::gzip, Coding::compress, Coding::deflate, Coding::br,
                   Coding::identity})
    t.rules[c] = {ForwardAction::keep, ""};
  return t;
}

inline std::vector<NodeState> scenario_nodes(
    const Scenario& s, const std::vector<CdnProfile>& registry) {
  std::vector<NodeState> nodes;
  {
    NodeState front;
    front.profile = find_profile(registry, s.ucdn);
    front.hop = HopKind::client_facing;
    front.safety_cap = s.safety_cap;
    nodes.push_back(std::move(front));
  }
  if (s.kind != AttackKind::cccf) {
    NodeState back;
    back.profile = find_profile(registry, s.ocdn);
    back.hop = HopKind::inter_cdn;
    back.safety_cap = s.safety_cap;
    nodes.push_back(std::move(back));
  }
  if (s.mitigations.count(Mitigation::ucdn_laziness))
    nodes.front().profile.policy = keep_all_policy();
  if (s.mitigations.count(Mitigation::ocdn_no_convert)) {
    NodeState& back = nodes.back();
    back.profile.converts_between_codings = false;
    back.profile.decompresses_gzip_for_identity = false;
    back.profile.decompresses_for_unservable_client = false;
  }
  if (s.customer_deletes_ae) nodes.back().customer_deletes_ae = true;
  return nodes;
}

inline std::string bypass_token(std::mt19937_64& rng) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64,
                static_cast<std::uint64_t>(rng()));
  return std::string(buf, 16);
}

}  // namespace detail

// Numerator link of the amplification factor: the link right above the
// client-facing node (CDN<->origin for cccf, UCDN<->OCDN for ccuf).
inline double amplification(const TrafficLedger& ledger) {
  if (ledger.links.size() < 2)
    throw Error(Errc::DegenerateScenario, "ledger lacks an upstream link");
  std::size_t down = ledger.links[0].total();
  std::size_t up = ledger.links[1].total();
  if (down == 0)
    throw Error(Errc::DegenerateScenario, "client link carried no bytes");
  return static_cast<double>(up) / static_cast<double>(down);
}

// Runs the full chain in-process, counting every request and response at
// every link with the scenario's overhead model.
inline SimulationResult run_scenario(const Scenario& s,
                                     const std::vector<CdnProfile>& registry) {
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

  // Chain wiring: node i fetches from node i+1, the last node from the
  // origin, with the ledger counting on every hop boundary.
  std::function<HttpMessage(std::size_t, const HttpMessage&)> call_node =
      [&](std::size_t i, const HttpMessage& req) -> HttpMessage {
    UpstreamFn upstream = [&, i](const HttpMessage& fwd) -> HttpMessage {
      LinkStats& link = ledger.links[i + 1];
      link.request_bytes += wire_size(fwd, s.overhead);
      ++link.exchanges;
      HttpMessage up = (i + 1 < nodes.size()) ? call_node(i + 1, fwd)
                                              : origin_respond(origin, fwd);
      link.response_bytes += wire_size(up, s.overhead);
      return up;
    };
    return handle_request(nodes[i], req, upstream);
  };

  std::mt19937_64 rng(s.seed);
  for (int rep = 0; rep < s.repetitions; ++rep) {
    std::string target = detail::scenario_path(s);
    if (s.cache_bypass)
      target += "?cb=" + detail::bypass_token(rng);
    HttpMessage req = make_client_request(target, s.client_ae);
    ledger.links[0].request_bytes += wire_size(req, s.overhead);
    ++ledger.links[0].exchanges;
    HttpMessage resp = call_node(0, req);
    ledger.links[0].response_bytes += wire_size(resp, s.overhead);
  }

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

// ---------------------------------------------------------------------------
// Closed-form oracle: computes the same link totals as run_scenario through
// straight-line arithmetic (codec sizes + framing constants + overhead),
// without executing the node state machine. Covers unmitigated attack rows.

inline double closed_form_factor(const Scenario& s,
                                 const std::vector<CdnProfile>& registry) {
  detail::validate_scenario(s, registry);
  if (!s.mitigations.empty())
    throw Error(Errc::ConfigError,
                "closed form covers unmitigated attack scenarios");
  if (!s.client_ae.has_value())
    throw Error(Errc::ConfigError, "closed form needs a client coding");

  const CdnProfile& front = find_profile(registry, s.ucdn);
  Coding coding = primary_coding(parse_accept_encoding(*s.client_ae));
  if (!front.edge.supports(coding))
    throw Error(Errc::ConfigError,
                front.name + " edge cannot produce " + coding_token(coding));

  Bytes payload = detail::scenario_payload(s);
  Bytes client_body = compress(payload, coding,
                               front.edge.level_for(coding),
                               front.gzip_backend);

  auto exchange = [&](std::size_t header_total, std::size_t body) {
    return wire_size(kRequestHeaderTotal, s.overhead) +
           wire_size(header_total + body, s.overhead);
  };

  std::size_t n = static_cast<std::size_t>(s.repetitions);
  std::size_t client_total =
      n * exchange(front.response_header_bytes, client_body.size());

  std::size_t upstream_exchange;
  if (s.kind == AttackKind::cccf) {
    // Victim origin answers identity plaintext.
    upstream_exchange = exchange(kOriginHeaderTotal, payload.size());
  } else {
    // OCDN hands the UCDN the unpacked (or never-compressed) plaintext with
    // the lean inter-CDN header block.
    upstream_exchange = exchange(kOriginHeaderTotal, payload.size());
  }
  std::size_t upstream_total = (s.cache_bypass ? n : 1) * upstream_exchange;

  return static_cast<double>(upstream_total) /
         static_cast<double>(client_total);
}

// ---------------------------------------------------------------------------
// Matrix sweep.

struct SkippedCombo {
  AttackKind kind;
  std::string ucdn;
  std::string ocdn;
  std::string case_label;
  std::string reason;
};

struct MatrixOptions {
  Payload payload;
  int repetitions = 1;
  bool cache_bypass = true;
  OverheadModel overhead = packetized_overhead();
  std::set<Mitigation> mitigations;
  std::uint64_t seed = 1;
  std::set<AttackKind> kinds = {AttackKind::cccf, AttackKind::ccuf1,
                                AttackKind::ccuf2};
};

struct MatrixResult {
  std::vector<AmplificationReport> rows;
  std::vector<SimulationResult> details;  // parallel to rows
  std::vector<SkippedCombo> skipped;
};

namespace detail {

// Viability filters replay the decision layer on the exact AE values each
// hop would see (bodies elided), so they can never drift from what
// run_scenario does.

// Type-1 chain: UCDN forwards br upstream; the OCDN, fetching gzip from the
// attacker origin, strands the middle link at identity; the UCDN then
// re-compresses to br for the client.
inline std::optional<std::string> ccuf1_unviable_reason(
    const CdnProfile& ucdn, const CdnProfile& ocdn) {
  auto client_ae = parse_accept_encoding("br");
  auto fwd = apply_forwarding_policy(ucdn.policy, client_ae);
  bool forwards_br = false;
  if (fwd.has_value())
    for (const AeEntry& e : fwd->entries)
      if (e.coding == Coding::br && e.q_milli > 0) forwards_br = true;
  if (!forwards_br) return "ucdn does not forward br upstream";
  NodeDecision at_ocdn = decide_transformation(ocdn, fwd, Coding::gzip, false,
                                               HopKind::inter_cdn);
  if (at_ocdn.action != NodeDecision::Action::decompressed)
    return "ocdn leaves the origin's gzip body packed";
  NodeDecision at_ucdn = decide_transformation(
      ucdn, client_ae, Coding::identity, ocdn.emits_cdn_identity_header,
      HopKind::client_facing);
  if (at_ucdn.action != NodeDecision::Action::compressed ||
      at_ucdn.target != Coding::br)
    return "ucdn does not serve br for the unpacked body";
  return std::nullopt;
}

// Type-2 chain: the UCDN deletes the client coding it could itself produce,
// the OCDN unpacks the origin's gzip for the AE-less fetch, and the UCDN
// re-compresses the plaintext for the client.
inline std::optional<std::string> ccuf2_unviable_reason(
    const CdnProfile& ucdn, const CdnProfile& ocdn, Coding coding) {
  auto client_ae = parse_accept_encoding(coding_token(coding));
  auto fwd = apply_forwarding_policy(ucdn.policy, client_ae);
  if (fwd.has_value()) return "ucdn forwards the coding instead of deleting";
  auto at_ocdn_ae = apply_forwarding_policy(ocdn.policy, fwd);
  NodeDecision at_ocdn = decide_transformation(
      ocdn, at_ocdn_ae, Coding::gzip, false, HopKind::inter_cdn);
  if (at_ocdn.action != NodeDecision::Action::decompressed)
    return "ocdn does not unpack gzip for AE-less fetches";
  NodeDecision at_ucdn = decide_transformation(
      ucdn, client_ae, Coding::identity, ocdn.emits_cdn_identity_header,
      HopKind::client_facing);
  if (at_ucdn.action != NodeDecision::Action::compressed ||
      at_ucdn.target != coding)
    return std::string("ucdn does not serve ") + coding_token(coding) +
           " for the unpacked body";
  return std::nullopt;
}

}  // namespace detail

// Cartesian sweep over the registry, skipping unviable combinations with a
// stated reason. Row order: kind, then front-CDN registry order, then coding
// (gzip before br), then back-CDN registry order.
inline MatrixResult scenario_matrix(const std::vector<CdnProfile>& registry,
                                    const MatrixOptions& options) {
  MatrixResult out;
  auto run_row = [&](AttackKind kind, const std::string& ucdn,
                     const std::string& ocdn, Coding coding) {
    Scenario s;
    s.kind = kind;
    s.ucdn = ucdn;
    s.ocdn = ocdn;
    s.client_ae = coding_token(coding);
    s.payload = options.payload;
    s.repetitions = options.repetitions;
    s.cache_bypass = options.cache_bypass;
    s.overhead = options.overhead;
    s.mitigations = options.mitigations;
    s.seed = options.seed;
    SimulationResult r = run_scenario(s, registry);
    out.rows.push_back(r.report);
    out.details.push_back(std::move(r));
  };

  if (options.kinds.count(AttackKind::cccf)) {
    for (Coding coding : {Coding::gzip, Coding::br}) {
      for (const CdnProfile& p : registry) {
        if (!p.edge.supports(coding)) {
          out.skipped.push_back({AttackKind::cccf, p.name, "",
                                 coding_token(coding),
                                 std::string("edge cannot produce ") +
                                     coding_token(coding)});
          continue;
        }
        run_row(AttackKind::cccf, p.name, "", coding);
      }
    }
  }
  if (options.kinds.count(AttackKind::ccuf1)) {
    for (const CdnProfile& u : registry) {
      for (const CdnProfile& o : registry) {
        if (auto reason = detail::ccuf1_unviable_reason(u, o)) {
          out.skipped.push_back(
              {AttackKind::ccuf1, u.name, o.name, "br", *reason});
          continue;
        }
        run_row(AttackKind::ccuf1, u.name, o.name, Coding::br);
      }
    }
  }
  if (options.kinds.count(AttackKind::ccuf2)) {
    for (const CdnProfile& u : registry) {
      for (Coding coding : {Coding::gzip, Coding::br}) {
        for (const CdnProfile& o : registry) {
          if (auto reason = detail::ccuf2_unviable_reason(u, o, coding)) {
            out.skipped.push_back({AttackKind::ccuf2, u.name, o.name,
                                   coding_token(coding), *reason});
            continue;
          }
          run_row(AttackKind::ccuf2, u.name, o.name, coding);
        }
      }
    }
  }
  return out;
}

}  // namespace ccsim
