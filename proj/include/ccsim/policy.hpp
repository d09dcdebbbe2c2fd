// CDN behavior profiles: Accept-Encoding forwarding tables, edge compression
// capabilities, and the flag set describing each vendor's transformation
// quirks. The eleven builtin profiles encode measured vendor behavior.
#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ccsim/accept_encoding.hpp"
#include "ccsim/codecs.hpp"
#include "ccsim/errors.hpp"

namespace ccsim {

// What a CDN does to the client's Accept-Encoding before the upstream fetch.
enum class ForwardAction { keep, drop, replace };

struct PolicyRule {
  ForwardAction action = ForwardAction::keep;
  std::string replacement;  // canonical AE text, only for replace
};

// Maps the request's primary (most preferred) coding to a rule. The five
// canonical codings always have rows; anything else falls back to keep.
struct PolicyTable {
  std::map<Coding, PolicyRule> rules;

  const PolicyRule& rule_for(Coding primary) const {
    static const PolicyRule kKeep{};
    auto it = rules.find(primary);
    return it == rules.end() ? kKeep : it->second;
  }
};

// Applies the forwarding policy. Absent stays absent: there is no row to
// act on. drop forwards nothing; replace forwards the fixed set.
inline std::optional<AcceptEncoding> apply_forwarding_policy(
    const PolicyTable& table, const std::optional<AcceptEncoding>& ae) {
  if (!ae.has_value()) return std::nullopt;
  const PolicyRule& rule = table.rule_for(primary_coding(*ae));
  switch (rule.action) {
    case ForwardAction::keep:
      return ae;
    case ForwardAction::drop:
      return std::nullopt;
    case ForwardAction::replace:
      return parse_accept_encoding(rule.replacement);
  }
  return ae;
}

// Codings the edge can produce, with the vendor's configured level.
struct EdgeCompression {
  std::map<Coding, int> levels;

  bool supports(Coding c) const { return levels.count(c) != 0; }
  int level_for(Coding c) const {
    auto it = levels.find(c);
    if (it == levels.end())
      throw Error(Errc::UnsupportedCoding,
                  std::string("edge cannot produce ") + coding_token(c));
    return it->second;
  }
};

struct CdnProfile {
  std::string name;
  PolicyTable policy;
  EdgeCompression edge;

  // Vendor transformation quirks.
  bool decompresses_gzip_for_identity = false;  // serves plain to AE-less client
  bool converts_between_codings = false;        // re-encodes gzip<->br
  bool decompresses_for_unservable_client = false;  // inter-CDN hops only
  bool emits_cdn_identity_header = false;       // marks responses as CDN-made
  bool compresses_upstream_cdn_responses = true;  // false: skips CDN-marked bodies
  bool allows_customer_header_deletion = false;   // customer config can strip AE

  // Optimized vendor zlib fork (low declared levels spend extra effort).
  GzipBackend gzip_backend = GzipBackend::standard;

  // Modeled response-header weight: every edge response is padded to this
  // serialized header total (status line + headers + blank line).
  std::size_t response_header_bytes = 700;
};

// ---------------------------------------------------------------------------
// Policy classification from probe observations.

enum class PolicyClass { laziness, deletion, modification, mixed };

inline const char* policy_class_name(PolicyClass c) {
  switch (c) {
    case PolicyClass::laziness: return "laziness";
    case PolicyClass::deletion: return "deletion";
    case PolicyClass::modification: return "modification";
    case PolicyClass::mixed: return "mixed";
  }
  return "mixed";
}

struct PolicyObservation {
  std::string sent_ae;                    // header value the client sent
  std::optional<std::string> forwarded;   // what the origin received
};

namespace detail {

inline std::string canonical_ae(const std::string& text) {
  return serialize_accept_encoding(parse_accept_encoding(text));
}

}  // namespace detail

// Classifies from forwarding observations. Requires all five canonical
// single-coding inputs; throws IncompleteObservation otherwise.
//   laziness:     every output equals its input
//   deletion:     every output absent
//   modification: every output present and identical (constant rewrite)
//   mixed:        anything else
inline PolicyClass classify_policy(
    const std::vector<PolicyObservation>& observations) {
  static const std::array<Coding, 5> kCanonical = {
      Coding::gzip, Coding::compress, Coding::deflate, Coding::br,
      Coding::identity};
  std::map<Coding, const PolicyObservation*> canonical;
  for (const auto& obs : observations) {
    AcceptEncoding ae = parse_accept_encoding(obs.sent_ae);
    if (ae.entries.size() == 1)
      canonical[ae.entries.front().coding] = &obs;
  }
  for (Coding c : kCanonical) {
    if (!canonical.count(c))
      throw Error(Errc::IncompleteObservation,
                  std::string("missing single-coding observation for ") +
                      coding_token(c));
  }
  bool all_equal_input = true;
  bool all_absent = true;
  bool all_present = true;
  std::optional<std::string> constant;
  bool constant_ok = true;
  for (Coding c : kCanonical) {
    const PolicyObservation& obs = *canonical[c];
    if (obs.forwarded.has_value()) {
      all_absent = false;
      std::string canon = detail::canonical_ae(*obs.forwarded);
      if (canon != detail::canonical_ae(obs.sent_ae)) all_equal_input = false;
      if (!constant.has_value())
        constant = canon;
      else if (*constant != canon)
        constant_ok = false;
    } else {
      all_present = false;
      all_equal_input = false;
    }
  }
  if (all_equal_input) return PolicyClass::laziness;
  if (all_absent) return PolicyClass::deletion;
  if (all_present && constant_ok) return PolicyClass::modification;
  return PolicyClass::mixed;
}

// ---------------------------------------------------------------------------
// Builtin vendor profiles.

namespace detail {

inline PolicyTable policy_all(ForwardAction action,
                              const std::string& replacement = "") {
  PolicyTable t;
  for (Coding c : {Coding::gzip, Coding::compress, Coding::deflate, Coding::br,
                   Coding::identity})
    t.rules[c] = {action, replacement};
  return t;
}

inline PolicyTable policy_rows(PolicyRule gzip, PolicyRule compress,
                               PolicyRule deflate, PolicyRule br,
                               PolicyRule identity) {
  PolicyTable t;
  t.rules[Coding::gzip] = std::move(gzip);
  t.rules[Coding::compress] = std::move(compress);
  t.rules[Coding::deflate] = std::move(deflate);
  t.rules[Coding::br] = std::move(br);
  t.rules[Coding::identity] = std::move(identity);
  return t;
}

inline const PolicyRule kKeep{ForwardAction::keep, ""};
inline const PolicyRule kDrop{ForwardAction::drop, ""};

}  // namespace detail

inline std::vector<CdnProfile> builtin_profiles() {
  using detail::kDrop;
  using detail::kKeep;
  std::vector<CdnProfile> out;

  {
    CdnProfile p;
    p.name = "Azure";
    p.policy = detail::policy_rows(kKeep, kKeep, kKeep, kKeep, kDrop);
    p.edge.levels = {{Coding::gzip, 5}, {Coding::br, 5}};
    p.compresses_upstream_cdn_responses = false;
    p.response_header_bytes = 1280;
    out.push_back(std::move(p));
  }
  {
    CdnProfile p;
    p.name = "Alibaba";
    p.policy = detail::policy_all(ForwardAction::keep);
    p.edge.levels = {{Coding::gzip, 5}, {Coding::br, 1}};
    p.response_header_bytes = 2600;
    out.push_back(std::move(p));
  }
  {
    CdnProfile p;
    p.name = "Bunny";
    p.policy = detail::policy_all(ForwardAction::replace, "gzip, deflate, br");
    p.edge.levels = {{Coding::gzip, 2}, {Coding::br, 2}};
    p.decompresses_gzip_for_identity = true;
    p.compresses_upstream_cdn_responses = false;
    p.response_header_bytes = 1200;
    out.push_back(std::move(p));
  }
  {
    CdnProfile p;
    p.name = "Baidu";
    p.policy = detail::policy_rows(kKeep, kDrop, kKeep, kKeep, kDrop);
    p.edge.levels = {{Coding::gzip, 4}, {Coding::br, 4}};
    p.response_header_bytes = 1170;
    out.push_back(std::move(p));
  }
  {
    CdnProfile p;
    p.name = "CloudFront";
    p.policy = detail::policy_all(ForwardAction::keep);
    p.edge.levels = {{Coding::gzip, 2}, {Coding::br, 6}};
    p.compresses_upstream_cdn_responses = false;
    p.gzip_backend = GzipBackend::tuned;
    out.push_back(std::move(p));
  }
  {
    CdnProfile p;
    p.name = "Cloudflare";
    p.policy = detail::policy_all(ForwardAction::replace, "gzip");
    p.edge.levels = {{Coding::gzip, 2}, {Coding::br, 4}};
    p.decompresses_gzip_for_identity = true;
    p.converts_between_codings = true;
    p.emits_cdn_identity_header = true;
    p.allows_customer_header_deletion = true;
    p.gzip_backend = GzipBackend::tuned;
    out.push_back(std::move(p));
  }
  {
    CdnProfile p;
    p.name = "CDN77";
    p.policy = detail::policy_all(ForwardAction::drop);
    p.edge.levels = {{Coding::gzip, 5}};
    out.push_back(std::move(p));
  }
  {
    CdnProfile p;
    p.name = "CDNetworks";
    p.policy = detail::policy_rows(kKeep, kDrop, kDrop, kDrop, kDrop);
    p.edge.levels = {{Coding::gzip, 3}};
    p.decompresses_gzip_for_identity = true;
    p.decompresses_for_unservable_client = true;
    p.allows_customer_header_deletion = true;
    out.push_back(std::move(p));
  }
  {
    CdnProfile p;
    p.name = "G-core";
    p.policy = detail::policy_all(ForwardAction::drop);
    p.edge.levels = {{Coding::gzip, 2}};
    out.push_back(std::move(p));
  }
  {
    CdnProfile p;
    p.name = "Tencent";
    p.policy = detail::policy_rows(kKeep, kDrop, kKeep, kKeep, kKeep);
    p.edge.levels = {{Coding::gzip, 5}, {Coding::br, 5}};
    p.compresses_upstream_cdn_responses = false;
    out.push_back(std::move(p));
  }
  {
    CdnProfile p;
    p.name = "UPYun";
    p.policy = detail::policy_all(ForwardAction::drop);
    p.edge.levels = {{Coding::gzip, 5}, {Coding::br, 5}};
    p.decompresses_gzip_for_identity = true;
    out.push_back(std::move(p));
  }
  return out;
}

namespace detail {

inline bool name_eq(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

}  // namespace detail

// Lookup is case-insensitive; the registry keeps display casing.
inline const CdnProfile& find_profile(const std::vector<CdnProfile>& registry,
                                      const std::string& name) {
  for (const CdnProfile& p : registry)
    if (detail::name_eq(p.name, name)) return p;
  throw Error(Errc::ConfigError, "unknown CDN profile '" + name + "'");
}

inline bool has_profile(const std::vector<CdnProfile>& registry,
                        const std::string& name) {
  for (const CdnProfile& p : registry)
    if (detail::name_eq(p.name, name)) return true;
  return false;
}

}  // namespace ccsim
