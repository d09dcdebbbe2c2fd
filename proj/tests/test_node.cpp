// Node behavior: request shaping, origin models, the transformation decision
// table, variant caching, and response padding.
#include "ccsim/node.hpp"

#include <optional>
#include <string>

#include "catch_amalgamated.hpp"

using namespace ccsim;

namespace {

const std::vector<CdnProfile>& registry() {
  static const std::vector<CdnProfile> r = builtin_profiles();
  return r;
}

const CdnProfile& profile(const char* name) {
  return find_profile(registry(), name);
}

NodeDecision decide(const char* name, const std::optional<std::string>& ae,
                    Coding upstream, HopKind hop,
                    bool cdn_marked = false) {
  std::optional<AcceptEncoding> parsed;
  if (ae.has_value()) parsed = parse_accept_encoding(*ae);
  return decide_transformation(profile(name), parsed, upstream, cdn_marked,
                               hop);
}

OriginConfig victim_origin(Bytes body) {
  OriginConfig cfg;
  cfg.mode = OriginConfig::Mode::negotiate;  // no supported codings
  cfg.body_plain = std::move(body);
  return cfg;
}

}  // namespace

TEST_CASE("client requests serialize to the fixed request size") {
  CHECK(serialized_size(make_client_request("/asset", "gzip")) ==
        kRequestHeaderTotal);
  CHECK(serialized_size(make_client_request("/asset", std::nullopt)) ==
        kRequestHeaderTotal);
  CHECK(serialized_size(make_client_request(
            "/bomb?cb=0123456789abcdef", "gzip, deflate, br")) ==
        kRequestHeaderTotal);
  CHECK_FALSE(make_client_request("/x", std::nullopt)
                  .header("Accept-Encoding")
                  .has_value());
}

TEST_CASE("victim origin serves identity regardless of Accept-Encoding") {
  OriginConfig cfg = victim_origin(Bytes(5000, 'a'));
  HttpMessage resp = origin_respond(cfg, make_client_request("/a", "gzip"));
  CHECK(resp.content_coding == Coding::identity);
  CHECK(resp.body.size() == 5000);
  // Padded to the origin header total plus the body.
  CHECK(serialized_size(resp) == kOriginHeaderTotal + 5000);
  CHECK_FALSE(resp.header("Vary").has_value());
}

TEST_CASE("negotiating origin picks the preferred supported coding") {
  OriginConfig cfg;
  cfg.mode = OriginConfig::Mode::negotiate;
  cfg.supported = {{Coding::gzip, 6}, {Coding::br, 5}};
  cfg.body_plain = Bytes(10000, 'b');

  HttpMessage resp =
      origin_respond(cfg, make_client_request("/a", "gzip, br"));
  CHECK(resp.content_coding == Coding::br);  // q tie -> modern rank
  CHECK(resp.header("Vary") == "Accept-Encoding");

  resp = origin_respond(cfg,
                        make_client_request("/a", "gzip;q=0.9, br;q=0.1"));
  CHECK(resp.content_coding == Coding::gzip);

  resp = origin_respond(cfg, make_client_request("/a", std::nullopt));
  CHECK(resp.content_coding == Coding::identity);

  cfg.identity_fallback = Coding::gzip;  // dual-codec defender origin
  resp = origin_respond(cfg, make_client_request("/a", std::nullopt));
  CHECK(resp.content_coding == Coding::gzip);
}

TEST_CASE("always-encoded origin ignores negotiation") {
  OriginConfig cfg;
  cfg.mode = OriginConfig::Mode::always_encoded;
  cfg.fixed_coding = Coding::gzip;
  cfg.fixed_level = 9;
  cfg.body_plain = Bytes(100000, '0');
  for (auto ae : {std::optional<std::string>("identity"),
                  std::optional<std::string>(), {"br"}}) {
    HttpMessage resp = origin_respond(cfg, make_client_request("/b", ae));
    CHECK(resp.content_coding == Coding::gzip);
    CHECK(decompress(resp.body, Coding::gzip) == cfg.body_plain);
  }
}

TEST_CASE("decision: CDN-marked upstream bodies are left alone by some") {
  auto d = decide("Azure", "br", Coding::gzip, HopKind::client_facing, true);
  CHECK(d.action == NodeDecision::Action::pass_through);
  d = decide("Tencent", "br", Coding::identity, HopKind::client_facing, true);
  CHECK(d.action == NodeDecision::Action::pass_through);
  // Alibaba compresses even after another CDN shaped the body.
  d = decide("Alibaba", "br", Coding::identity, HopKind::client_facing, true);
  CHECK(d.action == NodeDecision::Action::compressed);
}

TEST_CASE("decision: identity upstream is edge-compressed for the client") {
  auto d = decide("Tencent", "br", Coding::identity, HopKind::client_facing);
  CHECK(d.action == NodeDecision::Action::compressed);
  CHECK(d.target == Coding::br);
  CHECK(d.level == 5);

  d = decide("Tencent", "gzip, br", Coding::identity,
             HopKind::client_facing);
  CHECK(d.target == Coding::br);  // q tie -> br preferred

  d = decide("CDN77", "gzip", Coding::identity, HopKind::client_facing);
  CHECK(d.action == NodeDecision::Action::compressed);
  CHECK(d.target == Coding::gzip);
  CHECK(d.level == 5);

  // No servable coding for this client: body stays identity.
  d = decide("CDN77", "br", Coding::identity, HopKind::client_facing);
  CHECK(d.action == NodeDecision::Action::pass_through);
}

TEST_CASE("decision: inter-CDN hops never produce brotli") {
  auto d = decide("Tencent", "gzip, br", Coding::identity,
                  HopKind::inter_cdn);
  CHECK(d.action == NodeDecision::Action::compressed);
  CHECK(d.target == Coding::gzip);  // br suppressed between CDNs

  d = decide("Tencent", "br", Coding::identity, HopKind::inter_cdn);
  CHECK(d.action == NodeDecision::Action::pass_through);
}

TEST_CASE("decision: gzip is unpacked for identity-only clients by the four") {
  for (const char* name : {"Bunny", "Cloudflare", "CDNetworks", "UPYun"}) {
    INFO(name);
    auto d = decide(name, "identity", Coding::gzip, HopKind::client_facing);
    CHECK(d.action == NodeDecision::Action::decompressed);
    d = decide(name, std::nullopt, Coding::gzip, HopKind::client_facing);
    CHECK(d.action == NodeDecision::Action::decompressed);
  }
  for (const char* name : {"Azure", "Alibaba", "Baidu", "CloudFront",
                           "CDN77", "G-core", "Tencent"}) {
    INFO(name);
    auto d = decide(name, "identity", Coding::gzip, HopKind::client_facing);
    CHECK(d.action == NodeDecision::Action::pass_through);
  }
  // None of the vendors unpack brotli.
  for (const CdnProfile& p : registry()) {
    auto d = decide(p.name.c_str(), "identity", Coding::br,
                    HopKind::client_facing);
    CHECK(d.action == NodeDecision::Action::pass_through);
  }
}

TEST_CASE("decision: the converter re-encodes toward the preferred coding") {
  auto d = decide("Cloudflare", "br", Coding::gzip, HopKind::client_facing);
  CHECK(d.action == NodeDecision::Action::converted);
  CHECK(d.source == Coding::gzip);
  CHECK(d.target == Coding::br);
  CHECK(d.level == 4);

  // Preferred coding equals the stored one: nothing to convert.
  d = decide("Cloudflare", "gzip", Coding::gzip, HopKind::client_facing);
  CHECK(d.action == NodeDecision::Action::pass_through);

  // Between CDNs brotli is not producible, so conversion falls back to
  // plain decompression.
  d = decide("Cloudflare", "br", Coding::gzip, HopKind::inter_cdn);
  CHECK(d.action == NodeDecision::Action::decompressed);
}

TEST_CASE("decision: aggressive unpack when the preferred coding is out of "
          "reach on the hop") {
  auto d = decide("CDNetworks", "br", Coding::gzip, HopKind::inter_cdn);
  CHECK(d.action == NodeDecision::Action::decompressed);

  // The same request on the client-facing hop stays packed.
  d = decide("CDNetworks", "br", Coding::gzip, HopKind::client_facing);
  CHECK(d.action == NodeDecision::Action::pass_through);

  // A gzip-preferring downstream keeps the gzip body.
  d = decide("CDNetworks", "gzip", Coding::gzip, HopKind::inter_cdn);
  CHECK(d.action == NodeDecision::Action::pass_through);

  // The fixed modification set "gzip, deflate, br" still prefers br, so the
  // body is unpacked even though gzip is nominally acceptable.
  d = decide("CDNetworks", "gzip, deflate, br", Coding::gzip,
             HopKind::inter_cdn);
  CHECK(d.action == NodeDecision::Action::decompressed);

  // Vendors without the quirk pass the body through.
  d = decide("G-core", "br", Coding::gzip, HopKind::inter_cdn);
  CHECK(d.action == NodeDecision::Action::pass_through);
}

TEST_CASE("node caches one variant per Accept-Encoding") {
  NodeState node;
  node.profile = profile("Tencent");
  node.hop = HopKind::client_facing;

  int upstream_calls = 0;
  OriginConfig cfg = victim_origin(Bytes(8192, 'c'));
  auto upstream = [&](const HttpMessage& req) {
    ++upstream_calls;
    return origin_respond(cfg, req);
  };

  HttpMessage r1 = handle_request(node, make_client_request("/a", "gzip"),
                                  upstream);
  HttpMessage r2 = handle_request(node, make_client_request("/a", "gzip"),
                                  upstream);
  CHECK(upstream_calls == 1);  // second hit served from cache
  CHECK(serialize(r1) == serialize(r2));
  CHECK(node.cache.stats().hits == 1);
  CHECK(node.cache.stats().misses == 1);
  CHECK(node.cache.stats().stores == 1);

  HttpMessage r3 = handle_request(node, make_client_request("/a", "br"),
                                  upstream);
  CHECK(upstream_calls == 2);  // different variant key
  CHECK(r3.content_coding == Coding::br);
  CHECK(r1.content_coding == Coding::gzip);

  handle_request(node, make_client_request("/a?cb=zzz", "gzip"), upstream);
  CHECK(upstream_calls == 3);  // cache-bypass token misses
}

TEST_CASE("responses carry Vary and the vendor header weight") {
  NodeState node;
  node.profile = profile("Alibaba");  // padded to 2600 client-facing
  node.hop = HopKind::client_facing;
  OriginConfig cfg = victim_origin(Bytes(1000, 'd'));
  HttpMessage resp = handle_request(
      node, make_client_request("/a", "gzip"),
      [&](const HttpMessage& req) { return origin_respond(cfg, req); });
  CHECK(resp.header("Vary") == "Accept-Encoding");
  CHECK(serialized_size(resp) ==
        node.profile.response_header_bytes + resp.body.size());

  NodeState inter;
  inter.profile = profile("Alibaba");
  inter.hop = HopKind::inter_cdn;
  resp = handle_request(
      inter, make_client_request("/a", "gzip"),
      [&](const HttpMessage& req) { return origin_respond(cfg, req); });
  CHECK(serialized_size(resp) == kOriginHeaderTotal + resp.body.size());
}

TEST_CASE("only the converter marks responses with the CDN identity header") {
  OriginConfig cfg = victim_origin(Bytes(100, 'e'));
  for (const char* name : {"Cloudflare", "Azure"}) {
    NodeState node;
    node.profile = profile(name);
    node.hop = HopKind::client_facing;
    HttpMessage resp = handle_request(
        node, make_client_request("/a", "gzip"),
        [&](const HttpMessage& req) { return origin_respond(cfg, req); });
    CHECK(resp.header(kCdnIdHeader).has_value() ==
          (std::string(name) == "Cloudflare"));
  }
}

TEST_CASE("customer header deletion needs vendor support") {
  OriginConfig cfg = victim_origin(Bytes(100, 'f'));
  std::optional<std::string> upstream_saw_ae = "unset";
  auto upstream = [&](const HttpMessage& req) {
    upstream_saw_ae = req.header("Accept-Encoding");
    return origin_respond(cfg, req);
  };

  NodeState allowed;
  allowed.profile = profile("CDNetworks");
  allowed.customer_deletes_ae = true;
  handle_request(allowed, make_client_request("/a", "gzip"), upstream);
  CHECK_FALSE(upstream_saw_ae.has_value());

  NodeState denied;
  denied.profile = profile("Azure");
  denied.customer_deletes_ae = true;
  CHECK_THROWS_AS(
      handle_request(denied, make_client_request("/a", "gzip"), upstream),
      Error);
}

TEST_CASE("forwarded requests stay at the fixed request size") {
  OriginConfig cfg = victim_origin(Bytes(100, 'g'));
  std::size_t fwd_size = 0;
  NodeState node;
  node.profile = profile("Bunny");  // replaces the AE with its fixed set
  handle_request(node, make_client_request("/a", "br"),
                 [&](const HttpMessage& req) {
                   fwd_size = serialized_size(req);
                   return origin_respond(cfg, req);
                 });
  CHECK(fwd_size == kRequestHeaderTotal);
}

TEST_CASE("decompression at the node respects the safety cap") {
  OriginConfig cfg;
  cfg.mode = OriginConfig::Mode::always_encoded;
  cfg.fixed_coding = Coding::gzip;
  cfg.fixed_level = 9;
  cfg.body_plain = Bytes(1024 * 1024, '0');

  NodeState node;
  node.profile = profile("UPYun");  // unpacks gzip for identity clients
  node.safety_cap = 1024;           // far below the 1 MiB plaintext
  CHECK_THROWS_AS(
      handle_request(node, make_client_request("/b", "identity"),
                     [&](const HttpMessage& req) {
                       return origin_respond(cfg, req);
                     }),
      Error);
}

TEST_CASE("header padding hits exact serialized totals") {
  HttpMessage m;
  m.start_line = "HTTP/1.1 200 OK";
  m.set_body(Bytes(10, 'h'), Coding::identity);
  detail::pad_headers_to(m, 700);
  CHECK(serialized_size(m) == 700 + 10);

  HttpMessage tiny;
  tiny.start_line = "HTTP/1.1 200 OK";
  // A target below the unpadded size cannot be met.
  CHECK_THROWS_AS(detail::pad_headers_to(tiny, 10), Error);
}
