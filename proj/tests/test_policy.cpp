// Built-in CDN profile table, forwarding policy engine, and the
// observation-based policy classifier.
#include "ccsim/policy.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "catch_amalgamated.hpp"

using namespace ccsim;

namespace {

std::optional<std::string> forwarded_text(const CdnProfile& profile,
                                          const std::string& sent) {
  auto out = apply_forwarding_policy(profile.policy,
                                     parse_accept_encoding(sent));
  if (!out.has_value()) return std::nullopt;
  return serialize_accept_encoding(*out);
}

}  // namespace

TEST_CASE("registry holds the eleven vendor profiles in a fixed order") {
  auto registry = builtin_profiles();
  REQUIRE(registry.size() == 11);
  const char* names[] = {"Azure",      "Alibaba", "Bunny",   "Baidu",
                         "CloudFront", "Cloudflare", "CDN77",
                         "CDNetworks", "G-core",  "Tencent", "UPYun"};
  for (std::size_t i = 0; i < registry.size(); ++i)
    CHECK(registry[i].name == names[i]);
}

TEST_CASE("forward map: all profiles, all five canonical codings") {
  // Expected forwarded header per (profile, sent coding); nullopt = dropped.
  const std::optional<std::string> kDrop = std::nullopt;
  struct Row {
    const char* name;
    std::optional<std::string> gzip, compress, deflate, br, identity;
  };
  const std::string bunny_set = "gzip, deflate, br";
  const Row rows[] = {
      {"Azure", "gzip", "compress", "deflate", "br", kDrop},
      {"Alibaba", "gzip", "compress", "deflate", "br", "identity"},
      {"Bunny", bunny_set, bunny_set, bunny_set, bunny_set, bunny_set},
      {"Baidu", "gzip", kDrop, "deflate", "br", kDrop},
      {"CloudFront", "gzip", "compress", "deflate", "br", "identity"},
      {"Cloudflare", "gzip", "gzip", "gzip", "gzip", "gzip"},
      {"CDN77", kDrop, kDrop, kDrop, kDrop, kDrop},
      {"CDNetworks", "gzip", kDrop, kDrop, kDrop, kDrop},
      {"G-core", kDrop, kDrop, kDrop, kDrop, kDrop},
      {"Tencent", "gzip", kDrop, "deflate", "br", "identity"},
      {"UPYun", kDrop, kDrop, kDrop, kDrop, kDrop},
  };
  auto registry = builtin_profiles();
  for (const Row& row : rows) {
    const CdnProfile& p = find_profile(registry, row.name);
    INFO(row.name);
    CHECK(forwarded_text(p, "gzip") == row.gzip);
    CHECK(forwarded_text(p, "compress") == row.compress);
    CHECK(forwarded_text(p, "deflate") == row.deflate);
    CHECK(forwarded_text(p, "br") == row.br);
    CHECK(forwarded_text(p, "identity") == row.identity);
  }
}

TEST_CASE("absent Accept-Encoding forwards as absent everywhere") {
  for (const CdnProfile& p : builtin_profiles())
    CHECK_FALSE(apply_forwarding_policy(p.policy, std::nullopt).has_value());
}

TEST_CASE("edge compression sets and levels match the vendor table") {
  struct Row {
    const char* name;
    int gzip_level;
    int br_level;  // -1: edge cannot produce brotli
  };
  const Row rows[] = {
      {"Azure", 5, 5},     {"Alibaba", 5, 1},    {"Bunny", 2, 2},
      {"Baidu", 4, 4},     {"CloudFront", 2, 6}, {"Cloudflare", 2, 4},
      {"CDN77", 5, -1},    {"CDNetworks", 3, -1}, {"G-core", 2, -1},
      {"Tencent", 5, 5},   {"UPYun", 5, 5},
  };
  auto registry = builtin_profiles();
  for (const Row& row : rows) {
    const CdnProfile& p = find_profile(registry, row.name);
    INFO(row.name);
    REQUIRE(p.edge.supports(Coding::gzip));
    CHECK(p.edge.level_for(Coding::gzip) == row.gzip_level);
    if (row.br_level < 0) {
      CHECK_FALSE(p.edge.supports(Coding::br));
      CHECK_THROWS_AS(p.edge.level_for(Coding::br), Error);
    } else {
      REQUIRE(p.edge.supports(Coding::br));
      CHECK(p.edge.level_for(Coding::br) == row.br_level);
    }
    CHECK_FALSE(p.edge.supports(Coding::compress));
  }
}

TEST_CASE("gzip-for-identity decompression flag covers exactly four vendors") {
  for (const CdnProfile& p : builtin_profiles()) {
    bool expected = p.name == "Bunny" || p.name == "Cloudflare" ||
                    p.name == "CDNetworks" || p.name == "UPYun";
    INFO(p.name);
    CHECK(p.decompresses_gzip_for_identity == expected);
  }
}

TEST_CASE("vendor quirk flags") {
  auto registry = builtin_profiles();
  for (const CdnProfile& p : registry) {
    INFO(p.name);
    CHECK(p.converts_between_codings == (p.name == "Cloudflare"));
    CHECK(p.emits_cdn_identity_header == (p.name == "Cloudflare"));
    CHECK(p.decompresses_for_unservable_client == (p.name == "CDNetworks"));
    bool tuned = p.name == "Cloudflare" || p.name == "CloudFront";
    CHECK((p.gzip_backend == GzipBackend::tuned) == tuned);
    bool skips_cdn_marked = p.name == "Azure" || p.name == "Bunny" ||
                            p.name == "CloudFront" || p.name == "Tencent";
    CHECK(p.compresses_upstream_cdn_responses == !skips_cdn_marked);
  }
}

TEST_CASE("profile lookup is case-insensitive") {
  auto registry = builtin_profiles();
  CHECK(find_profile(registry, "cloudflare").name == "Cloudflare");
  CHECK(find_profile(registry, "UPYUN").name == "UPYun");
  CHECK(has_profile(registry, "g-CORE"));
  CHECK_FALSE(has_profile(registry, "akamai"));
  CHECK_THROWS_AS(find_profile(registry, "akamai"), Error);
}

TEST_CASE("policy classifier recognizes the four classes") {
  auto observe = [](const CdnProfile& p) {
    std::vector<PolicyObservation> obs;
    for (const char* sent :
         {"gzip", "compress", "deflate", "br", "identity"})
      obs.push_back({sent, forwarded_text(p, sent)});
    return obs;
  };
  auto registry = builtin_profiles();
  const std::map<std::string, PolicyClass> expected = {
      {"Azure", PolicyClass::mixed},
      {"Alibaba", PolicyClass::laziness},
      {"Bunny", PolicyClass::modification},
      {"Baidu", PolicyClass::mixed},
      {"CloudFront", PolicyClass::laziness},
      {"Cloudflare", PolicyClass::modification},
      {"CDN77", PolicyClass::deletion},
      {"CDNetworks", PolicyClass::mixed},
      {"G-core", PolicyClass::deletion},
      {"Tencent", PolicyClass::mixed},
      {"UPYun", PolicyClass::deletion},
  };
  for (const CdnProfile& p : registry) {
    INFO(p.name);
    CHECK(classify_policy(observe(p)) == expected.at(p.name));
  }
}

TEST_CASE("classifier compares headers canonically") {
  std::vector<PolicyObservation> obs = {
      {"gzip", "GZIP"},  // same coding, different spelling: still kept
      {"compress", "compress"},
      {"deflate", "deflate"},
      {"br", "br"},
      {"identity", "identity"},
  };
  CHECK(classify_policy(obs) == PolicyClass::laziness);
}

TEST_CASE("classifier requires the five canonical observations") {
  std::vector<PolicyObservation> obs = {
      {"gzip", "gzip"}, {"br", "br"}, {"identity", "identity"}};
  CHECK_THROWS_AS(classify_policy(obs), Error);
  try {
    classify_policy(obs);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::IncompleteObservation);
  }
}
