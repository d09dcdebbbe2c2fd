// Codec backends and payload synthesizers.
#include "ccsim/codecs.hpp"

#include <algorithm>
#include <vector>

#include "catch_amalgamated.hpp"

using namespace ccsim;

namespace {

Bytes zeros(std::size_t n) { return Bytes(n, '0'); }

}  // namespace

TEST_CASE("gzip level 9 crushes the zero-fill bomb") {
  Bytes plain = make_bomb({1024 * 1024, '0'});
  Bytes packed = compress(plain, Coding::gzip, 9);
  // Frozen against the zlib build this project targets.
  CHECK(packed.size() == 1052);
  double ratio = static_cast<double>(plain.size()) / packed.size();
  CHECK(ratio >= 950.0);
  CHECK(decompress(packed, Coding::gzip) == plain);
}

TEST_CASE("brotli levels on the zero-fill bomb") {
  Bytes plain = zeros(1024 * 1024);
  CHECK(compress(plain, Coding::br, 1).size() == 190);
  CHECK(compress(plain, Coding::br, 5).size() == 13);
  CHECK(decompress(compress(plain, Coding::br, 5), Coding::br) == plain);
}

TEST_CASE("deflate and gzip round-trip arbitrary text") {
  Bytes corpus = make_text_corpus({200000, 4.0}, 7);
  for (Coding c : {Coding::gzip, Coding::deflate, Coding::br}) {
    Bytes packed = compress(corpus, c, 5);
    CHECK(packed.size() < corpus.size());
    CHECK(decompress(packed, c) == corpus);
  }
}

TEST_CASE("tuned gzip backend crushes runs even at low declared levels") {
  Bytes plain = zeros(1024 * 1024);
  Bytes tuned2 = compress(plain, Coding::gzip, 2, GzipBackend::tuned);
  // Stock level 2 stays an order of magnitude fatter on runs.
  CHECK(compress(plain, Coding::gzip, 2).size() > 4 * tuned2.size());
  CHECK(decompress(tuned2, Coding::gzip) == plain);
  // At and above level 4 the backends agree byte for byte.
  CHECK(compress(plain, Coding::gzip, 5, GzipBackend::tuned) ==
        compress(plain, Coding::gzip, 5));
}

TEST_CASE("every (level, backend) gzip pair has a unique size on text") {
  Bytes corpus = make_text_corpus({}, 42);
  std::vector<size_t> sizes;
  for (int level = 1; level <= 9; ++level)
    sizes.push_back(compress(corpus, Coding::gzip, level).size());
  for (int level = 1; level <= 3; ++level)
    sizes.push_back(
        compress(corpus, Coding::gzip, level, GzipBackend::tuned).size());
  // Stock levels 8 and 9 may coincide; nothing else is allowed to.
  std::sort(sizes.begin(), sizes.end());
  size_t dupes = 0;
  for (size_t i = 1; i < sizes.size(); ++i)
    if (sizes[i] == sizes[i - 1]) ++dupes;
  CHECK(dupes <= 1);
  // The pairs the estimator must separate are strictly distinct.
  auto sz = [&](int level, GzipBackend b) {
    return compress(corpus, Coding::gzip, level, b).size();
  };
  for (int level = 1; level <= 3; ++level) {
    CHECK(sz(level, GzipBackend::tuned) != sz(level, GzipBackend::standard));
    CHECK(sz(level, GzipBackend::tuned) !=
          sz(level + 3, GzipBackend::standard));
  }
}

TEST_CASE("level domains are enforced") {
  Bytes b = zeros(64);
  CHECK_THROWS_MATCHES(compress(b, Coding::gzip, 0), Error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("InvalidLevel")));
  CHECK_THROWS_AS(compress(b, Coding::gzip, 10), Error);
  CHECK_THROWS_AS(compress(b, Coding::br, 12), Error);
  CHECK_THROWS_AS(compress(b, Coding::deflate, 0), Error);
}

TEST_CASE("compress coding is modeled but not producible") {
  Bytes b = zeros(16);
  try {
    compress(b, Coding::compress, 5);
    FAIL("expected UnsupportedCoding");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnsupportedCoding);
  }
}

TEST_CASE("decompression respects the safety cap") {
  Bytes plain = zeros(2 * 1024 * 1024);
  Bytes packed = compress(plain, Coding::gzip, 9);
  CHECK_THROWS_AS(decompress(packed, Coding::gzip, 1024 * 1024), Error);
  try {
    decompress(packed, Coding::br, 1024);
    FAIL("expected a decode or cap error");
  } catch (const Error& e) {
    // Wrong stream type: must fail loudly, never emit garbage.
    CHECK((e.code() == Errc::DecodeError || e.code() == Errc::SafetyCapExceeded));
  }
}

TEST_CASE("bomb synthesis refuses to pass the cap") {
  try {
    make_bomb({128u * 1024 * 1024, '0'});
    FAIL("expected SafetyCapExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SafetyCapExceeded);
  }
  CHECK(make_bomb({1024, '0'}).size() == 1024);
}

TEST_CASE("bomb ratio grows with plaintext size") {
  double prev = 0.0;
  for (std::size_t n : {std::size_t(1024), std::size_t(1024 * 1024),
                        std::size_t(8 * 1024 * 1024)}) {
    Bytes plain = make_bomb({n, '0'});
    double ratio = static_cast<double>(n) /
                   compress(plain, Coding::gzip, 9).size();
    CHECK(ratio >= prev);
    prev = ratio;
  }
}

TEST_CASE("text corpus is deterministic and hits its ratio") {
  Bytes a = make_text_corpus({333000, 6.0}, 42);
  Bytes b = make_text_corpus({333000, 6.0}, 42);
  CHECK(a == b);
  Bytes c = make_text_corpus({333000, 6.0}, 43);
  CHECK(a != c);
  double ratio = static_cast<double>(a.size()) /
                 compress(a, Coding::gzip, 6).size();
  CHECK(ratio >= 4.5);
  CHECK(ratio <= 7.5);
}

TEST_CASE("text corpus covers a wide ratio range") {
  for (double target : {1.5, 3.0, 10.0, 20.0}) {
    Bytes body = make_text_corpus({120000, target}, 5);
    double ratio = static_cast<double>(body.size()) /
                   compress(body, Coding::gzip, 6).size();
    CHECK(ratio >= target * 0.75);
    CHECK(ratio <= target * 1.25);
  }
  CHECK_THROWS_AS(make_text_corpus({120000, 0.5}, 5), Error);
}
