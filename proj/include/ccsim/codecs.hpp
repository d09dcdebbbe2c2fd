// Content-coding backends: gzip/deflate via zlib, br via the system brotli
// runtime, plus the payload synthesizers (zero-fill bombs and a mixed text
// corpus tuned to a target gzip ratio).
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "ccsim/brotli_api.hpp"
#include "ccsim/errors.hpp"

namespace ccsim {

using Bytes = std::vector<std::uint8_t>;

// Default guard for every decompression path and for bomb synthesis.
inline constexpr std::size_t kDefaultSafetyCap = 64u * 1024 * 1024;

enum class Coding { identity, gzip, deflate, br, compress, other };

inline const char* coding_token(Coding c) {
  switch (c) {
    case Coding::identity: return "identity";
    case Coding::gzip: return "gzip";
    case Coding::deflate: return "deflate";
    case Coding::br: return "br";
    case Coding::compress: return "compress";
    case Coding::other: return "other";
  }
  return "other";
}

inline Coding coding_from_token(std::string_view token) {
  if (token == "identity") return Coding::identity;
  if (token == "gzip" || token == "x-gzip") return Coding::gzip;
  if (token == "deflate") return Coding::deflate;
  if (token == "br") return Coding::br;
  if (token == "compress" || token == "x-compress") return Coding::compress;
  return Coding::other;
}

// Gzip backend flavor. Tuned models optimized vendor zlib forks whose low
// levels behave like stock level 4 (with a distinct memLevel so probe-side
// size matching can still tell the two backends apart on text payloads).
enum class GzipBackend { standard, tuned };

namespace detail {

inline Bytes zlib_compress(const Bytes& plain, int level, int window_bits,
                           int mem_level) {
  if (level < 1 || level > 9)
    throw Error(Errc::InvalidLevel, "zlib level must be in [1,9], got " +
                                        std::to_string(level));
  z_stream strm{};
  if (deflateInit2(&strm, level, Z_DEFLATED, window_bits, mem_level,
                   Z_DEFAULT_STRATEGY) != Z_OK)
    throw Error(Errc::DecodeError, "deflateInit2 failed");
  Bytes out(deflateBound(&strm, static_cast<uLong>(plain.size())));
  strm.next_in = const_cast<Bytef*>(plain.data());
  strm.avail_in = static_cast<uInt>(plain.size());
  strm.next_out = out.data();
  strm.avail_out = static_cast<uInt>(out.size());
  int rc = deflate(&strm, Z_FINISH);
  deflateEnd(&strm);
  if (rc != Z_STREAM_END)
    throw Error(Errc::DecodeError, "deflate did not finish");
  out.resize(out.size() - strm.avail_out);
  return out;
}

inline Bytes zlib_decompress(const Bytes& data, int window_bits,
                             std::size_t cap) {
  z_stream strm{};
  if (inflateInit2(&strm, window_bits) != Z_OK)
    throw Error(Errc::DecodeError, "inflateInit2 failed");
  Bytes out;
  Bytes chunk(256 * 1024);
  strm.next_in = const_cast<Bytef*>(data.data());
  strm.avail_in = static_cast<uInt>(data.size());
  int rc = Z_OK;
  do {
    strm.next_out = chunk.data();
    strm.avail_out = static_cast<uInt>(chunk.size());
    rc = inflate(&strm, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&strm);
      throw Error(Errc::DecodeError,
                  "inflate failed with code " + std::to_string(rc));
    }
    std::size_t produced = chunk.size() - strm.avail_out;
    if (out.size() + produced > cap) {
      inflateEnd(&strm);
      throw Error(Errc::SafetyCapExceeded,
                  "inflated size passes cap of " + std::to_string(cap));
    }
    out.insert(out.end(), chunk.begin(), chunk.begin() + produced);
  } while (rc != Z_STREAM_END);
  inflateEnd(&strm);
  return out;
}

inline Bytes brotli_compress(const Bytes& plain, int level) {
  if (level < 0 || level > 11)
    throw Error(Errc::InvalidLevel, "brotli level must be in [0,11], got " +
                                        std::to_string(level));
  std::size_t encoded = BrotliEncoderMaxCompressedSize(plain.size());
  if (encoded == 0) encoded = plain.size() + 1024;
  Bytes out(encoded);
  if (!BrotliEncoderCompress(level, 22, CCSIM_BROTLI_MODE_GENERIC,
                             plain.size(), plain.data(), &encoded, out.data()))
    throw Error(Errc::DecodeError, "brotli encode failed");
  out.resize(encoded);
  return out;
}

inline Bytes brotli_decompress(const Bytes& data, std::size_t cap) {
  BrotliDecoderState* state =
      BrotliDecoderCreateInstance(nullptr, nullptr, nullptr);
  if (!state) throw Error(Errc::DecodeError, "brotli decoder alloc failed");
  Bytes out;
  Bytes chunk(256 * 1024);
  std::size_t avail_in = data.size();
  const std::uint8_t* next_in = data.data();
  ccsim_BrotliDecoderResult rc = CCSIM_BROTLI_DECODER_RESULT_NEEDS_MORE_OUTPUT;
  while (rc == CCSIM_BROTLI_DECODER_RESULT_NEEDS_MORE_OUTPUT) {
    std::size_t avail_out = chunk.size();
    std::uint8_t* next_out = chunk.data();
    rc = BrotliDecoderDecompressStream(state, &avail_in, &next_in, &avail_out,
                                       &next_out, nullptr);
    if (rc == CCSIM_BROTLI_DECODER_RESULT_ERROR) {
      BrotliDecoderDestroyInstance(state);
      throw Error(Errc::DecodeError, "brotli stream is malformed");
    }
    if (rc == CCSIM_BROTLI_DECODER_RESULT_NEEDS_MORE_INPUT) {
      BrotliDecoderDestroyInstance(state);
      throw Error(Errc::DecodeError, "brotli stream is truncated");
    }
    std::size_t produced = chunk.size() - avail_out;
    if (out.size() + produced > cap) {
      BrotliDecoderDestroyInstance(state);
      throw Error(Errc::SafetyCapExceeded,
                  "inflated size passes cap of " + std::to_string(cap));
    }
    out.insert(out.end(), chunk.begin(), chunk.begin() + produced);
  }
  BrotliDecoderDestroyInstance(state);
  return out;
}

}  // namespace detail

// Compresses with the given coding. gzip levels 1..9, br levels 0..11;
// "compress" (LZW) appears in Accept-Encoding tables but no modeled CDN can
// produce it, so the codec layer rejects it.
inline Bytes compress(const Bytes& plain, Coding coding, int level,
                      GzipBackend backend = GzipBackend::standard) {
  switch (coding) {
    case Coding::identity:
      return plain;
    case Coding::gzip:
      if (backend == GzipBackend::tuned && level >= 1 && level <= 3) {
        // Optimized vendor forks spend level-(L+3) effort at declared level
        // L; the distinct memLevel keeps their output separable from every
        // stock level when matching sizes probe-side.
        return detail::zlib_compress(plain, level + 3, 15 + 16, 9);
      }
      return detail::zlib_compress(plain, level, 15 + 16, 8);
    case Coding::deflate:
      return detail::zlib_compress(plain, level, 15, 8);
    case Coding::br:
      return detail::brotli_compress(plain, level);
    case Coding::compress:
    case Coding::other:
      throw Error(Errc::UnsupportedCoding,
                  std::string("cannot compress with coding '") +
                      coding_token(coding) + "'");
  }
  throw Error(Errc::UnsupportedCoding, "unknown coding");
}

inline Bytes decompress(const Bytes& data, Coding coding,
                        std::size_t cap = kDefaultSafetyCap) {
  switch (coding) {
    case Coding::identity:
      if (data.size() > cap)
        throw Error(Errc::SafetyCapExceeded, "identity body passes cap");
      return data;
    case Coding::gzip:
      return detail::zlib_decompress(data, 15 + 16, cap);
    case Coding::deflate:
      return detail::zlib_decompress(data, 15, cap);
    case Coding::br:
      return detail::brotli_decompress(data, cap);
    case Coding::compress:
    case Coding::other:
      throw Error(Errc::UnsupportedCoding,
                  std::string("cannot decompress coding '") +
                      coding_token(coding) + "'");
  }
  throw Error(Errc::UnsupportedCoding, "unknown coding");
}

// ---------------------------------------------------------------------------
// Payload synthesis

struct BombSpec {
  std::size_t plain_size = 1024 * 1024;
  std::uint8_t fill = '0';
};

// Zero-fill decompression bomb plaintext. The cap guards the synthesizer
// itself: refusing to materialize plaintexts above it.
inline Bytes make_bomb(const BombSpec& spec,
                       std::size_t cap = kDefaultSafetyCap) {
  if (spec.plain_size > cap)
    throw Error(Errc::SafetyCapExceeded,
                "bomb plaintext of " + std::to_string(spec.plain_size) +
                    " bytes passes cap of " + std::to_string(cap));
  return Bytes(spec.plain_size, spec.fill);
}

struct PayloadSpec {
  std::size_t plain_size = 333000;
  double target_gzip_ratio = 6.0;  // measured at gzip level 6
};

namespace detail {

// Fixed vocabulary for the text corpus. Word soup compresses around 3-4x;
// runs push the ratio up and random bytes pull it toward 1x.
inline const std::vector<std::string>& corpus_words() {
  static const std::vector<std::string> words = {
      "the",     "origin",  "server",   "request", "response", "header",
      "content", "cache",   "edge",     "client",  "forward",  "policy",
      "bytes",   "stream",  "network",  "traffic", "transfer", "encode",
      "accept",  "variant", "static",   "asset",   "bundle",   "deliver",
      "status",  "control", "upstream", "gateway", "latency",  "measure"};
  return words;
}

// mix < 0 blends random bytes into the word soup (lower ratio); mix > 0
// blends single-character runs (higher ratio).
inline Bytes corpus_candidate(std::size_t size, double mix,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> word_pick(
      0, corpus_words().size() - 1);
  std::uniform_int_distribution<int> byte_pick(0, 255);
  Bytes out;
  out.reserve(size + 16);
  while (out.size() < size) {
    double c = coin(rng);
    if (mix < 0.0 && c < -mix) {
      for (int i = 0; i < 8 && out.size() < size; ++i)
        out.push_back(static_cast<std::uint8_t>(byte_pick(rng)));
    } else if (mix > 0.0 && c < mix) {
      for (int i = 0; i < 48 && out.size() < size; ++i) out.push_back('a');
    } else {
      const std::string& w = corpus_words()[word_pick(rng)];
      out.insert(out.end(), w.begin(), w.end());
      if (out.size() < size) out.push_back(' ');
    }
  }
  out.resize(size);
  return out;
}

}  // namespace detail

// Deterministic text corpus whose gzip-level-6 ratio lands within 25% of the
// target. Bisects the run/random blend; throws RatioUnreachable when the
// target is outside what the blend can produce.
inline Bytes make_text_corpus(const PayloadSpec& spec, std::uint64_t seed) {
  if (spec.plain_size == 0)
    throw Error(Errc::ConfigError, "corpus size must be positive");
  if (spec.target_gzip_ratio < 1.05 || spec.target_gzip_ratio > 400.0)
    throw Error(Errc::RatioUnreachable,
                "target gzip ratio outside supported range [1.05, 400]");
  auto ratio_of = [&](const Bytes& b) {
    Bytes c = compress(b, Coding::gzip, 6);
    return static_cast<double>(b.size()) / static_cast<double>(c.size());
  };
  double lo = -1.0, hi = 1.0;
  Bytes best;
  double best_err = 1e300;
  for (int iter = 0; iter < 42; ++iter) {
    double mid = (lo + hi) / 2.0;
    Bytes cand = detail::corpus_candidate(spec.plain_size, mid, seed);
    double r = ratio_of(cand);
    double err = std::abs(r - spec.target_gzip_ratio);
    if (err < best_err) {
      best_err = err;
      best = std::move(cand);
    }
    if (best_err / spec.target_gzip_ratio <= 0.02) break;
    if (r < spec.target_gzip_ratio)
      lo = mid;  // need more runs
    else
      hi = mid;
  }
  if (best_err / spec.target_gzip_ratio > 0.25)
    throw Error(Errc::RatioUnreachable,
                "could not approach gzip ratio " +
                    std::to_string(spec.target_gzip_ratio));
  return best;
}

}  // namespace ccsim
