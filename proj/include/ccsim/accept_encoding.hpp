// Accept-Encoding parsing, canonical serialization, and preference order.
// Absence of the header is distinct from "identity" and is represented by
// std::optional<AcceptEncoding> being empty at call sites.
#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ccsim/codecs.hpp"
#include "ccsim/errors.hpp"

namespace ccsim {

struct AeEntry {
  Coding coding = Coding::other;
  std::string token;       // original token, lowercased
  int q_milli = 1000;      // qvalue scaled by 1000; header order preserved
  bool explicit_q = false;
};

struct AcceptEncoding {
  std::vector<AeEntry> entries;

  bool operator==(const AcceptEncoding&) const = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

inline int parse_q_milli(std::string_view v) {
  // Accepts 0, 1, 0.5, .5, 1.000 and clamps to [0, 1000].
  double q = 1.0;
  try {
    q = std::stod(std::string(v));
  } catch (...) {
    return 1000;
  }
  if (q < 0) q = 0;
  if (q > 1) q = 1;
  return static_cast<int>(q * 1000.0 + 0.5);
}

}  // namespace detail

// Parses a header value like "gzip, br;q=0.8". Empty string parses to an
// empty entry list (present-but-empty header, not absence).
inline AcceptEncoding parse_accept_encoding(std::string_view value) {
  AcceptEncoding ae;
  std::size_t start = 0;
  while (start <= value.size()) {
    std::size_t comma = value.find(',', start);
    std::string_view item = value.substr(
        start, comma == std::string_view::npos ? std::string_view::npos
                                               : comma - start);
    item = detail::trim(item);
    if (!item.empty()) {
      AeEntry entry;
      std::size_t semi = item.find(';');
      std::string_view token_part =
          detail::trim(item.substr(0, semi == std::string_view::npos
                                          ? std::string_view::npos
                                          : semi));
      entry.token = detail::lower(token_part);
      entry.coding = coding_from_token(entry.token);
      while (semi != std::string_view::npos) {
        std::size_t next = item.find(';', semi + 1);
        std::string_view param = detail::trim(item.substr(
            semi + 1,
            next == std::string_view::npos ? std::string_view::npos
                                           : next - semi - 1));
        if (param.size() >= 2 &&
            (param[0] == 'q' || param[0] == 'Q') && param[1] == '=') {
          entry.q_milli = detail::parse_q_milli(param.substr(2));
          entry.explicit_q = true;
        }
        semi = next;
      }
      ae.entries.push_back(std::move(entry));
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return ae;
}

// Canonical text: tokens joined by ", ", explicit q kept with trimmed
// trailing zeros. Round-trips through parse_accept_encoding.
inline std::string serialize_accept_encoding(const AcceptEncoding& ae) {
  std::string out;
  for (const AeEntry& e : ae.entries) {
    if (!out.empty()) out += ", ";
    out += e.token;
    if (e.explicit_q && e.q_milli != 1000) {
      double q = e.q_milli / 1000.0;
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%.3f", q);
      std::string qs(buf);
      while (qs.back() == '0') qs.pop_back();
      if (qs.back() == '.') qs.pop_back();
      out += ";q=" + qs;
    }
  }
  return out;
}

// Modern-preference rank used to break q ties: brotli beats gzip beats the
// legacy codings, mirroring how served encodings are chosen in practice.
inline int coding_rank(Coding c) {
  switch (c) {
    case Coding::br: return 5;
    case Coding::gzip: return 4;
    case Coding::deflate: return 3;
    case Coding::compress: return 2;
    case Coding::identity: return 1;
    case Coding::other: return 0;
  }
  return 0;
}

// Entries stably sorted by descending q; q ties resolved by coding rank,
// remaining ties keep header order.
inline std::vector<AeEntry> by_preference(const AcceptEncoding& ae) {
  std::vector<AeEntry> sorted = ae.entries;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const AeEntry& a, const AeEntry& b) {
                     if (a.q_milli != b.q_milli) return a.q_milli > b.q_milli;
                     return coding_rank(a.coding) > coding_rank(b.coding);
                   });
  return sorted;
}

// The coding a forwarding policy keys on: first entry after the stable sort,
// i.e. the client's most-preferred coding. Empty lists key on identity.
inline Coding primary_coding(const AcceptEncoding& ae) {
  auto sorted = by_preference(ae);
  if (sorted.empty() || sorted.front().q_milli == 0) return Coding::identity;
  return sorted.front().coding;
}

// True when the request gives the server no compressed coding to use:
// header absent, empty, identity-only, or everything at q=0.
inline bool identity_only(const std::optional<AcceptEncoding>& ae) {
  if (!ae.has_value()) return true;
  for (const AeEntry& e : ae->entries) {
    if (e.q_milli > 0 && e.coding != Coding::identity &&
        e.coding != Coding::other)
      return false;
  }
  return true;
}

// Compressed codings the client will take, most preferred first.
inline std::vector<Coding> acceptable_codings(const AcceptEncoding& ae) {
  std::vector<Coding> out;
  for (const AeEntry& e : by_preference(ae)) {
    if (e.q_milli == 0) continue;
    if (e.coding == Coding::identity || e.coding == Coding::other) continue;
    if (std::find(out.begin(), out.end(), e.coding) == out.end())
      out.push_back(e.coding);
  }
  return out;
}

}  // namespace ccsim
