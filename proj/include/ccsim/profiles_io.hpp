// Versioned text format for CDN profile sets. Round-trip stable: parsing the
// serializer's output reproduces the profiles exactly, and unknown or
// malformed input fails with the offending line number.
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ccsim/errors.hpp"
#include "ccsim/policy.hpp"

namespace ccsim {

inline constexpr const char* kProfilesFormatHeader = "ccsim-profiles v1";

namespace detail {

inline std::string trim_copy(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r'))
    s.remove_suffix(1);
  return std::string(s);
}

[[noreturn]] inline void format_error(std::size_t line, const std::string& msg) {
  throw Error(Errc::ConfigError, "line " + std::to_string(line) + ": " + msg);
}

inline bool parse_bool_value(const std::string& v, std::size_t line) {
  if (v == "true") return true;
  if (v == "false") return false;
  format_error(line, "expected true/false, got '" + v + "'");
}

inline int parse_int_value(const std::string& v, std::size_t line) {
  try {
    std::size_t used = 0;
    int out = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    format_error(line, "expected an integer, got '" + v + "'");
  }
}

inline Coding coding_key_from(const std::string& s, std::size_t line) {
  Coding c = coding_from_token(s);
  if (c == Coding::other || s == "x-gzip" || s == "x-compress")
    format_error(line, "unknown coding '" + s + "'");
  return c;
}

}  // namespace detail

inline std::string serialize_profiles(
    const std::vector<CdnProfile>& profiles) {
  static constexpr Coding kOrder[] = {Coding::gzip, Coding::compress,
                                      Coding::deflate, Coding::br,
                                      Coding::identity};
  std::string out = kProfilesFormatHeader;
  out += "\n";
  for (const CdnProfile& p : profiles) {
    out += "\n[profile]\n";
    out += "name = " + p.name + "\n";
    for (Coding c : kOrder) {
      auto it = p.policy.rules.find(c);
      if (it == p.policy.rules.end()) continue;
      out += std::string("policy.") + coding_token(c) + " = ";
      switch (it->second.action) {
        case ForwardAction::keep: out += "keep"; break;
        case ForwardAction::drop: out += "drop"; break;
        case ForwardAction::replace:
          out += "replace " + it->second.replacement;
          break;
      }
      out += "\n";
    }
    for (Coding c : kOrder) {
      auto it = p.edge.levels.find(c);
      if (it == p.edge.levels.end()) continue;
      out += std::string("edge.") + coding_token(c) + " = " +
             std::to_string(it->second) + "\n";
    }
    auto flag = [&](const char* key, bool v) {
      out += std::string("flags.") + key + " = " + (v ? "true" : "false") +
             "\n";
    };
    flag("decompresses_gzip_for_identity", p.decompresses_gzip_for_identity);
    flag("converts_between_codings", p.converts_between_codings);
    flag("decompresses_for_unservable_client",
         p.decompresses_for_unservable_client);
    flag("emits_cdn_identity_header", p.emits_cdn_identity_header);
    flag("compresses_upstream_cdn_responses",
         p.compresses_upstream_cdn_responses);
    flag("allows_customer_header_deletion",
         p.allows_customer_header_deletion);
    out += std::string("gzip_backend = ") +
           (p.gzip_backend == GzipBackend::tuned ? "tuned" : "standard") +
           "\n";
    out += "response_header_bytes = " +
           std::to_string(p.response_header_bytes) + "\n";
  }
  return out;
}

inline std::vector<CdnProfile> parse_profiles(const std::string& text) {
  std::vector<CdnProfile> out;
  CdnProfile* current = nullptr;
  bool saw_header = false;

  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = detail::trim_copy(
        std::string_view(text).substr(pos, eol - pos));
    ++line_no;
    pos = eol + 1;
    if (line.empty() || line.front() == '#') {
      if (pos > text.size()) break;
      continue;
    }
    if (!saw_header) {
      if (line != kProfilesFormatHeader)
        detail::format_error(line_no, std::string("expected '") +
                                          kProfilesFormatHeader + "', got '" +
                                          line + "'");
      saw_header = true;
      continue;
    }
    if (line == "[profile]") {
      out.emplace_back();
      current = &out.back();
      continue;
    }
    if (!current)
      detail::format_error(line_no, "key before the first [profile] section");
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      detail::format_error(line_no, "expected 'key = value', got '" + line +
                                        "'");
    std::string key = detail::trim_copy(std::string_view(line).substr(0, eq));
    std::string value = detail::trim_copy(std::string_view(line).substr(eq + 1));

    if (key == "name") {
      current->name = value;
    } else if (key.rfind("policy.", 0) == 0) {
      Coding c = detail::coding_key_from(key.substr(7), line_no);
      PolicyRule rule;
      if (value == "keep") {
        rule.action = ForwardAction::keep;
      } else if (value == "drop") {
        rule.action = ForwardAction::drop;
      } else if (value.rfind("replace ", 0) == 0) {
        rule.action = ForwardAction::replace;
        rule.replacement = detail::trim_copy(std::string_view(value).substr(8));
        if (rule.replacement.empty())
          detail::format_error(line_no, "replace needs a replacement set");
      } else {
        detail::format_error(line_no,
                             "expected keep/drop/replace <set>, got '" +
                                 value + "'");
      }
      current->policy.rules[c] = rule;
    } else if (key.rfind("edge.", 0) == 0) {
      Coding c = detail::coding_key_from(key.substr(5), line_no);
      current->edge.levels[c] = detail::parse_int_value(value, line_no);
    } else if (key == "flags.decompresses_gzip_for_identity") {
      current->decompresses_gzip_for_identity =
          detail::parse_bool_value(value, line_no);
    } else if (key == "flags.converts_between_codings") {
      current->converts_between_codings =
          detail::parse_bool_value(value, line_no);
    } else if (key == "flags.decompresses_for_unservable_client") {
      current->decompresses_for_unservable_client =
          detail::parse_bool_value(value, line_no);
    } else if (key == "flags.emits_cdn_identity_header") {
      current->emits_cdn_identity_header =
          detail::parse_bool_value(value, line_no);
    } else if (key == "flags.compresses_upstream_cdn_responses") {
      current->compresses_upstream_cdn_responses =
          detail::parse_bool_value(value, line_no);
    } else if (key == "flags.allows_customer_header_deletion") {
      current->allows_customer_header_deletion =
          detail::parse_bool_value(value, line_no);
    } else if (key == "gzip_backend") {
      if (value == "standard")
        current->gzip_backend = GzipBackend::standard;
      else if (value == "tuned")
        current->gzip_backend = GzipBackend::tuned;
      else
        detail::format_error(line_no, "expected standard/tuned, got '" +
                                          value + "'");
    } else if (key == "response_header_bytes") {
      int v = detail::parse_int_value(value, line_no);
      if (v < 64)
        detail::format_error(line_no, "response_header_bytes too small");
      current->response_header_bytes = static_cast<std::size_t>(v);
    } else {
      detail::format_error(line_no, "unknown key '" + key + "'");
    }
  }
  if (!saw_header)
    throw Error(Errc::ConfigError,
                std::string("missing '") + kProfilesFormatHeader + "' header");
  for (const CdnProfile& p : out)
    if (p.name.empty())
      throw Error(Errc::ConfigError, "a [profile] section lacks a name");
  return out;
}

}  // namespace ccsim
