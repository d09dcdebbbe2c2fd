// Versioned text format for scenario descriptions, with line-anchored
// diagnostics for every malformed field.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ccsim/errors.hpp"
#include "ccsim/profiles_io.hpp"  // detail::trim / format_error / parsers
#include "ccsim/simulate.hpp"

namespace ccsim {

inline constexpr const char* kScenarioFormatHeader = "ccsim-scenario v1";

inline std::string serialize_scenario(const Scenario& s) {
  std::string out = kScenarioFormatHeader;
  out += "\n";
  out += std::string("kind = ") + attack_kind_name(s.kind) + "\n";
  out += "ucdn = " + s.ucdn + "\n";
  if (!s.ocdn.empty()) out += "ocdn = " + s.ocdn + "\n";
  out += "client_ae = " +
         (s.client_ae.has_value() ? *s.client_ae : std::string("absent")) +
         "\n";
  if (s.payload.kind == Payload::Kind::bomb) {
    out += "payload = bomb " + std::to_string(s.payload.plain_size) + "\n";
  } else {
    char ratio[32];
    std::snprintf(ratio, sizeof ratio, "%g", s.payload.target_ratio);
    out += "payload = corpus " + std::to_string(s.payload.plain_size) + " " +
           ratio + "\n";
  }
  out += "repetitions = " + std::to_string(s.repetitions) + "\n";
  out += std::string("cache_bypass = ") +
         (s.cache_bypass ? "true" : "false") + "\n";
  if (s.overhead.kind == OverheadModel::Kind::http_only) {
    out += "overhead = http\n";
  } else {
    out += "overhead = packet " + std::to_string(s.overhead.mss) + " " +
           std::to_string(s.overhead.per_packet) + "\n";
  }
  if (!s.mitigations.empty()) {
    out += "mitigations =";
    bool first = true;
    for (Mitigation m : s.mitigations) {
      out += first ? " " : ", ";
      out += mitigation_name(m);
      first = false;
    }
    out += "\n";
  }
  if (s.customer_deletes_ae) out += "customer_deletes_ae = true\n";
  out += "seed = " + std::to_string(s.seed) + "\n";
  out += "safety_cap = " + std::to_string(s.safety_cap) + "\n";
  return out;
}

inline Scenario parse_scenario(const std::string& text) {
  Scenario s;
  s.client_ae = "gzip";
  bool saw_header = false;

  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line =
        detail::trim_copy(std::string_view(text).substr(pos, eol - pos));
    ++line_no;
    pos = eol + 1;
    if (line.empty() || line.front() == '#') {
      if (pos > text.size()) break;
      continue;
    }
    if (!saw_header) {
      if (line != kScenarioFormatHeader)
        detail::format_error(line_no, std::string("expected '") +
                                          kScenarioFormatHeader + "', got '" +
                                          line + "'");
      saw_header = true;
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      detail::format_error(line_no,
                           "expected 'key = value', got '" + line + "'");
    std::string key = detail::trim_copy(std::string_view(line).substr(0, eq));
    std::string value = detail::trim_copy(std::string_view(line).substr(eq + 1));

    if (key == "kind") {
      try {
        s.kind = attack_kind_from(value);
      } catch (const Error&) {
        detail::format_error(line_no, "unknown scenario kind '" + value + "'");
      }
    } else if (key == "ucdn") {
      s.ucdn = value;
    } else if (key == "ocdn") {
      s.ocdn = value;
    } else if (key == "client_ae") {
      if (value == "absent")
        s.client_ae = std::nullopt;
      else
        s.client_ae = value;
    } else if (key == "payload") {
      std::size_t sp = value.find(' ');
      std::string kind = value.substr(0, sp);
      std::string rest =
          sp == std::string::npos
              ? std::string()
              : detail::trim_copy(std::string_view(value).substr(sp + 1));
      if (kind == "bomb") {
        s.payload.kind = Payload::Kind::bomb;
        if (!rest.empty())
          s.payload.plain_size = static_cast<std::size_t>(
              detail::parse_int_value(rest, line_no));
      } else if (kind == "corpus") {
        s.payload.kind = Payload::Kind::corpus;
        std::size_t sp2 = rest.find(' ');
        std::string size_str = rest.substr(0, sp2);
        if (!size_str.empty())
          s.payload.plain_size = static_cast<std::size_t>(
              detail::parse_int_value(size_str, line_no));
        if (sp2 != std::string::npos) {
          std::string ratio_str =
              detail::trim_copy(std::string_view(rest).substr(sp2 + 1));
          try {
            std::size_t used = 0;
            s.payload.target_ratio = std::stod(ratio_str, &used);
            if (used != ratio_str.size())
              throw std::invalid_argument(ratio_str);
          } catch (const std::exception&) {
            detail::format_error(
                line_no, "expected a ratio, got '" + ratio_str + "'");
          }
        }
      } else {
        detail::format_error(line_no,
                             "expected 'bomb <size>' or 'corpus <size> "
                             "<ratio>', got '" +
                                 value + "'");
      }
    } else if (key == "repetitions") {
      s.repetitions = detail::parse_int_value(value, line_no);
    } else if (key == "cache_bypass") {
      s.cache_bypass = detail::parse_bool_value(value, line_no);
    } else if (key == "overhead") {
      if (value == "http") {
        s.overhead = http_only_overhead();
      } else if (value.rfind("packet", 0) == 0) {
        std::string rest =
            detail::trim_copy(std::string_view(value).substr(6));
        s.overhead = packetized_overhead();
        if (!rest.empty()) {
          std::size_t sp = rest.find(' ');
          if (sp == std::string::npos)
            detail::format_error(line_no,
                                 "expected 'packet <mss> <per_packet>'");
          int mss = detail::parse_int_value(rest.substr(0, sp), line_no);
          int per = detail::parse_int_value(
              detail::trim_copy(std::string_view(rest).substr(sp + 1)), line_no);
          if (mss < 1 || per < 0)
            detail::format_error(line_no, "overhead values out of range");
          s.overhead = packetized_overhead(static_cast<std::size_t>(mss),
                                           static_cast<std::size_t>(per));
        }
      } else {
        detail::format_error(
            line_no,
            "expected 'http' or 'packet <mss> <per_packet>', got '" + value +
                "'");
      }
    } else if (key == "mitigations") {
      std::size_t p = 0;
      while (p < value.size()) {
        std::size_t comma = value.find(',', p);
        if (comma == std::string::npos) comma = value.size();
        std::string item =
            detail::trim_copy(std::string_view(value).substr(p, comma - p));
        if (!item.empty()) {
          try {
            s.mitigations.insert(mitigation_from(item));
          } catch (const Error&) {
            detail::format_error(line_no,
                                 "unknown mitigation '" + item + "'");
          }
        }
        p = comma + 1;
      }
    } else if (key == "customer_deletes_ae") {
      s.customer_deletes_ae = detail::parse_bool_value(value, line_no);
    } else if (key == "seed") {
      try {
        s.seed = std::stoull(value);
      } catch (const std::exception&) {
        detail::format_error(line_no, "expected a seed, got '" + value + "'");
      }
    } else if (key == "safety_cap") {
      try {
        s.safety_cap = std::stoull(value);
      } catch (const std::exception&) {
        detail::format_error(line_no, "expected a size, got '" + value + "'");
      }
    } else {
      detail::format_error(line_no, "unknown key '" + key + "'");
    }
  }
  if (!saw_header)
    throw Error(Errc::ConfigError,
                std::string("missing '") + kScenarioFormatHeader + "' header");
  return s;
}

}  // namespace ccsim
