// Rendering of simulation and probe results: aligned tables for humans, a
// fixed-header CSV for spreadsheets, and byte-stable JSON for machines.
#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"

#include "ccsim/probe.hpp"
#include "ccsim/simulate.hpp"

namespace ccsim {

inline constexpr const char* kReportCsvHeader =
    "scenario,ucdn,ocdn,case,client_link_bytes,upstream_link_bytes,factor";

namespace detail {

inline std::string factor_str(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", f);
  return buf;
}

inline void append_padded(std::string& out, const std::string& s,
                          std::size_t width, bool right_align) {
  if (!right_align) out += s;
  if (s.size() < width) out.append(width - s.size(), ' ');
  if (right_align) out += s;
}

}  // namespace detail

inline std::string report_csv(const std::vector<AmplificationReport>& rows) {
  std::string out = kReportCsvHeader;
  out += "\n";
  for (const AmplificationReport& r : rows) {
    out += attack_kind_name(r.kind);
    out += ',';
    out += r.ucdn;
    out += ',';
    out += r.ocdn;
    out += ',';
    out += r.case_label;
    out += ',';
    out += std::to_string(r.client_link_bytes);
    out += ',';
    out += std::to_string(r.upstream_link_bytes);
    out += ',';
    out += detail::factor_str(r.factor);
    out += '\n';
  }
  return out;
}

inline std::string report_table(const std::vector<AmplificationReport>& rows) {
  static const char* kNames[] = {"scenario", "ucdn",     "ocdn",  "case",
                                 "client",   "upstream", "factor"};
  std::vector<std::vector<std::string>> cells;
  cells.emplace_back(std::begin(kNames), std::end(kNames));
  for (const AmplificationReport& r : rows) {
    cells.push_back({attack_kind_name(r.kind), r.ucdn,
                     r.ocdn.empty() ? "-" : r.ocdn, r.case_label,
                     std::to_string(r.client_link_bytes),
                     std::to_string(r.upstream_link_bytes),
                     detail::factor_str(r.factor)});
  }
  std::size_t widths[7] = {0};
  for (const auto& row : cells)
    for (std::size_t i = 0; i < 7; ++i)
      widths[i] = std::max(widths[i], row[i].size());
  std::string out;
  for (std::size_t ri = 0; ri < cells.size(); ++ri) {
    for (std::size_t i = 0; i < 7; ++i) {
      if (i) out += "  ";
      detail::append_padded(out, cells[ri][i], widths[i], i >= 4);
    }
    out += '\n';
    if (ri == 0) {
      std::string rule;
      for (std::size_t i = 0; i < 7; ++i) {
        if (i) rule += "  ";
        rule.append(widths[i], '-');
      }
      out += rule;
      out += '\n';
    }
  }
  return out;
}

namespace detail {

inline nlohmann::ordered_json report_to_json(const AmplificationReport& r) {
  nlohmann::ordered_json j;
  j["scenario"] = attack_kind_name(r.kind);
  j["ucdn"] = r.ucdn;
  j["ocdn"] = r.ocdn;
  j["case"] = r.case_label;
  j["client_link_bytes"] = r.client_link_bytes;
  j["upstream_link_bytes"] = r.upstream_link_bytes;
  j["factor"] = factor_str(r.factor);
  return j;
}

}  // namespace detail

inline std::string report_json(
    const std::vector<AmplificationReport>& rows,
    const std::vector<SkippedCombo>* skipped = nullptr) {
  nlohmann::ordered_json j;
  j["rows"] = nlohmann::ordered_json::array();
  for (const AmplificationReport& r : rows)
    j["rows"].push_back(detail::report_to_json(r));
  if (skipped) {
    j["skipped"] = nlohmann::ordered_json::array();
    for (const SkippedCombo& s : *skipped) {
      nlohmann::ordered_json e;
      e["scenario"] = attack_kind_name(s.kind);
      e["ucdn"] = s.ucdn;
      e["ocdn"] = s.ocdn;
      e["case"] = s.case_label;
      e["reason"] = s.reason;
      j["skipped"].push_back(e);
    }
  }
  return j.dump(2) + "\n";
}

// Full single-run detail: the per-link ledger, decisions, cache counters.
inline std::string simulation_table(const SimulationResult& r) {
  std::string out;
  out += "scenario: ";
  out += attack_kind_name(r.scenario.kind);
  out += "  chain: client";
  out += " -> " + r.scenario.ucdn;
  if (!r.scenario.ocdn.empty()) out += " -> " + r.scenario.ocdn;
  out += " -> origin\n";
  out += "case: " + r.report.case_label;
  out += "  repetitions: " + std::to_string(r.scenario.repetitions);
  out += r.scenario.cache_bypass ? "  cache_bypass: on" : "  cache_bypass: off";
  out += "\n\n";
  std::size_t name_w = 4;
  for (const LinkStats& l : r.ledger.links)
    name_w = std::max(name_w, l.name.size());
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-*s  %14s  %14s  %14s  %9s\n",
                static_cast<int>(name_w), "link", "request_bytes",
                "response_bytes", "total_bytes", "exchanges");
  out += buf;
  for (const LinkStats& l : r.ledger.links) {
    std::snprintf(buf, sizeof buf, "%-*s  %14zu  %14zu  %14zu  %9zu\n",
                  static_cast<int>(name_w), l.name.c_str(), l.request_bytes,
                  l.response_bytes, l.total(), l.exchanges);
    out += buf;
  }
  out += "\ndecisions:\n";
  for (const auto& [node, d] : r.decisions) {
    out += "  " + node + ": ";
    out += action_name(d.action);
    if (d.action != NodeDecision::Action::pass_through) {
      out += std::string(" ") + coding_token(d.source) + " -> " +
             coding_token(d.target);
      if (d.level > 0) out += " (level " + std::to_string(d.level) + ")";
    }
    out += " [" + d.reason + "]\n";
  }
  std::snprintf(buf, sizeof buf,
                "\nfront cache: hits=%zu misses=%zu stores=%zu\n",
                r.cache_front.hits, r.cache_front.misses, r.cache_front.stores);
  out += buf;
  std::snprintf(buf, sizeof buf,
                "amplification: %zu / %zu = %.2f (client<->%s vs %s)\n",
                r.report.upstream_link_bytes, r.report.client_link_bytes,
                r.report.factor, r.scenario.ucdn.c_str(),
                r.ledger.links[1].name.c_str());
  out += buf;
  return out;
}

inline std::string simulation_json(const SimulationResult& r) {
  nlohmann::ordered_json j;
  j["scenario"] = attack_kind_name(r.scenario.kind);
  j["ucdn"] = r.scenario.ucdn;
  j["ocdn"] = r.scenario.ocdn;
  j["case"] = r.report.case_label;
  j["repetitions"] = r.scenario.repetitions;
  j["cache_bypass"] = r.scenario.cache_bypass;
  j["links"] = nlohmann::ordered_json::array();
  for (const LinkStats& l : r.ledger.links) {
    nlohmann::ordered_json e;
    e["name"] = l.name;
    e["request_bytes"] = l.request_bytes;
    e["response_bytes"] = l.response_bytes;
    e["total_bytes"] = l.total();
    e["exchanges"] = l.exchanges;
    j["links"].push_back(e);
  }
  j["decisions"] = nlohmann::ordered_json::array();
  for (const auto& [node, d] : r.decisions) {
    nlohmann::ordered_json e;
    e["node"] = node;
    e["action"] = action_name(d.action);
    e["source"] = coding_token(d.source);
    e["target"] = coding_token(d.target);
    e["level"] = d.level;
    e["reason"] = d.reason;
    j["decisions"].push_back(e);
  }
  j["front_cache"] = {{"hits", r.cache_front.hits},
                      {"misses", r.cache_front.misses},
                      {"stores", r.cache_front.stores}};
  j["client_link_bytes"] = r.report.client_link_bytes;
  j["upstream_link_bytes"] = r.report.upstream_link_bytes;
  j["factor"] = detail::factor_str(r.report.factor);
  return j.dump(2) + "\n";
}

inline std::string classification_table(const EndpointClassification& c) {
  std::string out;
  out += std::string("policy_class: ") + policy_class_name(c.policy_class) +
         "\n";
  out += "forwarding:\n";
  for (const CodingProbeResult& r : c.coding_results) {
    out += std::string("  ") + coding_token(r.sent) + ": " + r.action;
    out += "\n";
  }
  out += "forwarded_when_absent: " +
         c.forwarded_when_absent.value_or("(nothing)") + "\n";
  out += "edge:\n";
  if (c.edge_levels.empty()) out += "  (no compression observed)\n";
  for (const LevelEstimate& e : c.edge_levels) {
    out += std::string("  ") + coding_token(e.coding) + ": level " +
           std::to_string(e.level);
    if (e.coding == Coding::gzip)
      out += std::string(", ") +
             (e.backend == GzipBackend::tuned ? "tuned" : "standard") +
             " backend";
    out += " (" + e.confidence + ", observed " +
           std::to_string(e.observed_size) + " bytes)\n";
  }
  out += std::string("decompresses_gzip_for_identity: ") +
         (c.decompresses_gzip_for_identity ? "true" : "false") + "\n";
  out += std::string("supports_br_decompression: ") +
         (c.supports_br_decompression ? "true" : "false") + "\n";
  out += std::string("vary_handling: ") + (c.vary_ok ? "ok" : "broken") + "\n";
  out += "requests_used: " + std::to_string(c.requests_used) + "\n";
  return out;
}

inline std::string classification_json(const EndpointClassification& c) {
  nlohmann::ordered_json j;
  j["policy_class"] = policy_class_name(c.policy_class);
  j["forwarding"] = nlohmann::ordered_json::array();
  for (const CodingProbeResult& r : c.coding_results) {
    nlohmann::ordered_json e;
    e["sent"] = coding_token(r.sent);
    if (r.forwarded.has_value())
      e["forwarded"] = *r.forwarded;
    else
      e["forwarded"] = nullptr;
    e["action"] = r.action;
    j["forwarding"].push_back(e);
  }
  if (c.forwarded_when_absent.has_value())
    j["forwarded_when_absent"] = *c.forwarded_when_absent;
  else
    j["forwarded_when_absent"] = nullptr;
  j["edge"] = nlohmann::ordered_json::array();
  for (const LevelEstimate& e : c.edge_levels) {
    nlohmann::ordered_json o;
    o["coding"] = coding_token(e.coding);
    o["level"] = e.level;
    if (e.coding == Coding::gzip)
      o["backend"] = e.backend == GzipBackend::tuned ? "tuned" : "standard";
    o["confidence"] = e.confidence;
    o["observed_size"] = e.observed_size;
    j["edge"].push_back(o);
  }
  j["decompresses_gzip_for_identity"] = c.decompresses_gzip_for_identity;
  j["supports_br_decompression"] = c.supports_br_decompression;
  j["vary_ok"] = c.vary_ok;
  j["requests_used"] = c.requests_used;
  return j.dump(2) + "\n";
}

}  // namespace ccsim
