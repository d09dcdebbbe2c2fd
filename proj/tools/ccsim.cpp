// ccsim: deterministic simulator and live-probe toolkit for CDN
// compression-format-conversion amplification.
//
// Subcommands:
//   simulate   run one attack chain and print its traffic ledger
//   matrix     sweep attack kinds across all builtin CDN profiles
//   probe      classify an endpoint's forwarding/compression behavior
//   profiles   print or validate profile sets in the ccsim-profiles format
//
// Exit codes: 0 success, 2 configuration error, 3 probe refused without the
// ethics acknowledgement, 4 probe transport failure.
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ccsim/loopback.hpp"
#include "ccsim/probe.hpp"
#include "ccsim/profiles_io.hpp"
#include "ccsim/report_io.hpp"
#include "ccsim/scenario_io.hpp"
#include "ccsim/simulate.hpp"

namespace {

using namespace ccsim;

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw Error(Errc::ConfigError, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return 0;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) {
    std::fprintf(stderr, "error: cannot open '%s' for writing\n",
                 out_path.c_str());
    return 2;
  }
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  return 0;
}

OverheadModel parse_overhead_flag(const std::string& v) {
  if (v == "http") return http_only_overhead();
  if (v == "packet") return packetized_overhead();
  if (v.rfind("packet:", 0) == 0) {
    std::string rest = v.substr(7);
    std::size_t colon = rest.find(':');
    if (colon == std::string::npos)
      throw Error(Errc::ConfigError,
                  "overhead syntax: http | packet | packet:<mss>:<bytes>");
    try {
      std::size_t mss = std::stoull(rest.substr(0, colon));
      std::size_t per = std::stoull(rest.substr(colon + 1));
      return packetized_overhead(mss, per);
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw Error(Errc::ConfigError, "bad overhead numbers in '" + v + "'");
    }
  }
  throw Error(Errc::ConfigError,
              "overhead syntax: http | packet | packet:<mss>:<bytes>");
}

int run_guarded(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code() == Errc::ProbeTransportError ? 4 : 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
}

struct ScenarioFlags {
  std::string scenario_file;
  std::string kind = "cccf";
  std::string ucdn;
  std::string ocdn;
  std::string client_ae = "gzip";
  std::string payload = "bomb";
  std::size_t size = 1024 * 1024;
  double ratio = 6.0;
  int repetitions = 1;
  bool no_cache_bypass = false;
  std::string overhead = "packet";
  std::vector<std::string> mitigations;
  bool customer_deletes_ae = false;
  std::uint64_t seed = 1;
  std::size_t max_bomb_size = kDefaultSafetyCap;
};

void add_scenario_flags(CLI::App* cmd, ScenarioFlags& f, bool with_file) {
  if (with_file)
    cmd->add_option("--scenario", f.scenario_file,
                    "Scenario file (ccsim-scenario v1); inline flags below "
                    "override its fields");
  cmd->add_option("--kind", f.kind, "Attack kind: cccf | ccuf1 | ccuf2");
  cmd->add_option("--ucdn", f.ucdn, "Client-facing CDN profile name");
  cmd->add_option("--ocdn", f.ocdn, "Origin-facing CDN (ccuf kinds only)");
  cmd->add_option("--client-ae", f.client_ae,
                  "Client Accept-Encoding header, or 'absent'");
  cmd->add_option("--payload", f.payload, "Payload kind: bomb | corpus");
  cmd->add_option("--size", f.size, "Payload plaintext size in bytes");
  cmd->add_option("--ratio", f.ratio,
                  "Target gzip-level-6 ratio for corpus payloads");
  cmd->add_option("--repetitions", f.repetitions, "Requests to send");
  cmd->add_flag("--no-cache-bypass", f.no_cache_bypass,
                "Reuse one cache key instead of per-request bypass tokens");
  cmd->add_option("--overhead", f.overhead,
                  "Link overhead: http | packet | packet:<mss>:<bytes>");
  cmd->add_option("--mitigate", f.mitigations,
                  "Mitigation (repeatable): origin_dual_codec | "
                  "ucdn_laziness | ocdn_no_convert");
  cmd->add_flag("--customer-deletes-ae", f.customer_deletes_ae,
                "Customer config strips Accept-Encoding at the back CDN");
  cmd->add_option("--seed", f.seed, "Deterministic seed");
  cmd->add_option("--max-bomb-size", f.max_bomb_size,
                  "Safety cap for decompressed payloads, bytes");
}

Scenario scenario_from_flags(const CLI::App* cmd, const ScenarioFlags& f) {
  Scenario s;
  if (!f.scenario_file.empty()) s = parse_scenario(read_file(f.scenario_file));
  auto given = [&](const char* name) { return cmd->count(name) > 0; };
  if (f.scenario_file.empty() || given("--kind"))
    s.kind = attack_kind_from(f.kind);
  if (f.scenario_file.empty() || given("--ucdn")) s.ucdn = f.ucdn;
  if (given("--ocdn")) s.ocdn = f.ocdn;
  if (f.scenario_file.empty() || given("--client-ae"))
    s.client_ae = f.client_ae == "absent"
                      ? std::nullopt
                      : std::optional<std::string>(f.client_ae);
  if (f.scenario_file.empty() || given("--payload")) {
    if (f.payload == "bomb")
      s.payload.kind = Payload::Kind::bomb;
    else if (f.payload == "corpus")
      s.payload.kind = Payload::Kind::corpus;
    else
      throw Error(Errc::ConfigError,
                  "payload must be bomb or corpus, got '" + f.payload + "'");
  }
  if (f.scenario_file.empty() || given("--size"))
    s.payload.plain_size = f.size;
  if (f.scenario_file.empty() || given("--ratio"))
    s.payload.target_ratio = f.ratio;
  if (f.scenario_file.empty() || given("--repetitions"))
    s.repetitions = f.repetitions;
  if (f.scenario_file.empty() || given("--no-cache-bypass"))
    s.cache_bypass = !f.no_cache_bypass;
  if (f.scenario_file.empty() || given("--overhead"))
    s.overhead = parse_overhead_flag(f.overhead);
  if (given("--mitigate") || f.scenario_file.empty()) {
    s.mitigations.clear();
    for (const std::string& m : f.mitigations)
      s.mitigations.insert(mitigation_from(m));
  }
  if (f.scenario_file.empty() || given("--customer-deletes-ae"))
    s.customer_deletes_ae = f.customer_deletes_ae;
  if (f.scenario_file.empty() || given("--seed")) s.seed = f.seed;
  if (f.scenario_file.empty() || given("--max-bomb-size"))
    s.safety_cap = f.max_bomb_size;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "ccsim: deterministic CDN compression-conversion amplification "
      "simulator and probe toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ccsim 1.0.0");

  // simulate ---------------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "Run one attack chain");
  ScenarioFlags sf;
  add_scenario_flags(sim, sf, /*with_file=*/true);
  std::string sim_format = "table";
  std::string sim_out;
  bool sim_loopback = false;
  sim->add_option("--format", sim_format, "Output: table | json")
      ->check(CLI::IsMember({"table", "json"}));
  sim->add_option("--out", sim_out, "Write output to a file");
  sim->add_flag("--loopback", sim_loopback,
                "Run the chain over real loopback sockets");

  // matrix -----------------------------------------------------------------
  auto* mx = app.add_subcommand(
      "matrix", "Sweep attack kinds across all builtin profiles");
  std::vector<std::string> mx_kinds;
  std::string mx_payload = "bomb";
  std::size_t mx_size = 1024 * 1024;
  double mx_ratio = 6.0;
  int mx_reps = 1;
  bool mx_no_bypass = false;
  std::string mx_overhead = "packet";
  std::vector<std::string> mx_mitigations;
  std::uint64_t mx_seed = 1;
  std::string mx_format = "table";
  std::string mx_out;
  mx->add_option("--kind", mx_kinds,
                 "Attack kind to include (repeatable; default: all)");
  mx->add_option("--payload", mx_payload, "bomb | corpus");
  mx->add_option("--size", mx_size, "Payload plaintext size in bytes");
  mx->add_option("--ratio", mx_ratio, "Corpus target ratio");
  mx->add_option("--repetitions", mx_reps, "Requests per combination");
  mx->add_flag("--no-cache-bypass", mx_no_bypass, "Disable bypass tokens");
  mx->add_option("--overhead", mx_overhead,
                 "http | packet | packet:<mss>:<bytes>");
  mx->add_option("--mitigate", mx_mitigations, "Mitigation (repeatable)");
  mx->add_option("--seed", mx_seed, "Deterministic seed");
  mx->add_option("--format", mx_format, "Output: table | csv | json")
      ->check(CLI::IsMember({"table", "csv", "json"}));
  mx->add_option("--out", mx_out, "Write output to a file");

  // probe ------------------------------------------------------------------
  auto* pb = app.add_subcommand(
      "probe", "Classify an endpoint (requires --i-control-the-origin)");
  bool pb_ack = false;
  std::uint16_t pb_port = 0;
  std::string pb_rig;
  int pb_interval = 200;
  int pb_max_requests = 32;
  std::uint64_t pb_seed = 1;
  std::string pb_format = "table";
  std::string pb_out;
  pb->add_flag("--i-control-the-origin", pb_ack,
               "Assert that the probed endpoint fronts an origin you "
               "operate; probing is refused without it");
  pb->add_option("--port", pb_port,
                 "Probe the endpoint listening on 127.0.0.1:<port>");
  pb->add_option("--rig", pb_rig,
                 "Assemble a loopback rig for this builtin profile and "
                 "probe it (self-contained demo)");
  pb->add_option("--interval-ms", pb_interval,
                 "Pacing between probe requests (default 200)");
  pb->add_option("--max-requests", pb_max_requests,
                 "Hard probe budget (default 32)");
  pb->add_option("--seed", pb_seed, "Deterministic seed");
  pb->add_option("--format", pb_format, "Output: table | json")
      ->check(CLI::IsMember({"table", "json"}));
  pb->add_option("--out", pb_out, "Write output to a file");

  // profiles ---------------------------------------------------------------
  auto* pf = app.add_subcommand(
      "profiles", "Print builtin profiles, or validate a profile file");
  std::string pf_load;
  std::string pf_out;
  pf->add_option("--load", pf_load,
                 "Parse this profile file and re-serialize it (validation)");
  pf->add_option("--out", pf_out, "Write output to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (sim->parsed()) {
    return run_guarded([&] {
      Scenario s = scenario_from_flags(sim, sf);
      auto registry = builtin_profiles();
      SimulationResult r = sim_loopback ? run_scenario_loopback(s, registry)
                                        : run_scenario(s, registry);
      return write_output(
          sim_format == "json" ? simulation_json(r) : simulation_table(r),
          sim_out);
    });
  }

  if (mx->parsed()) {
    return run_guarded([&] {
      MatrixOptions opt;
      if (!mx_kinds.empty()) {
        opt.kinds.clear();
        for (const std::string& k : mx_kinds)
          opt.kinds.insert(attack_kind_from(k));
      }
      if (mx_payload == "bomb")
        opt.payload.kind = Payload::Kind::bomb;
      else if (mx_payload == "corpus")
        opt.payload.kind = Payload::Kind::corpus;
      else
        throw Error(Errc::ConfigError,
                    "payload must be bomb or corpus, got '" + mx_payload +
                        "'");
      opt.payload.plain_size = mx_size;
      opt.payload.target_ratio = mx_ratio;
      opt.repetitions = mx_reps;
      opt.cache_bypass = !mx_no_bypass;
      opt.overhead = parse_overhead_flag(mx_overhead);
      for (const std::string& m : mx_mitigations)
        opt.mitigations.insert(mitigation_from(m));
      opt.seed = mx_seed;
      MatrixResult r = scenario_matrix(builtin_profiles(), opt);
      std::string text;
      if (mx_format == "csv") {
        text = report_csv(r.rows);
      } else if (mx_format == "json") {
        text = report_json(r.rows, &r.skipped);
      } else {
        text = report_table(r.rows);
        if (!r.skipped.empty()) {
          text += "\nskipped combinations:\n";
          for (const SkippedCombo& s : r.skipped) {
            text += "  ";
            text += attack_kind_name(s.kind);
            text += " " + s.ucdn;
            if (!s.ocdn.empty()) text += " x " + s.ocdn;
            text += " (" + s.case_label + "): " + s.reason + "\n";
          }
        }
      }
      return write_output(text, mx_out);
    });
  }

  if (pb->parsed()) {
    if (!pb_ack) {
      std::fprintf(stderr,
                   "refusing to probe: this tool only probes endpoints whose "
                   "origin you operate; pass --i-control-the-origin to "
                   "assert that\n");
      return 3;
    }
    return run_guarded([&] {
      if ((pb_port == 0) == pb_rig.empty())
        throw Error(Errc::ConfigError,
                    "pass exactly one of --port or --rig");
      ProbeOptions opt;
      opt.i_control_the_origin = true;
      opt.interval_ms = pb_interval;
      opt.max_requests = pb_max_requests;
      opt.seed = pb_seed;
      ProbeMaterials materials = ProbeMaterials::standard();

      std::unique_ptr<RecordingOrigin> rig_origin;
      std::unique_ptr<NodeState> rig_node;
      std::unique_ptr<LoopbackServer> rig_origin_srv;
      std::unique_ptr<LoopbackServer> rig_edge_srv;
      std::uint16_t port = pb_port;
      if (!pb_rig.empty()) {
        rig_origin = std::make_unique<RecordingOrigin>(materials);
        rig_node = std::make_unique<NodeState>();
        rig_node->profile = find_profile(builtin_profiles(), pb_rig);
        rig_node->hop = HopKind::client_facing;
        rig_origin_srv = std::make_unique<LoopbackServer>(
            [&origin = *rig_origin](const HttpMessage& r) {
              return origin.respond(r);
            });
        rig_edge_srv = std::make_unique<LoopbackServer>(
            [&node = *rig_node, &srv = *rig_origin_srv](const HttpMessage& r) {
              return handle_request(node, r, [&](const HttpMessage& fwd) {
                return loopback_exchange(srv.port(), fwd).response;
              });
            });
        port = rig_edge_srv->port();
      }

      SocketTransport transport(port);
      EndpointClassification c = probe_endpoint(transport, materials, opt);
      if (rig_edge_srv) rig_edge_srv->stop();
      if (rig_origin_srv) rig_origin_srv->stop();
      return write_output(pb_format == "json" ? classification_json(c)
                                              : classification_table(c),
                          pb_out);
    });
  }

  if (pf->parsed()) {
    return run_guarded([&] {
      std::vector<CdnProfile> profiles =
          pf_load.empty() ? builtin_profiles()
                          : parse_profiles(read_file(pf_load));
      return write_output(serialize_profiles(profiles), pf_out);
    });
  }

  return 2;
}
