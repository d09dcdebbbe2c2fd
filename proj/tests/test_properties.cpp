// Randomized property checks over the simulator: determinism, ledger
// structure, exact byte accounting, cache behavior, repetition linearity,
// pass-through conservation, and agreement with the closed form.
#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "catch_amalgamated.hpp"

#include "ccsim/scenario_io.hpp"
#include "ccsim/simulate.hpp"

using namespace ccsim;

namespace {

const std::vector<CdnProfile>& registry() {
  static const std::vector<CdnProfile> r = builtin_profiles();
  return r;
}

Scenario random_scenario(std::mt19937_64& rng) {
  const std::vector<CdnProfile>& reg = registry();
  std::uniform_int_distribution<std::size_t> cdn_pick(0, reg.size() - 1);
  std::uniform_int_distribution<int> coin(0, 1);

  Scenario s;
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0: s.kind = AttackKind::cccf; break;
    case 1: s.kind = AttackKind::ccuf1; break;
    default: s.kind = AttackKind::ccuf2; break;
  }
  s.ucdn = reg[cdn_pick(rng)].name;
  if (s.kind != AttackKind::cccf) s.ocdn = reg[cdn_pick(rng)].name;
  if (s.kind == AttackKind::ccuf1) {
    s.client_ae = "br";
  } else if (s.kind == AttackKind::cccf &&
             std::uniform_int_distribution<int>(0, 9)(rng) == 0) {
    s.client_ae = "gzip, deflate, br";  // multi-coding client
  } else {
    s.client_ae = coin(rng) ? "br" : "gzip";
  }
  if (std::uniform_int_distribution<int>(0, 4)(rng) == 0) {
    s.payload.kind = Payload::Kind::corpus;
    s.payload.plain_size =
        std::uniform_int_distribution<std::size_t>(50'000, 256'000)(rng);
    s.payload.target_ratio = 6.0;
  } else {
    s.payload.kind = Payload::Kind::bomb;
    s.payload.plain_size = std::uniform_int_distribution<std::size_t>(
        64 * 1024, 2 * 1024 * 1024)(rng);
  }
  s.repetitions = std::uniform_int_distribution<int>(1, 3)(rng);
  s.cache_bypass = coin(rng) == 1;
  s.overhead = coin(rng) ? packetized_overhead() : http_only_overhead();
  s.seed = rng();
  return s;
}

bool ledgers_equal(const TrafficLedger& a, const TrafficLedger& b) {
  if (a.links.size() != b.links.size()) return false;
  for (std::size_t i = 0; i < a.links.size(); ++i) {
    if (a.links[i].name != b.links[i].name) return false;
    if (a.links[i].request_bytes != b.links[i].request_bytes) return false;
    if (a.links[i].response_bytes != b.links[i].response_bytes) return false;
    if (a.links[i].exchanges != b.links[i].exchanges) return false;
  }
  return true;
}

// The coding named by a single-token Accept-Encoding header, if it is one.
std::optional<Coding> single_coding(const Scenario& s) {
  if (!s.client_ae.has_value()) return std::nullopt;
  if (*s.client_ae == "gzip") return Coding::gzip;
  if (*s.client_ae == "br") return Coding::br;
  return std::nullopt;
}

// Whether the closed form covers this scenario: attack-viable, unmitigated,
// with a single-coding client the front edge can serve.
bool closed_form_applies(const Scenario& s) {
  const std::optional<Coding> c = single_coding(s);
  if (!c.has_value()) return false;
  const CdnProfile& front = find_profile(registry(), s.ucdn);
  if (s.kind == AttackKind::cccf) return front.edge.supports(*c);
  const CdnProfile& back = find_profile(registry(), s.ocdn);
  if (s.kind == AttackKind::ccuf1)
    return !detail::ccuf1_unviable_reason(front, back).has_value();
  return !detail::ccuf2_unviable_reason(front, back, *c).has_value();
}

Scenario scenario_from_row(const AmplificationReport& row,
                           const MatrixOptions& opt) {
  Scenario s;
  s.kind = row.kind;
  s.ucdn = row.ucdn;
  s.ocdn = row.ocdn;
  if (row.case_label == "absent")
    s.client_ae = std::nullopt;
  else
    s.client_ae = row.case_label;
  s.payload = opt.payload;
  s.repetitions = opt.repetitions;
  s.cache_bypass = opt.cache_bypass;
  s.overhead = opt.overhead;
  s.mitigations = opt.mitigations;
  s.seed = opt.seed;
  return s;
}

}  // namespace

TEST_CASE("randomized scenarios satisfy the ledger invariants") {
  std::mt19937_64 rng(20260816);
  int closed_form_hits = 0;
  int conservation_hits = 0;

  for (int iter = 0; iter < 220; ++iter) {
    const Scenario s = random_scenario(rng);
    INFO("iteration " << iter << "\n" << serialize_scenario(s));

    const SimulationResult r = run_scenario(s, registry());
    const SimulationResult again = run_scenario(s, registry());

    // Determinism: identical inputs produce identical ledgers and reports.
    CHECK(ledgers_equal(r.ledger, again.ledger));
    CHECK(r.report.factor == again.report.factor);
    CHECK(r.decisions.size() == again.decisions.size());

    // One link per hop: client edge plus one per CDN boundary.
    const std::size_t expected_links =
        s.kind == AttackKind::cccf ? 2 : 3;
    REQUIRE(r.ledger.links.size() == expected_links);
    CHECK(r.ledger.links.front().name == "client<->" + s.ucdn);
    const std::string& back_name =
        s.kind == AttackKind::cccf ? s.ucdn : s.ocdn;
    CHECK(r.ledger.links.back().name == back_name + "<->origin");

    // Every request serializes to exactly the padded size on every hop.
    const std::size_t request_wire = wire_size(260, s.overhead);
    for (const LinkStats& link : r.ledger.links) {
      INFO("link " << link.name);
      CHECK(link.request_bytes == link.exchanges * request_wire);
    }

    // Exchange counts: the client always sends every repetition; upstream
    // links either see all of them (bypass) or exactly one (cached).
    const std::size_t reps = static_cast<std::size_t>(s.repetitions);
    CHECK(r.ledger.links.front().exchanges == reps);
    for (std::size_t i = 1; i < r.ledger.links.size(); ++i)
      CHECK(r.ledger.links[i].exchanges == (s.cache_bypass ? reps : 1));
    if (s.cache_bypass) {
      CHECK(r.cache_front.hits == 0);
      CHECK(r.cache_front.stores == reps);
    } else {
      CHECK(r.cache_front.hits == reps - 1);
      CHECK(r.cache_front.misses == 1);
      CHECK(r.cache_front.stores == 1);
    }

    // The reported factor is exactly the first-upstream/client byte ratio.
    CHECK(r.report.factor == static_cast<double>(r.ledger.links[1].total()) /
                                 static_cast<double>(r.ledger.links[0].total()));
    CHECK(r.report.client_link_bytes == r.ledger.links[0].total());
    CHECK(r.report.upstream_link_bytes == r.ledger.links[1].total());

    // Pass-through conservation: when a single-node chain never transforms
    // the body, the identity payload crosses both links intact and every
    // response is the header block plus the plain payload.
    if (s.kind == AttackKind::cccf && !r.decisions.empty() &&
        std::all_of(r.decisions.begin(), r.decisions.end(), [](const auto& d) {
          return d.second.action == NodeDecision::Action::pass_through;
        })) {
      ++conservation_hits;
      const CdnProfile& front = find_profile(registry(), s.ucdn);
      const LinkStats& client_link = r.ledger.links[0];
      const LinkStats& origin_link = r.ledger.links[1];
      CHECK(client_link.response_bytes ==
            client_link.exchanges *
                wire_size(front.response_header_bytes + s.payload.plain_size,
                          s.overhead));
      CHECK(origin_link.response_bytes ==
            origin_link.exchanges *
                wire_size(700 + s.payload.plain_size, s.overhead));
    }

    // Repetition linearity under cache bypass: k repetitions cost exactly
    // k times one repetition, so the factor is repetition-invariant.
    if (s.cache_bypass && s.repetitions > 1) {
      Scenario one = s;
      one.repetitions = 1;
      const SimulationResult r1 = run_scenario(one, registry());
      REQUIRE(r1.ledger.links.size() == r.ledger.links.size());
      for (std::size_t i = 0; i < r.ledger.links.size(); ++i) {
        CHECK(r.ledger.links[i].request_bytes ==
              reps * r1.ledger.links[i].request_bytes);
        CHECK(r.ledger.links[i].response_bytes ==
              reps * r1.ledger.links[i].response_bytes);
      }
      CHECK(r.report.factor == r1.report.factor);
    }

    // Closed-form agreement on viable, unmitigated chains.
    if (closed_form_applies(s)) {
      ++closed_form_hits;
      CHECK(closed_form_factor(s, registry()) == r.report.factor);
    }
  }

  // The generator must actually exercise the conditional properties.
  CHECK(closed_form_hits >= 40);
  CHECK(conservation_hits >= 5);
}

TEST_CASE("every matrix row agrees with the closed form") {
  for (const OverheadModel& overhead :
       {packetized_overhead(), http_only_overhead()}) {
    MatrixOptions opt;
    opt.overhead = overhead;
    const MatrixResult m = scenario_matrix(registry(), opt);
    REQUIRE(m.rows.size() == 43);
    for (const AmplificationReport& row : m.rows) {
      const Scenario s = scenario_from_row(row, opt);
      INFO((overhead.kind == OverheadModel::Kind::packetized ? "packetized "
                                                             : "http-only ")
           << attack_kind_name(row.kind) << " " << row.ucdn
           << (row.ocdn.empty() ? "" : " x " + row.ocdn) << " "
           << row.case_label);
      CHECK(closed_form_factor(s, registry()) == row.factor);
    }
  }
}
