#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

#include "dbarw/engine.hpp"
#include "dbarw/width_analysis.hpp"
#include "support/generators.hpp"
#include "support/stats.hpp"

using namespace dbarw;

namespace {

SiteConfiguration cfg(std::vector<Site> s) { return SiteConfiguration::from_sites(std::move(s)); }

// Per-site rate sums straight from the rate table, in the same summation order
// as the engine (jump right, jump left, branch).
std::vector<std::pair<Site, double>> table_site_rates(const SiteConfiguration& c,
                                                      const RateParams& params) {
  std::vector<std::pair<Site, double>> out;
  for (const auto& e : enabled_events(c, params)) {
    if (out.empty() || out.back().first != e.event.site) {
      out.emplace_back(e.event.site, e.rate);
    } else {
      out.back().second += e.rate;
    }
  }
  return out;
}

Trajectory by_hand(const SiteConfiguration& initial, std::vector<LocalEvent> events) {
  Trajectory t;
  t.initial = initial;
  SiteConfiguration c = initial;
  double time = 0.0;
  for (const auto& ev : events) {
    c = apply_event(c, ev);
    time += 0.5;
    t.records.push_back({time, ev, width(c)});
  }
  t.final = c;
  t.event_count = static_cast<std::int64_t>(events.size());
  t.status = c.empty() ? TerminalStatus::Extinct : TerminalStatus::EventCap;
  return t;
}

}  // namespace

TEST_CASE("step: rejects the empty configuration") {
  Rng rng(1);
  CHECK_THROWS_AS((void)step(SiteConfiguration{}, RateParams{}, rng), std::invalid_argument);
}

TEST_CASE("step: six equally likely events from {0,1} at p = b = 1") {
  const auto c = cfg({0, 1});
  const RateParams params{1.0, 1.0};
  const auto events = enabled_events(c, params);
  Rng rng(5);
  std::vector<std::int64_t> counts(events.size(), 0);
  double holding = 0.0;
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) {
    const auto s = step(c, params, rng);
    holding += s.holding_time;
    const auto it = std::find_if(events.begin(), events.end(),
                                 [&](const RatedEvent& e) { return e.event == s.event; });
    REQUIRE(it != events.end());
    ++counts[static_cast<std::size_t>(it - events.begin())];
  }
  const auto chi = testsupport::chi_square_gof(counts, std::vector<double>(6, 1.0 / 6.0));
  CHECK(chi.pass);
  // Exponential(6): mean 1/6, standard error (1/6)/sqrt(draws).
  CHECK(std::abs(holding / draws - 1.0 / 6.0) < 4.0 * (1.0 / 6.0) / std::sqrt(draws));
}

TEST_CASE("step: branching at 0 from {0,4} has probability 2/8") {
  const auto c = cfg({0, 4});
  const RateParams params{0.5, 2.0};
  Rng rng(9);
  std::int64_t hits = 0;
  const std::int64_t draws = 100000;
  for (std::int64_t k = 0; k < draws; ++k) {
    const auto s = step(c, params, rng);
    if (s.event == LocalEvent{0, EventKind::Branch}) ++hits;
  }
  CHECK(testsupport::within_binomial(hits, draws, 0.25));
}

TEST_CASE("Simulator: event selection matches rate / total_rate") {
  testsupport::Generator gen(31);
  const RateParams params{0.3, 2.5};
  for (int fixture = 0; fixture < 5; ++fixture) {
    const auto c = gen.configuration(14, 5);
    if (c.empty()) continue;
    const auto events = enabled_events(c, params);
    const double total = total_rate(c, params);
    std::vector<double> probs;
    for (const auto& e : events) probs.push_back(e.rate / total);
    Simulator sim(c, params);
    CHECK(sim.total_rate() == doctest::Approx(total).epsilon(1e-13));
    Rng rng(100 + fixture);
    std::vector<std::int64_t> counts(events.size(), 0);
    for (int k = 0; k < 100000; ++k) {
      const LocalEvent ev = sim.choose_event(rng);
      const auto it = std::find_if(events.begin(), events.end(),
                                   [&](const RatedEvent& e) { return e.event == ev; });
      REQUIRE(it != events.end());
      ++counts[static_cast<std::size_t>(it - events.begin())];
    }
    CHECK(testsupport::chi_square_gof(counts, probs).pass);
  }
}

TEST_CASE("Simulator: incrementally maintained rates equal a full recomputation") {
  testsupport::Generator gen(4242);
  for (int run = 0; run < 200; ++run) {
    const RateParams params{0.05 + 0.95 * static_cast<double>(gen.below(100)) / 100.0,
                            0.1 + static_cast<double>(gen.below(50))};
    auto reference = gen.configuration(20, 100);
    Simulator sim(reference, params);
    Rng rng(static_cast<std::uint64_t>(run));
    for (int k = 0; k < 300 && !reference.empty(); ++k) {
      const LocalEvent ev = sim.choose_event(rng);
      sim.execute(ev);
      reference = apply_event(reference, ev);
      REQUIRE(sim.configuration() == reference);
      REQUIRE(sim.maintained_site_rates() == table_site_rates(reference, params));
      REQUIRE(sim.width() == width(reference));
      REQUIRE(sim.particle_count() == reference.size());
    }
  }
}

TEST_CASE("Simulator: window re-centres under long drift") {
  // A lone pair random-walks far from the origin without branching much.
  const RateParams params{1.0, 0.01};
  Simulator sim(cfg({0, 10}), params);
  SiteConfiguration reference = cfg({0, 10});
  Rng rng(3);
  for (int k = 0; k < 20000 && !sim.empty(); ++k) {
    const LocalEvent ev = sim.choose_event(rng);
    sim.execute(ev);
    reference = apply_event(reference, ev);
  }
  CHECK(sim.configuration() == reference);
}

TEST_CASE("Simulator: executing on an empty site throws") {
  Simulator sim(cfg({0, 1}), RateParams{});
  CHECK_THROWS_AS(sim.execute({7, EventKind::JumpLeft}), std::invalid_argument);
}

TEST_CASE("simulate: empty start is extinct with no records") {
  const auto t = simulate(SiteConfiguration{}, RateParams{0.3, 3.0}, SimParams{});
  CHECK(t.status == TerminalStatus::Extinct);
  CHECK(t.records.empty());
  CHECK(t.final.empty());
}

TEST_CASE("simulate: width cap 2 from {0,1} resolves on the first event") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    SimParams sim;
    sim.seed = seed;
    sim.width_cap = 2;
    const auto t = simulate(cfg({0, 1}), RateParams{1.0, 5.0}, sim);
    REQUIRE(t.records.size() == 1);
    const bool annihilated = t.records[0].event == LocalEvent{0, EventKind::JumpRight} ||
                             t.records[0].event == LocalEvent{1, EventKind::JumpLeft};
    CHECK((t.status == TerminalStatus::Extinct) == annihilated);
    if (!annihilated) CHECK(t.status == TerminalStatus::WidthCap);
  }
}

TEST_CASE("simulate: trajectory invariants and determinism") {
  testsupport::Generator gen(8);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SimParams sim;
    sim.seed = seed;
    sim.max_events = 2000;
    sim.width_cap = 40;
    const RateParams params{0.4, 3.0};
    const auto initial = gen.configuration(8, 3);
    const auto t = simulate(initial, params, sim);
    CHECK(replay(t) == t.final);
    CHECK((t.status == TerminalStatus::Extinct) == t.final.empty());
    for (std::size_t k = 1; k < t.records.size(); ++k) CHECK(t.records[k - 1].time < t.records[k].time);
    CHECK(simulate(initial, params, sim) == t);
  }
}

TEST_CASE("simulate: caps") {
  SimParams sim;
  sim.seed = 1;
  sim.max_events = 25;
  const RateParams params{1e-3, 50.0};
  auto t = simulate(cfg({0, 1}), params, sim);
  CHECK(t.status == TerminalStatus::EventCap);
  CHECK(t.records.size() == 25);

  sim.max_events = 1'000'000;
  sim.max_time = 0.05;
  t = simulate(cfg({0, 1}), params, sim);
  CHECK(t.status == TerminalStatus::TimeCap);
  CHECK(t.end_time == 0.05);
  if (!t.records.empty()) CHECK(t.records.back().time <= 0.05);

  sim.record = false;
  const auto quiet = simulate(cfg({0, 1}), params, sim);
  CHECK(quiet.records.empty());
  CHECK(quiet.event_count == t.event_count);
  CHECK(quiet.final == t.final);

  SimParams bad;
  bad.width_cap = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.width_cap = 0;
  bad.max_events = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.max_events = 1;
  bad.max_time = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("extract_width_chain fixtures") {
  SUBCASE("immediate annihilation") {
    const auto chain = extract_width_chain(by_hand(cfg({0, 1}), {{0, EventKind::JumpRight}}));
    REQUIRE(chain.entries.size() == 1);
    CHECK(chain.entries[0] == WidthChainEntry{0.5, 0, -2});
    CHECK(chain.cutoff_n == 1u);
  }
  SUBCASE("outward branchings only") {
    const auto chain = extract_width_chain(by_hand(
        cfg({0, 4}), {{0, EventKind::Branch}, {4, EventKind::Branch}, {-1, EventKind::Branch}}));
    REQUIRE(chain.entries.size() == 3);
    for (const auto& e : chain.entries) CHECK(e.v == 1);
    CHECK_FALSE(chain.cutoff_n.has_value());
  }
  SUBCASE("end annihilation exposes a distant particle") {
    const auto chain = extract_width_chain(
        by_hand(cfg({0, 1, 4, 5}), {{0, EventKind::JumpRight}, {4, EventKind::JumpLeft}}));
    REQUIRE(chain.entries.size() == 1);
    CHECK(chain.entries[0].v == -4);
    CHECK(chain.cutoff_n == 1u);
  }
  SUBCASE("width-preserving events are skipped") {
    const auto chain = extract_width_chain(
        by_hand(cfg({0, 1}), {{0, EventKind::Branch}, {-1, EventKind::JumpLeft}}));
    REQUIRE(chain.entries.size() == 1);
    CHECK(chain.entries[0] == WidthChainEntry{1.0, 3, 1});
  }
}

TEST_CASE("extract_width_chain invariants on simulated trajectories") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SimParams sim;
    sim.seed = seed;
    sim.max_events = 5000;
    const auto t = simulate(cfg({0, 1, 2, 3}), RateParams{0.2, 6.0}, sim);
    const auto chain = extract_width_chain(t);
    std::int64_t w = chain.initial_width;
    for (std::size_t k = 0; k < chain.entries.size(); ++k) {
      const auto& e = chain.entries[k];
      w += e.v;
      CHECK(e.w == w);
      const bool last = chain.cutoff_n && k + 1 == *chain.cutoff_n;
      if (!last) CHECK((e.v == -2 || e.v == -1 || e.v == 1));
      if (last) CHECK((e.w == 0 || e.v <= -3));
    }
    if (chain.cutoff_n) CHECK(*chain.cutoff_n == chain.entries.size());
  }
}

TEST_CASE("sample_Z") {
  Rng rng(12);
  CHECK_THROWS_AS((void)sample_Z(2.0, rng), std::invalid_argument);
  std::vector<std::int64_t> counts(3, 0);
  for (int k = 0; k < 100000; ++k) {
    const int z = sample_Z(8.0, rng);
    counts[z == -2 ? 0 : z == -1 ? 1 : 2]++;
  }
  CHECK(testsupport::chi_square_gof(counts, {0.2, 0.2, 0.6}).pass);
}

TEST_CASE("trajectory dump format") {
  SimParams sim;
  sim.seed = 7;
  sim.max_events = 5;
  const RateParams params{1.0, 1.0};
  const auto t = simulate(cfg({0, 1}), params, sim);
  std::ostringstream os;
  write_trajectory(os, t, params, sim);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# initial=0 1 p=1 b=1 seed=7", 0) == 0);
  std::size_t body = 0;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) continue;
    std::istringstream fields(line);
    double time = 0;
    std::string kind;
    Site site = 0;
    std::int64_t w = 0;
    REQUIRE(static_cast<bool>(fields >> time >> kind >> site >> w));
    CHECK(t.records[body].event == LocalEvent{site, parse_event_kind(kind)});
    CHECK(t.records[body].width_after == w);
    CHECK(t.records[body].time == time);
    ++body;
  }
  CHECK(body == t.records.size());
}
