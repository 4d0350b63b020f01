#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "dbarw/lattice.hpp"
#include "support/generators.hpp"

using namespace dbarw;

namespace {

SiteConfiguration cfg(std::vector<Site> s) { return SiteConfiguration::from_sites(std::move(s)); }

}  // namespace

TEST_CASE("configuration construction and text format") {
  CHECK(SiteConfiguration::parse("").empty());
  CHECK(SiteConfiguration::parse("   \n").empty());
  CHECK(SiteConfiguration::parse("0 1") == cfg({0, 1}));
  CHECK(SiteConfiguration::parse("5\t-3") == cfg({-3, 5}));
  CHECK(cfg({-3, 5}).to_string() == "-3 5");
  CHECK_THROWS_AS(SiteConfiguration::parse("0"), std::invalid_argument);
  CHECK_THROWS_AS(SiteConfiguration::parse("0 0"), std::invalid_argument);
  CHECK_THROWS_AS(SiteConfiguration::parse("0 x"), std::invalid_argument);
  CHECK_THROWS_AS(SiteConfiguration::parse("1.5 2"), std::invalid_argument);
}

TEST_CASE("rate params validation") {
  CHECK_NOTHROW(RateParams{1.0, 1.0}.validate());
  CHECK_THROWS_AS((RateParams{0.0, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((RateParams{1.5, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((RateParams{0.5, 0.0}.validate()), std::invalid_argument);
}

TEST_CASE("event_rate examples") {
  const RateParams params{0.5, 3.0};
  const auto c = cfg({0, 1});
  CHECK(event_rate(c, params, {0, EventKind::JumpRight}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(event_rate(c, params, {0, EventKind::JumpLeft}) == 1.0);
  CHECK(event_rate(c, params, {0, EventKind::Branch}) == doctest::Approx(1.5).epsilon(1e-15));

  CHECK(event_rate(cfg({0, 2}), params, {5, EventKind::JumpRight}) == 0.0);
  CHECK(event_rate(cfg({0, 4}), RateParams{0.3, 2.0}, {0, EventKind::Branch}) == 2.0);
}

TEST_CASE("rate table over all eight neighbourhoods") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> pd(1e-6, 1.0);
  std::uniform_real_distribution<double> bd(1e-3, 1e4);
  for (int trial = 0; trial < 50; ++trial) {
    const RateParams params{pd(gen), bd(gen)};
    for (int mask = 0; mask < 8; ++mask) {
      const bool l = mask & 4, y = mask & 2, r = mask & 1;
      // Case table: moves onto an occupied site and branchings next to one are
      // slowed down by p.
      const double right = y ? (r ? params.p : 1.0) : 0.0;
      const double left = y ? (l ? params.p : 1.0) : 0.0;
      const double branch = y ? ((l || r) ? params.p * params.b : params.b) : 0.0;
      CHECK(neighborhood_rate(l, y, r, EventKind::JumpRight, params) == right);
      CHECK(neighborhood_rate(l, y, r, EventKind::JumpLeft, params) == left);
      CHECK(neighborhood_rate(l, y, r, EventKind::Branch, params) == branch);
      // The literal product formulas, evaluated in long double.
      const long double P = params.p, B = params.b, Y = y, L = l, R = r;
      const long double lit_right = Y * (1 - (1 - P) * R);
      const long double lit_left = Y * (1 - (1 - P) * L);
      const long double lit_branch = B * Y * (P + (1 - P) * (1 - R) * (1 - L));
      CHECK(std::abs(static_cast<double>(lit_right - right)) <= 1e-15 * std::max(1.0, right));
      CHECK(std::abs(static_cast<double>(lit_left - left)) <= 1e-15 * std::max(1.0, left));
      CHECK(std::abs(static_cast<double>(lit_branch - branch)) <= 1e-15 * std::max(1.0, branch));
    }
  }
}

TEST_CASE("enabled_events and total_rate") {
  CHECK(enabled_events(SiteConfiguration{}, RateParams{}).empty());
  CHECK(total_rate(SiteConfiguration{}, RateParams{0.3, 7.0}) == 0.0);

  const auto six = enabled_events(cfg({0, 1}), RateParams{1.0, 1.0});
  REQUIRE(six.size() == 6);
  for (const auto& e : six) CHECK(e.rate == 1.0);

  const auto apart = enabled_events(cfg({0, 5}), RateParams{0.5, 2.0});
  REQUIRE(apart.size() == 6);
  for (const auto& e : apart) CHECK(e.rate == (e.event.kind == EventKind::Branch ? 2.0 : 1.0));

  for (double p : {0.01, 0.3, 1.0}) {
    for (double b : {0.5, 4.0, 1e4}) {
      const RateParams params{p, b};
      CHECK(total_rate(cfg({0, 1}), params) ==
            doctest::Approx(2 + 2 * p + 2 * p * b).epsilon(1e-14));
      CHECK(total_rate(cfg({0, 4}), params) == doctest::Approx(4 + 2 * b).epsilon(1e-14));
    }
  }
}

TEST_CASE("apply_event examples") {
  CHECK(apply_event(cfg({0, 1}), {0, EventKind::JumpRight}).empty());
  CHECK(apply_event(cfg({0, 5}), {0, EventKind::Branch}) == cfg({-1, 0, 1, 5}));
  CHECK(apply_event(cfg({0, 1}), {0, EventKind::Branch}) == cfg({-1, 0}));
  CHECK(apply_event(cfg({0, 5}), {5, EventKind::JumpLeft}) == cfg({0, 4}));
  CHECK_THROWS_AS((void)apply_event(cfg({0, 1}), {3, EventKind::Branch}), std::invalid_argument);
}

TEST_CASE("width") {
  CHECK(width(SiteConfiguration{}) == 0);
  CHECK(width(cfg({0, 1})) == 2);
  CHECK(width(cfg({-3, 5})) == 9);
}

TEST_CASE("parity, width-1 exclusion and single-event width change on random events") {
  testsupport::Generator gen(2024);
  const RateParams params{0.5, 2.0};
  for (int trial = 0; trial < 20000; ++trial) {
    const auto c = gen.configuration(12, 16);
    if (c.empty()) continue;
    const auto events = enabled_events(c, params);
    const auto& pick = events[gen.below(events.size())].event;
    const auto next = apply_event(c, pick);
    CHECK(next.size() % 2 == 0);
    CHECK(width(next) != 1);
    CHECK(width(next) <= width(c) + 1);
  }
}

TEST_CASE("heights examples") {
  CHECK(to_heights(cfg({0, 1})).ones == std::vector<Site>{0});
  CHECK(to_heights(SiteConfiguration{}).ones.empty());
  CHECK(to_heights(cfg({0, 3})).ones == std::vector<Site>{0, 1, 2});
  CHECK(from_heights(HeightConfiguration{{0}}) == cfg({0, 1}));
  CHECK_THROWS_AS((void)from_heights(HeightConfiguration{{2, 1}}), std::invalid_argument);
  CHECK_THROWS_AS((void)from_heights(HeightConfiguration{{1, 1}}), std::invalid_argument);
}

TEST_CASE("heights bijection and gradient relation") {
  testsupport::Generator gen(77);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto c = gen.configuration(30, 20);
    const auto h = to_heights(c);
    CHECK(from_heights(h) == c);
    // y_i = |x_{i+1/2} - x_{i-1/2}|, where ones holds k for height 1 at k + 1/2.
    const Site lo = c.empty() ? 0 : c.left() - 2;
    const Site hi = c.empty() ? 0 : c.right() + 2;
    auto x = [&](Site k) { return std::binary_search(h.ones.begin(), h.ones.end(), k) ? 1 : 0; };
    for (Site i = lo; i <= hi; ++i) CHECK((c.occupied(i) ? 1 : 0) == std::abs(x(i) - x(i - 1)));
  }
  for (int trial = 0; trial < 2000; ++trial) {
    HeightConfiguration h;
    for (Site k = -10; k < 10; ++k) {
      if (gen.below(2)) h.ones.push_back(k);
    }
    CHECK(to_heights(from_heights(h)) == h);
  }
}
