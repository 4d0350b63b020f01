#include "dbarw/separation.hpp"

#include <algorithm>
#include <ostream>
#include <set>
#include <stdexcept>

#include "dbarw/format.hpp"
#include "dbarw/rng.hpp"

namespace dbarw {

std::vector<Site> gap_sites(const SiteConfiguration& config) {
  std::vector<Site> out;
  const auto sites = config.sites();
  // Only a vacancy directly after a particle can be a gap site, and the next
  // particle must sit one or two sites further on.
  for (std::size_t k = 0; k + 1 < sites.size(); ++k) {
    const Site s = sites[k] + 1;
    const Site next = sites[k + 1];
    if (next != s && (next == s + 1 || next == s + 2)) out.push_back(s);
  }
  return out;
}

std::vector<std::int64_t> detect_i_gaps(const SiteConfiguration& config) {
  std::vector<std::int64_t> out;
  if (config.empty()) return out;
  for (Site s : gap_sites(config)) out.push_back(s - config.left());
  return out;
}

void LabeledConfiguration::validate() const {
  if (!group1.empty() && !group2.empty() && group1.right() + 1 >= group2.left()) {
    throw std::invalid_argument("groups must be separated by at least one vacant site");
  }
}

SiteConfiguration LabeledConfiguration::merged() const {
  std::vector<Site> all(group1.sites().begin(), group1.sites().end());
  all.insert(all.end(), group2.sites().begin(), group2.sites().end());
  return SiteConfiguration::from_sites(std::move(all));
}

LabeledConfiguration split_at_gap(const SiteConfiguration& config, std::int64_t i) {
  if (config.empty()) throw std::invalid_argument("cannot split the empty configuration");
  const auto gaps = detect_i_gaps(config);
  if (std::find(gaps.begin(), gaps.end(), i) == gaps.end()) {
    throw std::invalid_argument("offset " + std::to_string(i) + " is not an i-gap");
  }
  const Site cut = config.left() + i;
  std::vector<Site> lhs;
  std::vector<Site> rhs;
  for (Site s : config.sites()) (s < cut ? lhs : rhs).push_back(s);
  if (lhs.size() % 2 != 0 || rhs.size() % 2 != 0) {
    throw std::invalid_argument("both sides of the gap must hold an even number of particles");
  }
  return {SiteConfiguration::from_sites(std::move(lhs)), SiteConfiguration::from_sites(std::move(rhs))};
}

std::string_view to_string(SeparationStatus s) noexcept {
  switch (s) {
    case SeparationStatus::Separated: return "separated";
    case SeparationStatus::Met: return "met";
    case SeparationStatus::Censored: return "censored";
  }
  return "?";
}

std::vector<LabeledStepProbability> labeled_step_distribution(const LabeledConfiguration& labeled,
                                                              const RateParams& params) {
  labeled.validate();
  const double q1 = total_rate(labeled.group1, params);
  const double q2 = total_rate(labeled.group2, params);
  const double q = q1 + q2;
  std::vector<LabeledStepProbability> out;
  if (q == 0.0) return out;
  const std::pair<const SiteConfiguration*, double> groups[2] = {{&labeled.group1, q1},
                                                                 {&labeled.group2, q2}};
  for (int a = 0; a < 2; ++a) {
    const auto [config, qa] = groups[a];
    if (qa == 0.0) continue;
    for (const auto& e : enabled_events(*config, params)) {
      out.push_back({a + 1, e.event, (qa / q) * (e.rate / qa)});
    }
  }
  return out;
}

namespace {

std::int64_t union_width(const Simulator& g1, const Simulator& g2) {
  if (g1.empty()) return g2.width();
  if (g2.empty()) return g1.width();
  return std::max(g1.right(), g2.right()) - std::min(g1.left(), g2.left()) + 1;
}

}  // namespace

LabeledTrajectory simulate_labeled(const LabeledConfiguration& labeled, const RateParams& params,
                                   const SimParams& sim) {
  params.validate();
  sim.validate();
  labeled.validate();

  LabeledTrajectory t;
  t.initial = labeled;
  Simulator groups[2] = {Simulator(labeled.group1, params), Simulator(labeled.group2, params)};
  Rng selector(derive_seed(sim.seed, 0));
  Rng group_rng[2] = {Rng(derive_seed(sim.seed, 1)), Rng(derive_seed(sim.seed, 2))};
  Rng merged_rng(derive_seed(sim.seed, 3));
  std::optional<Simulator> merged;

  double now = 0.0;
  auto current_width = [&] { return merged ? merged->width() : union_width(groups[0], groups[1]); };
  auto all_empty = [&] { return merged ? merged->empty() : groups[0].empty() && groups[1].empty(); };

  while (true) {
    if (all_empty()) {
      t.status = TerminalStatus::Extinct;
      break;
    }
    if (sim.width_cap > 0 && t.event_count > 0 && current_width() >= sim.width_cap) {
      t.status = TerminalStatus::WidthCap;
      break;
    }
    if (t.event_count >= sim.max_events) {
      t.status = TerminalStatus::EventCap;
      break;
    }

    LocalEvent ev;
    int group = 0;
    double dt = 0.0;
    if (merged) {
      dt = merged_rng.exponential(merged->total_rate());
      if (now + dt > sim.max_time) {
        now = sim.max_time;
        t.status = TerminalStatus::TimeCap;
        break;
      }
      ev = merged->choose_event(merged_rng);
      merged->execute(ev);
    } else {
      const double q1 = groups[0].total_rate();
      const double q = q1 + groups[1].total_rate();
      dt = selector.exponential(q);
      if (now + dt > sim.max_time) {
        now = sim.max_time;
        t.status = TerminalStatus::TimeCap;
        break;
      }
      const int a = selector.uniform() * q < q1 ? 0 : 1;
      ev = groups[a].choose_event(group_rng[a]);
      groups[a].execute(ev);
      group = a + 1;
    }
    now += dt;
    ++t.event_count;
    if (sim.record) t.records.push_back({now, ev, group, current_width()});

    if (!merged && !groups[0].empty() && !groups[1].empty() &&
        groups[0].right() + 1 >= groups[1].left()) {
      t.meeting_index = static_cast<std::size_t>(t.event_count - 1);
      t.meeting_time = now;
      LabeledConfiguration both{groups[0].configuration(), groups[1].configuration()};
      merged.emplace(both.merged(), params);
    }
  }
  t.end_time = now;
  if (merged) {
    t.final = merged->configuration();
  } else {
    t.final = LabeledConfiguration{groups[0].configuration(), groups[1].configuration()}.merged();
  }
  return t;
}

SeparationVerdict check_separation(const LabeledTrajectory& t) {
  if (t.meeting_time) return {SeparationStatus::Met, t.meeting_time};
  if (t.status == TerminalStatus::Extinct) return {SeparationStatus::Separated, std::nullopt};
  return {SeparationStatus::Censored, std::nullopt};
}

namespace {

enum class GapFate { Certified, Met, Undecided };

// Replays records[from..] with particles left of `cut` labelled 1 and the
// rest 2, stopping at the first adjacency or the first extinct side.
GapFate follow_gap(const SiteConfiguration& after, Site cut, const std::vector<JumpRecord>& records,
                   std::size_t from, double horizon) {
  std::set<Site> side[2];
  for (Site s : after.sites()) side[s < cut ? 0 : 1].insert(s);
  if (side[0].empty() || side[1].empty()) return GapFate::Certified;
  for (std::size_t k = from; k < records.size() && records[k].time <= horizon; ++k) {
    const LocalEvent& ev = records[k].event;
    const int a = side[0].count(ev.site) ? 0 : 1;
    const TouchedSites touched = touched_sites(ev);
    for (int m = (ev.kind == EventKind::Branch ? 1 : 0); m < touched.count; ++m) {
      const Site s = touched.sites[m];
      if (!side[a].erase(s)) side[a].insert(s);
    }
    if (side[0].empty() || side[1].empty()) return GapFate::Certified;
    if (*side[0].rbegin() + 1 >= *side[1].begin()) return GapFate::Met;
  }
  return GapFate::Undecided;
}

}  // namespace

SeparationCount count_separation_times(const Trajectory& t, const HorizonPolicy& policy) {
  SeparationCount out;
  SiteConfiguration config = t.initial;
  std::vector<Site> before_gaps = gap_sites(config);
  bool died_in_horizon = config.empty();
  for (std::size_t k = 0; k < t.records.size(); ++k) {
    const JumpRecord& r = t.records[k];
    if (r.time > policy.horizon) break;
    config = apply_event(config, r.event);
    std::vector<Site> after_gaps = gap_sites(config);
    bool certified_here = false;
    for (Site s : after_gaps) {
      if (std::binary_search(before_gaps.begin(), before_gaps.end(), s)) continue;
      ++out.candidates;
      switch (follow_gap(config, s, t.records, k + 1, policy.horizon)) {
        case GapFate::Certified: certified_here = true; break;
        case GapFate::Met: break;
        case GapFate::Undecided: ++out.undecided; break;
      }
    }
    if (certified_here) ++out.k_lower;
    before_gaps = std::move(after_gaps);
    if (config.empty()) died_in_horizon = true;
  }
  out.censored = !died_in_horizon;
  return out;
}

void write_labeled_trajectory(std::ostream& os, const LabeledTrajectory& t,
                              const RateParams& params, const SimParams& sim) {
  os << "# group1=" << t.initial.group1.to_string() << " group2=" << t.initial.group2.to_string()
     << " p=" << format_real(params.p) << " b=" << format_real(params.b) << " seed=" << sim.seed
     << " max_events=" << sim.max_events << " max_time=" << format_real(sim.max_time)
     << " width_cap=" << sim.width_cap << '\n';
  for (const auto& r : t.records) {
    os << format_real(r.time) << ' ' << to_string(r.event.kind) << ' ' << r.event.site << ' '
       << r.group << ' ' << r.width_after << '\n';
  }
  const SeparationVerdict v = check_separation(t);
  os << "# status=" << to_string(t.status) << " verdict=" << to_string(v.status);
  if (v.first_meeting_time) os << " meeting_time=" << format_real(*v.first_meeting_time);
  os << " final=" << t.final.to_string() << '\n';
}

}  // namespace dbarw
