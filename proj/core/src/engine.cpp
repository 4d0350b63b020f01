#include "dbarw/engine.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "dbarw/format.hpp"

namespace dbarw {

void SimParams::validate() const {
  if (max_events < 1) throw std::invalid_argument("max_events must be at least 1");
  if (!(max_time > 0.0)) throw std::invalid_argument("max_time must be positive");
  if (width_cap != 0 && width_cap < 2) throw std::invalid_argument("width_cap must be 0 or >= 2");
}

std::string_view to_string(TerminalStatus s) noexcept {
  switch (s) {
    case TerminalStatus::Extinct: return "extinct";
    case TerminalStatus::TimeCap: return "time_cap";
    case TerminalStatus::EventCap: return "event_cap";
    case TerminalStatus::WidthCap: return "width_cap";
  }
  return "?";
}

StepResult step(const SiteConfiguration& config, const RateParams& params, Rng& rng) {
  if (config.empty()) throw std::invalid_argument("no enabled events in the empty configuration");
  const auto events = enabled_events(config, params);
  double total = 0.0;
  for (const auto& e : events) total += e.rate;
  const double holding = rng.exponential(total);
  double r = rng.uniform() * total;
  for (const auto& e : events) {
    if (r < e.rate) return {holding, e.event};
    r -= e.rate;
  }
  return {holding, events.back().event};
}

// ---------------------------------------------------------------------------
// Simulator

Simulator::Simulator(const SiteConfiguration& initial, const RateParams& params) : params_(params) {
  params_.validate();
  for (int c = 0; c < 4; ++c) {
    const bool l = (c & 2) != 0;
    const bool r = (c & 1) != 0;
    double sum = 0.0;
    for (EventKind k : kAllEventKinds) {
      const double rate = neighborhood_rate(l, true, r, k, params_);
      kind_rate_[c][static_cast<int>(k)] = rate;
      sum += rate;
    }
    class_rate_[c] = sum;
  }
  if (initial.empty()) return;
  left_ = initial.left();
  right_ = initial.right();
  ensure_window(left_ - 2, right_ + 2);
  for (Site s : initial.sites()) cell(s) = kUnclassified;
  count_ = initial.size();
  for (Site s : initial.sites()) classify(s);
}

bool Simulator::occupied(Site s) const noexcept { return in_window(s) && cell(s) != kEmpty; }

double Simulator::total_rate() const noexcept {
  double total = 0.0;
  for (int c = 0; c < 4; ++c) total += static_cast<double>(members_[c].size()) * class_rate_[c];
  return total;
}

void Simulator::ensure_window(Site lo, Site hi) {
  if (!cells_.empty() && in_window(lo) && in_window(hi)) return;
  Site span_lo = lo;
  Site span_hi = hi;
  if (count_ > 0) {
    span_lo = std::min(span_lo, left_);
    span_hi = std::max(span_hi, right_);
  }
  const Site span = span_hi - span_lo + 1;
  const Site size = std::max<Site>(64, 2 * span);
  const Site new_origin = span_lo - (size - span) / 2;
  std::vector<std::int32_t> next(static_cast<std::size_t>(size), kEmpty);
  if (count_ > 0) {
    for (Site s = left_; s <= right_; ++s) {
      next[static_cast<std::size_t>(s - new_origin)] = cell(s);
    }
  }
  cells_ = std::move(next);
  origin_ = new_origin;
}

void Simulator::unclassify(Site s) {
  const std::int32_t code = cell(s);
  const int c = code & 3;
  const auto idx = static_cast<std::size_t>(code >> 2);
  auto& list = members_[c];
  const Site moved = list.back();
  list[idx] = moved;
  cell(moved) = static_cast<std::int32_t>((idx << 2) | static_cast<std::size_t>(c));
  list.pop_back();
  cell(s) = kUnclassified;
}

void Simulator::classify(Site s) {
  const int c = class_of(cell(s - 1) != kEmpty, cell(s + 1) != kEmpty);
  auto& list = members_[c];
  cell(s) = static_cast<std::int32_t>((list.size() << 2) | static_cast<std::size_t>(c));
  list.push_back(s);
}

LocalEvent Simulator::choose_event(Rng& rng) const {
  const double total = total_rate();
  double r = rng.uniform() * total;
  int chosen = -1;
  std::size_t idx = 0;
  for (int c = 0; c < 4; ++c) {
    const std::size_t n = members_[c].size();
    if (n == 0) continue;
    chosen = c;
    const double weight = static_cast<double>(n) * class_rate_[c];
    if (r < weight) {
      idx = std::min(static_cast<std::size_t>(r / class_rate_[c]), n - 1);
      break;
    }
    r -= weight;
    idx = n - 1;  // rounding fallback lands on the last member of the last class
  }
  const Site site = members_[chosen][idx];
  const auto& kr = kind_rate_[chosen];
  const double u = rng.uniform() * class_rate_[chosen];
  EventKind kind = EventKind::Branch;
  if (u < kr[0]) {
    kind = EventKind::JumpRight;
  } else if (u < kr[0] + kr[1]) {
    kind = EventKind::JumpLeft;
  }
  return {site, kind};
}

void Simulator::execute(const LocalEvent& ev) {
  if (!occupied(ev.site)) {
    throw std::invalid_argument("event on unoccupied site " + std::to_string(ev.site));
  }
  const TouchedSites touched = touched_sites(ev);
  const int first_toggle = ev.kind == EventKind::Branch ? 1 : 0;
  Site lo = ev.site - 1;
  Site hi = ev.site + 1;
  ensure_window(lo - 2, hi + 2);

  for (Site s = lo - 1; s <= hi + 1; ++s) {
    if (cell(s) >= 0) unclassify(s);
  }
  for (int k = first_toggle; k < touched.count; ++k) {
    const Site s = touched.sites[k];
    if (cell(s) == kEmpty) {
      cell(s) = kUnclassified;
      ++count_;
    } else {
      cell(s) = kEmpty;
      --count_;
    }
  }
  for (Site s = lo - 1; s <= hi + 1; ++s) {
    if (cell(s) == kUnclassified) classify(s);
  }

  if (count_ == 0) return;
  Site new_left = left_;
  Site new_right = right_;
  for (int k = first_toggle; k < touched.count; ++k) {
    const Site s = touched.sites[k];
    if (cell(s) != kEmpty) {
      new_left = std::min(new_left, s);
      new_right = std::max(new_right, s);
    }
  }
  while (cell(new_left) == kEmpty) ++new_left;
  while (cell(new_right) == kEmpty) --new_right;
  left_ = new_left;
  right_ = new_right;
}

SiteConfiguration Simulator::configuration() const {
  std::vector<Site> sites;
  sites.reserve(count_);
  if (count_ > 0) {
    for (Site s = left_; s <= right_; ++s) {
      if (cell(s) != kEmpty) sites.push_back(s);
    }
  }
  return SiteConfiguration::from_sites(std::move(sites));
}

std::vector<std::pair<Site, double>> Simulator::maintained_site_rates() const {
  std::vector<std::pair<Site, double>> out;
  out.reserve(count_);
  for (int c = 0; c < 4; ++c) {
    for (Site s : members_[c]) out.emplace_back(s, class_rate_[c]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------

Trajectory simulate(const SiteConfiguration& initial, const RateParams& params,
                    const SimParams& sim) {
  params.validate();
  sim.validate();
  Trajectory t;
  t.initial = initial;
  Simulator state(initial, params);
  Rng rng(sim.seed);
  double now = 0.0;
  while (true) {
    if (state.empty()) {
      t.status = TerminalStatus::Extinct;
      break;
    }
    if (sim.width_cap > 0 && t.event_count > 0 && state.width() >= sim.width_cap) {
      t.status = TerminalStatus::WidthCap;
      break;
    }
    if (t.event_count >= sim.max_events) {
      t.status = TerminalStatus::EventCap;
      break;
    }
    const double dt = rng.exponential(state.total_rate());
    if (now + dt > sim.max_time) {
      now = sim.max_time;
      t.status = TerminalStatus::TimeCap;
      break;
    }
    const LocalEvent ev = state.choose_event(rng);
    state.execute(ev);
    now += dt;
    ++t.event_count;
    if (sim.record) t.records.push_back({now, ev, state.width()});
  }
  t.end_time = now;
  t.final = state.configuration();
  return t;
}

SiteConfiguration replay(const Trajectory& t) {
  SiteConfiguration c = t.initial;
  for (const auto& r : t.records) c = apply_event(c, r.event);
  return c;
}

EmbeddedWidthChain extract_width_chain(const Trajectory& t) {
  EmbeddedWidthChain chain;
  chain.initial_width = width(t.initial);
  std::int64_t prev = chain.initial_width;
  for (const auto& r : t.records) {
    if (r.width_after == prev) continue;
    const std::int64_t v = r.width_after - prev;
    chain.entries.push_back({r.time, r.width_after, v});
    prev = r.width_after;
    if (r.width_after == 0 || v <= -3) {
      chain.cutoff_n = chain.entries.size();
      break;
    }
  }
  return chain;
}

int sample_Z(double b, Rng& rng) {
  if (!(b > 2.0)) throw std::invalid_argument("the increment law needs b > 2");
  const double q = 2.0 / (2.0 + b);
  const double u = rng.uniform();
  if (u < q) return -2;
  if (u < 2.0 * q) return -1;
  return 1;
}

void write_trajectory(std::ostream& os, const Trajectory& t, const RateParams& params,
                      const SimParams& sim) {
  os << "# initial=" << t.initial.to_string() << " p=" << format_real(params.p)
     << " b=" << format_real(params.b) << " seed=" << sim.seed << " max_events=" << sim.max_events
     << " max_time=" << format_real(sim.max_time) << " width_cap=" << sim.width_cap << '\n';
  for (const auto& r : t.records) {
    os << format_real(r.time) << ' ' << to_string(r.event.kind) << ' ' << r.event.site << ' '
       << r.width_after << '\n';
  }
  os << "# status=" << to_string(t.status) << " events=" << t.event_count
     << " end_time=" << format_real(t.end_time) << " final=" << t.final.to_string() << '\n';
}

}  // namespace dbarw
