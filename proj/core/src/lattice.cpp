#include "dbarw/lattice.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dbarw {

SiteConfiguration SiteConfiguration::from_sites(std::vector<Site> sites) {
  std::sort(sites.begin(), sites.end());
  if (std::adjacent_find(sites.begin(), sites.end()) != sites.end()) {
    throw std::invalid_argument("configuration contains a duplicate site");
  }
  if (sites.size() % 2 != 0) {
    throw std::invalid_argument("configuration must hold an even number of particles");
  }
  return SiteConfiguration(std::move(sites));
}

SiteConfiguration SiteConfiguration::parse(std::string_view text) {
  std::vector<Site> sites;
  std::size_t pos = 0;
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  while (pos < text.size()) {
    while (pos < text.size() && is_space(text[pos])) ++pos;
    if (pos == text.size()) break;
    std::size_t end = pos;
    while (end < text.size() && !is_space(text[end])) ++end;
    Site value = 0;
    const char* first = text.data() + pos;
    const char* last = text.data() + end;
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
      throw std::invalid_argument("not an integer site: '" + std::string(text.substr(pos, end - pos)) +
                                  "'");
    }
    sites.push_back(value);
    pos = end;
  }
  return from_sites(std::move(sites));
}

std::string SiteConfiguration::to_string() const {
  std::string out;
  for (std::size_t k = 0; k < sites_.size(); ++k) {
    if (k) out += ' ';
    out += std::to_string(sites_[k]);
  }
  return out;
}

bool SiteConfiguration::occupied(Site s) const noexcept {
  return std::binary_search(sites_.begin(), sites_.end(), s);
}

void SiteConfiguration::toggle(Site s) {
  auto it = std::lower_bound(sites_.begin(), sites_.end(), s);
  if (it != sites_.end() && *it == s) {
    sites_.erase(it);
  } else {
    sites_.insert(it, s);
  }
}

std::ostream& operator<<(std::ostream& os, const SiteConfiguration& c) {
  return os << '{' << c.to_string() << '}';
}

void RateParams::validate() const {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in (0, 1]");
  if (!(b > 0.0)) throw std::invalid_argument("b must be positive");
}

std::string_view to_string(EventKind k) noexcept {
  switch (k) {
    case EventKind::JumpRight: return "jump_right";
    case EventKind::JumpLeft: return "jump_left";
    case EventKind::Branch: return "branch";
  }
  return "?";
}

EventKind parse_event_kind(std::string_view name) {
  for (EventKind k : kAllEventKinds) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown event kind: " + std::string(name));
}

double neighborhood_rate(bool left, bool self, bool right, EventKind kind,
                         const RateParams& params) noexcept {
  // Occupations are 0/1, so the rate formulas reduce to picking 1, p, b or
  // p*b. Selecting the case avoids computing 1 - (1 - p), which loses
  // relative precision when p is tiny.
  if (!self) return 0.0;
  switch (kind) {
    case EventKind::JumpRight: return right ? params.p : 1.0;
    case EventKind::JumpLeft: return left ? params.p : 1.0;
    case EventKind::Branch: return (left || right) ? params.p * params.b : params.b;
  }
  return 0.0;
}

double event_rate(const SiteConfiguration& config, const RateParams& params,
                  const LocalEvent& ev) noexcept {
  const bool self = config.occupied(ev.site);
  if (!self) return 0.0;
  return neighborhood_rate(config.occupied(ev.site - 1), true, config.occupied(ev.site + 1), ev.kind,
                           params);
}

std::vector<RatedEvent> enabled_events(const SiteConfiguration& config, const RateParams& params) {
  std::vector<RatedEvent> out;
  out.reserve(3 * config.size());
  const auto sites = config.sites();
  for (std::size_t k = 0; k < sites.size(); ++k) {
    const bool left = k > 0 && sites[k - 1] == sites[k] - 1;
    const bool right = k + 1 < sites.size() && sites[k + 1] == sites[k] + 1;
    for (EventKind kind : kAllEventKinds) {
      const double r = neighborhood_rate(left, true, right, kind, params);
      if (r > 0.0) out.push_back({{sites[k], kind}, r});
    }
  }
  return out;
}

double total_rate(const SiteConfiguration& config, const RateParams& params) {
  double sum = 0.0;
  for (const auto& e : enabled_events(config, params)) sum += e.rate;
  return sum;
}

TouchedSites touched_sites(const LocalEvent& ev) noexcept {
  switch (ev.kind) {
    case EventKind::JumpRight: return {{ev.site, ev.site + 1, 0}, 2};
    case EventKind::JumpLeft: return {{ev.site, ev.site - 1, 0}, 2};
    case EventKind::Branch: return {{ev.site, ev.site - 1, ev.site + 1}, 3};
  }
  return {{0, 0, 0}, 0};
}

SiteConfiguration apply_event(const SiteConfiguration& config, const LocalEvent& ev) {
  if (!config.occupied(ev.site)) {
    throw std::invalid_argument("event on unoccupied site " + std::to_string(ev.site));
  }
  SiteConfiguration next = config;
  const TouchedSites t = touched_sites(ev);
  // A branch keeps the parent; a jump removes it from the origin.
  for (int k = (ev.kind == EventKind::Branch ? 1 : 0); k < t.count; ++k) next.toggle(t.sites[k]);
  return next;
}

std::int64_t width(const SiteConfiguration& config) noexcept {
  if (config.empty()) return 0;
  return config.right() - config.left() + 1;
}

HeightConfiguration to_heights(const SiteConfiguration& config) {
  HeightConfiguration h;
  const auto sites = config.sites();
  for (std::size_t k = 0; k + 1 < sites.size(); k += 2) {
    for (Site s = sites[k]; s < sites[k + 1]; ++s) h.ones.push_back(s);
  }
  return h;
}

SiteConfiguration from_heights(const HeightConfiguration& h) {
  if (std::adjacent_find(h.ones.begin(), h.ones.end(), std::greater_equal<>{}) != h.ones.end()) {
    throw std::invalid_argument("height ones must be strictly increasing");
  }
  std::vector<Site> sites;
  for (std::size_t k = 0; k < h.ones.size(); ++k) {
    if (k == 0 || h.ones[k - 1] + 1 != h.ones[k]) sites.push_back(h.ones[k]);
    if (k + 1 == h.ones.size() || h.ones[k] + 1 != h.ones[k + 1]) sites.push_back(h.ones[k] + 1);
  }
  return SiteConfiguration::from_sites(std::move(sites));
}

}  // namespace dbarw
