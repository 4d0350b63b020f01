#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dbarw {

using Site = std::int64_t;

/// Finite, even set of occupied lattice sites, stored sorted.
///
/// Invariants: strictly increasing, even cardinality (possibly zero). The
/// width is therefore never 1.
class SiteConfiguration {
 public:
  SiteConfiguration() = default;

  /// Builds from sites in any order. Throws std::invalid_argument on
  /// duplicates or an odd number of sites.
  static SiteConfiguration from_sites(std::vector<Site> sites);

  /// Parses whitespace-separated integers (the configuration text format).
  /// An empty or blank string is the empty configuration.
  static SiteConfiguration parse(std::string_view text);

  [[nodiscard]] std::string to_string() const;

  [[nodiscard]] std::span<const Site> sites() const noexcept { return sites_; }
  [[nodiscard]] std::size_t size() const noexcept { return sites_.size(); }
  [[nodiscard]] bool empty() const noexcept { return sites_.empty(); }
  [[nodiscard]] bool occupied(Site s) const noexcept;
  [[nodiscard]] Site left() const { return sites_.front(); }
  [[nodiscard]] Site right() const { return sites_.back(); }

  /// Toggles occupancy at `s` (mod-2 addition of a unit mass).
  void toggle(Site s);

  friend bool operator==(const SiteConfiguration&, const SiteConfiguration&) = default;

 private:
  explicit SiteConfiguration(std::vector<Site> sorted) : sites_(std::move(sorted)) {}
  std::vector<Site> sites_;
};

std::ostream& operator<<(std::ostream& os, const SiteConfiguration& c);

struct RateParams {
  double p = 1.0;  // interaction factor for moves touching an occupied neighbour
  double b = 1.0;  // branching intensity

  /// Throws std::invalid_argument unless 0 < p <= 1 and b > 0.
  void validate() const;
};

enum class EventKind : std::uint8_t { JumpRight = 0, JumpLeft = 1, Branch = 2 };

inline constexpr EventKind kAllEventKinds[] = {EventKind::JumpRight, EventKind::JumpLeft,
                                               EventKind::Branch};

std::string_view to_string(EventKind k) noexcept;
/// Accepts the names produced by to_string(EventKind). Throws on anything else.
EventKind parse_event_kind(std::string_view name);

struct LocalEvent {
  Site site = 0;
  EventKind kind = EventKind::JumpRight;

  friend bool operator==(const LocalEvent&, const LocalEvent&) = default;
  friend auto operator<=>(const LocalEvent&, const LocalEvent&) = default;
};

struct RatedEvent {
  LocalEvent event;
  double rate = 0.0;
};

/// Rate of a single event given the occupation of the acting site and its two
/// neighbours. This is the one place the rate formulas live.
[[nodiscard]] double neighborhood_rate(bool left, bool self, bool right, EventKind kind,
                                       const RateParams& params) noexcept;

[[nodiscard]] double event_rate(const SiteConfiguration& config, const RateParams& params,
                                const LocalEvent& ev) noexcept;

/// Every event with positive rate, ordered by site then kind.
[[nodiscard]] std::vector<RatedEvent> enabled_events(const SiteConfiguration& config,
                                                     const RateParams& params);

[[nodiscard]] double total_rate(const SiteConfiguration& config, const RateParams& params);

/// Result of executing `ev`. Throws std::invalid_argument if the site is empty.
[[nodiscard]] SiteConfiguration apply_event(const SiteConfiguration& config, const LocalEvent& ev);

/// right - left + 1, or 0 for the empty configuration.
[[nodiscard]] std::int64_t width(const SiteConfiguration& config) noexcept;

/// Sites touched by an event (acting site first). Jumps touch two sites,
/// branchings three.
struct TouchedSites {
  Site sites[3];
  int count;
};
[[nodiscard]] TouchedSites touched_sites(const LocalEvent& ev) noexcept;

/// Height (swapping voter) representation on the half-integer lattice.
///
/// `ones` holds k for every half-integer k + 1/2 carrying height 1, with the
/// height fixed to 0 at -infinity. Particles sit exactly where the height
/// changes value.
struct HeightConfiguration {
  std::vector<Site> ones;

  friend bool operator==(const HeightConfiguration&, const HeightConfiguration&) = default;
};

[[nodiscard]] HeightConfiguration to_heights(const SiteConfiguration& config);
/// Throws std::invalid_argument unless `h.ones` is strictly increasing.
[[nodiscard]] SiteConfiguration from_heights(const HeightConfiguration& h);

}  // namespace dbarw
