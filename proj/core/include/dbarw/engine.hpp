#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "dbarw/lattice.hpp"
#include "dbarw/rng.hpp"

namespace dbarw {

struct SimParams {
  std::uint64_t seed = 0;
  std::int64_t max_events = 1'000'000;
  double max_time = std::numeric_limits<double>::infinity();
  std::int64_t width_cap = 0;  // 0 disables the cap
  bool record = true;          // keep per-event records in the trajectory

  /// Throws std::invalid_argument when the caps are malformed.
  void validate() const;
};

enum class TerminalStatus : std::uint8_t { Extinct, TimeCap, EventCap, WidthCap };
std::string_view to_string(TerminalStatus s) noexcept;

struct JumpRecord {
  double time = 0.0;
  LocalEvent event;
  std::int64_t width_after = 0;

  friend bool operator==(const JumpRecord&, const JumpRecord&) = default;
};

struct Trajectory {
  SiteConfiguration initial;
  std::vector<JumpRecord> records;
  TerminalStatus status = TerminalStatus::Extinct;
  SiteConfiguration final;
  std::int64_t event_count = 0;  // equals records.size() when recording
  double end_time = 0.0;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct StepResult {
  double holding_time;
  LocalEvent event;
};

/// One step of the exponential race from `config`, straight from the rate
/// table. Throws std::invalid_argument on the empty configuration.
[[nodiscard]] StepResult step(const SiteConfiguration& config, const RateParams& params, Rng& rng);

/// Incrementally maintained process state.
///
/// Occupied sites live in a dense window that re-centres as the population
/// moves. Every particle belongs to one of four classes keyed by the
/// occupation of its two neighbours; all particles in a class share the same
/// event rates, so the next event is picked in O(1) and an event only
/// reclassifies particles within distance 2 of the sites it touched.
class Simulator {
 public:
  Simulator(const SiteConfiguration& initial, const RateParams& params);

  [[nodiscard]] bool empty() const noexcept { return count_ == 0; }
  [[nodiscard]] std::size_t particle_count() const noexcept { return count_; }
  [[nodiscard]] Site left() const noexcept { return left_; }
  [[nodiscard]] Site right() const noexcept { return right_; }
  [[nodiscard]] std::int64_t width() const noexcept { return count_ ? right_ - left_ + 1 : 0; }
  [[nodiscard]] bool occupied(Site s) const noexcept;
  [[nodiscard]] const RateParams& params() const noexcept { return params_; }

  [[nodiscard]] double total_rate() const noexcept;

  /// Draws the next event proportionally to its rate. Requires !empty().
  [[nodiscard]] LocalEvent choose_event(Rng& rng) const;

  /// Executes `ev`; throws std::invalid_argument if its site is empty.
  void execute(const LocalEvent& ev);

  [[nodiscard]] SiteConfiguration configuration() const;

  /// Total rate of every particle as currently maintained, sorted by site.
  [[nodiscard]] std::vector<std::pair<Site, double>> maintained_site_rates() const;

 private:
  static constexpr std::int32_t kEmpty = -1;
  static constexpr std::int32_t kUnclassified = -2;

  static int class_of(bool left, bool right) noexcept { return (left ? 2 : 0) | (right ? 1 : 0); }

  std::int32_t& cell(Site s) noexcept { return cells_[static_cast<std::size_t>(s - origin_)]; }
  std::int32_t cell(Site s) const noexcept { return cells_[static_cast<std::size_t>(s - origin_)]; }
  bool in_window(Site s) const noexcept {
    return s >= origin_ && s < origin_ + static_cast<Site>(cells_.size());
  }
  void ensure_window(Site lo, Site hi);
  void unclassify(Site s);
  void classify(Site s);

  RateParams params_;
  std::array<std::array<double, 3>, 4> kind_rate_{};
  std::array<double, 4> class_rate_{};
  std::array<std::vector<Site>, 4> members_;
  // -1 empty, -2 occupied but unclassified (transient), else (index << 2) | class.
  std::vector<std::int32_t> cells_;
  Site origin_ = 0;
  Site left_ = 0;
  Site right_ = 0;
  std::size_t count_ = 0;
};

/// Runs the process from `initial` until extinction or a cap. Caps are
/// checked after each event, never at time zero.
[[nodiscard]] Trajectory simulate(const SiteConfiguration& initial, const RateParams& params,
                                  const SimParams& sim);

/// Replays the records of `t` from its initial configuration.
[[nodiscard]] SiteConfiguration replay(const Trajectory& t);

struct WidthChainEntry {
  double tau = 0.0;
  std::int64_t w = 0;
  std::int64_t v = 0;

  friend bool operator==(const WidthChainEntry&, const WidthChainEntry&) = default;
};

/// Width values at the successive times the width changes, with the
/// increments. `cutoff_n` is the 1-based index of the first entry that reaches
/// width 0 or drops by 3 or more; nothing after it is emitted.
struct EmbeddedWidthChain {
  std::int64_t initial_width = 0;
  std::vector<WidthChainEntry> entries;
  std::optional<std::size_t> cutoff_n;
};

[[nodiscard]] EmbeddedWidthChain extract_width_chain(const Trajectory& t);

/// Increment law that the embedded width chain dominates: -2 and -1 each with
/// probability 2/(2+b), +1 otherwise. Throws std::invalid_argument for b <= 2.
[[nodiscard]] int sample_Z(double b, Rng& rng);

/// Writes `time kind site width_after` lines after a `#` header carrying the
/// initial configuration and parameters.
void write_trajectory(std::ostream& os, const Trajectory& t, const RateParams& params,
                      const SimParams& sim);

}  // namespace dbarw
