#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "dbarw/engine.hpp"
#include "dbarw/lattice.hpp"

namespace dbarw {

/// Offsets i (from the leftmost particle) of every i-gap: offset i-1
/// occupied, offset i vacant, and offset i+1 or i+2 occupied. Empty for the
/// empty configuration.
[[nodiscard]] std::vector<std::int64_t> detect_i_gaps(const SiteConfiguration& config);

/// Absolute vacant sites that carry an i-gap.
[[nodiscard]] std::vector<Site> gap_sites(const SiteConfiguration& config);

/// Two particle groups, the first entirely to the left of the second.
struct LabeledConfiguration {
  SiteConfiguration group1;
  SiteConfiguration group2;

  /// Throws std::invalid_argument unless the groups are separated by at
  /// least one vacant site.
  void validate() const;
  [[nodiscard]] SiteConfiguration merged() const;
};

/// Splits at an i-gap: particles left of offset i form group 1, the rest
/// group 2. Throws std::invalid_argument if `i` is not a gap offset or either
/// side holds an odd number of particles.
[[nodiscard]] LabeledConfiguration split_at_gap(const SiteConfiguration& config, std::int64_t i);

enum class SeparationStatus : std::uint8_t { Separated, Met, Censored };
std::string_view to_string(SeparationStatus s) noexcept;

struct SeparationVerdict {
  SeparationStatus status = SeparationStatus::Censored;
  std::optional<double> first_meeting_time;
};

struct LabeledRecord {
  double time = 0.0;
  LocalEvent event;
  int group = 0;  // 1 or 2 before the groups meet, 0 afterwards
  std::int64_t width_after = 0;

  friend bool operator==(const LabeledRecord&, const LabeledRecord&) = default;
};

struct LabeledTrajectory {
  LabeledConfiguration initial;
  std::vector<LabeledRecord> records;
  TerminalStatus status = TerminalStatus::Extinct;
  std::optional<std::size_t> meeting_index;  // index of the record that made the groups adjacent
  std::optional<double> meeting_time;
  SiteConfiguration final;
  std::int64_t event_count = 0;
  double end_time = 0.0;
};

/// Probability of each (group, event) being the next transition of the
/// joint process: choose group a with probability q_a / (q_1 + q_2), then an
/// event of that group in proportion to its own rates.
struct LabeledStepProbability {
  int group = 0;
  LocalEvent event;
  double probability = 0.0;
};
[[nodiscard]] std::vector<LabeledStepProbability> labeled_step_distribution(
    const LabeledConfiguration& labeled, const RateParams& params);

/// Runs the two groups as independent processes on a shared clock until a
/// particle of one becomes adjacent to a particle of the other. From then on
/// the union evolves as a single process driven by a fresh random stream.
/// Offspring inherit the label of their parent.
[[nodiscard]] LabeledTrajectory simulate_labeled(const LabeledConfiguration& labeled,
                                                 const RateParams& params, const SimParams& sim);

/// Met if the groups ever became adjacent, Separated if they never did and
/// both died out, Censored otherwise.
[[nodiscard]] SeparationVerdict check_separation(const LabeledTrajectory& t);

struct HorizonPolicy {
  double horizon = std::numeric_limits<double>::infinity();  // ignore gaps created later
};

struct SeparationCount {
  std::int64_t k_lower = 0;         // certified positive separation times
  std::int64_t candidates = 0;      // gaps created by some transition within the horizon
  std::int64_t undecided = 0;       // candidates neither certified nor ruled out
  bool censored = false;            // trajectory did not die out within the horizon
};

/// Scans every transition that creates a gap, labels the particles on each
/// side and replays the rest of the trajectory. A gap is certified as
/// permanently separating when one side dies out before the two sides ever
/// become adjacent. Counts distinct transition times with a certified gap.
[[nodiscard]] SeparationCount count_separation_times(const Trajectory& t,
                                                     const HorizonPolicy& policy = {});

/// Labelled dump: `time kind site group width_after`.
void write_labeled_trajectory(std::ostream& os, const LabeledTrajectory& t,
                              const RateParams& params, const SimParams& sim);

}  // namespace dbarw
