#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "dbarw/engine.hpp"
#include "dbarw/lattice.hpp"

namespace dbarw {

inline constexpr double kZ95 = 1.959963984540054;

/// Wilson score interval for `successes` out of `trials`.
[[nodiscard]] std::pair<double, double> wilson_interval(std::int64_t successes, std::int64_t trials,
                                                        double z = kZ95);

/// Survival counts from independent runs. Reaching the width cap counts as
/// survival; runs stopped by the event or time cap are censored.
///
/// `point` is survived / trials. `ci_low` is the Wilson lower bound with
/// censored runs counted as extinct, `ci_high` the Wilson upper bound with
/// them counted as survived.
struct SurvivalEstimate {
  std::int64_t trials = 0;
  std::int64_t extinct = 0;
  std::int64_t survived = 0;
  std::int64_t censored = 0;
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Trial k runs with seed derive_seed(master_seed, k); `sim.seed` is ignored.
[[nodiscard]] SurvivalEstimate estimate_survival(const SiteConfiguration& initial,
                                                 const RateParams& params, const SimParams& sim,
                                                 std::int64_t trials, std::uint64_t master_seed,
                                                 unsigned jobs = 1);

struct PhasePoint {
  double p = 0.0;
  double b = 0.0;
  SurvivalEstimate estimate;
};

/// Cross product of the grids in row-major (p outer, b inner) order; cell c
/// uses master seed derive_seed(master_seed, c).
[[nodiscard]] std::vector<PhasePoint> sweep_phase(std::span<const double> p_grid,
                                                  std::span<const double> b_grid,
                                                  const SiteConfiguration& initial,
                                                  const SimParams& sim, std::int64_t trials,
                                                  std::uint64_t master_seed, unsigned jobs = 1);

/// Header `p,b,trials,extinct,survived,censored,point,ci_low,ci_high`.
void write_sweep_csv(std::ostream& os, std::span<const PhasePoint> points);

/// Exact absorption probabilities of the width-truncated process seen from
/// its leftmost particle.
///
/// States are the even configurations anchored at 0 with width <= L. Every
/// transition into the empty configuration is absorbed in EXTINCT; every
/// transition into width >= L is absorbed in SURVIVE. This is the same
/// functional a simulation with width_cap = L measures.
struct OracleModel {
  std::int64_t window_L = 0;
  RateParams params;
  std::vector<SiteConfiguration> states;
  std::vector<double> absorption;  // probability of ending in EXTINCT
  double residual = 0.0;           // max-norm residual of the linear solve
  double max_row_defect = 0.0;     // max |sum of jump probabilities - 1|

  /// Absorption probability from `config` (translated to its anchor).
  /// 1 for the empty configuration; throws std::invalid_argument if the width
  /// exceeds the window.
  [[nodiscard]] double absorption_of(const SiteConfiguration& config) const;
  [[nodiscard]] std::size_t state_index(const SiteConfiguration& config) const;
};

/// Requires 2 <= window_L <= 14. Throws std::runtime_error if the solve does
/// not reach a residual below 1e-12.
[[nodiscard]] OracleModel build_oracle(std::int64_t window_L, const RateParams& params);

/// Header `state_id,config,absorption`.
void write_oracle_csv(std::ostream& os, const OracleModel& oracle);

struct OracleComparison {
  double oracle_value = 0.0;
  std::int64_t trials = 0;
  std::int64_t extinct = 0;
  std::int64_t censored = 0;
  double frequency = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool agree = false;
};

/// Monte Carlo extinction frequency with width_cap = L against the oracle.
/// Throws std::invalid_argument if sim.width_cap differs from the oracle
/// window or `initial` does not fit in it.
[[nodiscard]] OracleComparison compare_oracle_mc(const OracleModel& oracle,
                                                 const SiteConfiguration& initial,
                                                 const SimParams& sim, std::int64_t trials,
                                                 std::uint64_t master_seed, unsigned jobs = 1);

}  // namespace dbarw
