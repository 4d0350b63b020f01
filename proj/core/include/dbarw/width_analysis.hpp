#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "dbarw/engine.hpp"
#include "dbarw/lattice.hpp"

namespace dbarw {

/// Three-point increment law on {-2, -1, +1}.
struct ZLaw {
  double b = 0.0;
  double p_minus2 = 0.0;
  double p_minus1 = 0.0;
  double p_plus1 = 0.0;
  double mean = 0.0;
};

/// Throws std::invalid_argument for b <= 2.
[[nodiscard]] ZLaw z_law(double b);

/// Worst-case ratios for a width decrease at one end, against the target
/// 2/(2+b) that each must stay under.
struct DecrementBounds {
  double bound_m2 = 0.0;           // annihilation at an end vs. slowest growth
  double bound_m1_empty = 0.0;     // end particle with an empty inner neighbour
  double bound_m1_occupied = 0.0;  // end particle with an occupied inner neighbour
  double target = 0.0;
  bool all_satisfied = false;
};

[[nodiscard]] DecrementBounds decrement_bounds(double p, double b);

/// True when b > 8 and p < 2/b^2, the regime in which the width chain is
/// claimed to dominate the Z-walk.
[[nodiscard]] bool domination_regime(double p, double b) noexcept;

/// E v^{-Z} for the Z-law with parameter b.
[[nodiscard]] double gamma(double v, double b) noexcept;

struct GammaSolution {
  double b = 0.0;
  double v_star = 0.0;
  double gamma_at_root = 0.0;
};

/// Largest root of gamma(v, b) = 1/2, found by bracketing from v = 4 and
/// bisecting to relative width 1e-12. Throws std::domain_error when no root
/// at or above 4 exists.
[[nodiscard]] GammaSolution solve_v_star(double b);

/// 4^(2 - w0) * 2^(1 - n). Requires w0 >= 2, n >= 1.
[[nodiscard]] double hitting_tail_bound(std::int64_t w0, std::int64_t n);

struct SumBound {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// sum_{x=1}^{u-1} 1/(x^2 (u-x)^2) against 6/u^2, with compensated
/// long-double accumulation. Requires u >= 2.
[[nodiscard]] SumBound sum_bound_check(std::int64_t u);

[[nodiscard]] double constant_C(double b);
/// C(b) - 128/(2 + b^2): what is left for the inductive step.
[[nodiscard]] double induction_target(double b);

struct CdfGap {
  std::int64_t threshold = 0;
  double cdf_v = 0.0;
  double cdf_z = 0.0;
  double slack = 0.0;
  bool pass = false;
};

struct DominationOptions {
  std::uint64_t seed = 0;
  std::int64_t max_events_per_trial = 10'000'000;
  double alpha = 0.01;  // per-threshold one-sided level of the CDF check
  double conditional_sigmas = 3.0;
  unsigned jobs = 1;
};

struct DominationReport {
  double b = 0.0;
  double p = 0.0;
  std::int64_t n = 0;
  std::int64_t trial_count = 0;
  std::int64_t censored_trials = 0;  // event cap hit before n width changes
  bool in_regime = false;

  std::map<std::int64_t, std::int64_t> v_sum_counts;
  std::map<std::int64_t, std::int64_t> z_sum_counts;
  std::vector<CdfGap> gaps;
  bool cdf_pass = false;

  double target = 0.0;  // 2/(2+b)
  std::int64_t conditional_positions = 0;
  std::int64_t count_m2 = 0;
  std::int64_t count_m1 = 0;
  double freq_m2 = 0.0;
  double freq_m1 = 0.0;
  double standard_error = 0.0;  // of a frequency equal to `target`
  bool pass_m2 = false;
  bool pass_m1 = false;

  [[nodiscard]] bool passed() const noexcept { return cdf_pass && pass_m2 && pass_m1; }
};

/// Monte Carlo comparison of V_1 + ... + V_n (the embedded width increments,
/// with fresh Z draws from the cutoff on) against an independent Z-walk of
/// the same length. Requires b > 2, n >= 1, trials >= 1.
[[nodiscard]] DominationReport domination_test(const SiteConfiguration& initial,
                                               const RateParams& params, std::int64_t n,
                                               std::int64_t trials,
                                               const DominationOptions& options = {});

void write_json(std::ostream& os, const DominationReport& r);
/// Header `threshold,cdf_v,cdf_z,slack,pass`.
void write_gaps_csv(std::ostream& os, const DominationReport& r);

}  // namespace dbarw
