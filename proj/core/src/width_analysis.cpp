#include "dbarw/width_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "dbarw/format.hpp"
#include "dbarw/parallel.hpp"
#include "dbarw/rng.hpp"

namespace dbarw {

ZLaw z_law(double b) {
  if (!(b > 2.0)) throw std::invalid_argument("the increment law needs b > 2");
  ZLaw z;
  z.b = b;
  z.p_minus2 = 2.0 / (2.0 + b);
  z.p_minus1 = z.p_minus2;
  z.p_plus1 = 1.0 - 4.0 / (2.0 + b);
  z.mean = 1.0 - 10.0 / (2.0 + b);
  return z;
}

DecrementBounds decrement_bounds(double p, double b) {
  RateParams{p, b}.validate();
  DecrementBounds d;
  d.bound_m2 = 4.0 * p / (2.0 + 4.0 * p + 2.0 * p * b);
  d.bound_m1_empty = 1.0 / (2.0 + b);
  d.bound_m1_occupied = p * b / (1.0 + 2.0 * p * b);
  d.target = 2.0 / (2.0 + b);
  d.all_satisfied =
      d.bound_m2 <= d.target && d.bound_m1_empty <= d.target && d.bound_m1_occupied <= d.target;
  return d;
}

bool domination_regime(double p, double b) noexcept { return b > 8.0 && p < 2.0 / (b * b); }

double gamma(double v, double b) noexcept {
  return (2.0 * v * v + 2.0 * v + (b - 2.0) / v) / (2.0 + b);
}

GammaSolution solve_v_star(double b) {
  if (!(b > 2.0)) throw std::domain_error("no root >= 4: b must exceed 2");
  constexpr double kHalf = 0.5;
  const double c = b - 2.0;
  // gamma is convex on v > 0; its minimiser solves 4v^3 + 2v^2 = b - 2.
  double lo = 4.0;
  if (4.0 * lo * lo * lo + 2.0 * lo * lo < c) {
    double a = lo;
    double z = std::cbrt(c / 4.0) + 1.0;
    for (int it = 0; it < 200 && z - a > 1e-12 * z; ++it) {
      const double m = 0.5 * (a + z);
      (4.0 * m * m * m + 2.0 * m * m < c ? a : z) = m;
    }
    lo = a;
  }
  if (gamma(lo, b) >= kHalf) throw std::domain_error("no root >= 4 of gamma(v, b) = 1/2");
  double hi = 2.0 * lo;
  while (gamma(hi, b) <= kHalf) hi *= 2.0;
  for (int it = 0; it < 400 && hi - lo > 1e-12 * hi; ++it) {
    const double m = 0.5 * (lo + hi);
    (gamma(m, b) < kHalf ? lo : hi) = m;
  }
  GammaSolution s;
  s.b = b;
  s.v_star = 0.5 * (lo + hi);
  s.gamma_at_root = gamma(s.v_star, b);
  return s;
}

double hitting_tail_bound(std::int64_t w0, std::int64_t n) {
  if (w0 < 2 || n < 1) throw std::invalid_argument("hitting_tail_bound needs w0 >= 2 and n >= 1");
  return std::ldexp(1.0, static_cast<int>(2 * (2 - w0) + (1 - n)));
}

SumBound sum_bound_check(std::int64_t u) {
  if (u < 2) throw std::invalid_argument("sum_bound_check needs u >= 2");
  long double sum = 0.0L;
  long double comp = 0.0L;
  const auto ul = static_cast<long double>(u);
  for (std::int64_t x = 1; x < u; ++x) {
    const auto xl = static_cast<long double>(x);
    const long double d = xl * (ul - xl);
    const long double term = 1.0L / (d * d);
    const long double t = sum + term;
    comp += std::fabs(sum) >= std::fabs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  sum += comp;
  const long double rhs = 6.0L / (ul * ul);
  return {static_cast<double>(sum), static_cast<double>(rhs), sum <= rhs};
}

double constant_C(double b) {
  if (!(b > 0.0)) throw std::invalid_argument("constant_C needs b > 0");
  return 1.0 / (20.0 * b);
}

double induction_target(double b) { return constant_C(b) - 128.0 / (2.0 + b * b); }

// ---------------------------------------------------------------------------

namespace {

struct TrialOutcome {
  std::int64_t v_sum = 0;
  std::int64_t z_sum = 0;
  std::int64_t positions = 0;
  std::int64_t m2 = 0;
  std::int64_t m1 = 0;
  bool censored = false;
};

TrialOutcome run_domination_trial(const SiteConfiguration& initial, const RateParams& params,
                                  std::int64_t n, std::int64_t max_events, std::uint64_t seed) {
  TrialOutcome out;
  Rng dynamics(derive_seed(seed, 0));
  Rng substitutes(derive_seed(seed, 1));
  Rng reference(derive_seed(seed, 2));

  Simulator state(initial, params);
  std::int64_t prev = state.width();
  std::int64_t observed = 0;  // increments taken from the process (indices < cutoff)
  bool cut = state.empty();   // nothing to observe from the empty start
  std::int64_t events = 0;
  while (!cut && observed < n) {
    if (events >= max_events) {
      out.censored = true;
      break;
    }
    state.execute(state.choose_event(dynamics));
    ++events;
    const std::int64_t w = state.width();
    if (w == prev) continue;
    const std::int64_t v = w - prev;
    prev = w;
    if (w == 0 || v <= -3) {
      cut = true;  // this index is the cutoff; it and all later ones are Z draws
      break;
    }
    ++observed;
    out.v_sum += v;
    ++out.positions;
    if (v == -2) ++out.m2;
    if (v == -1) ++out.m1;
  }
  for (std::int64_t k = observed; k < n; ++k) out.v_sum += sample_Z(params.b, substitutes);
  for (std::int64_t k = 0; k < n; ++k) out.z_sum += sample_Z(params.b, reference);
  return out;
}

}  // namespace

DominationReport domination_test(const SiteConfiguration& initial, const RateParams& params,
                                 std::int64_t n, std::int64_t trials,
                                 const DominationOptions& options) {
  params.validate();
  if (!(params.b > 2.0)) throw std::invalid_argument("domination_test needs b > 2");
  if (n < 1) throw std::invalid_argument("domination_test needs n >= 1");
  if (trials < 1) throw std::invalid_argument("domination_test needs at least one trial");
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }

  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(trials));
  parallel_for(outcomes.size(), options.jobs, [&](std::size_t k) {
    outcomes[k] = run_domination_trial(initial, params, n, options.max_events_per_trial,
                                       derive_seed(options.seed, k));
  });

  DominationReport r;
  r.b = params.b;
  r.p = params.p;
  r.n = n;
  r.trial_count = trials;
  r.in_regime = domination_regime(params.p, params.b);
  for (const auto& o : outcomes) {
    ++r.v_sum_counts[o.v_sum];
    ++r.z_sum_counts[o.z_sum];
    r.conditional_positions += o.positions;
    r.count_m2 += o.m2;
    r.count_m1 += o.m1;
    if (o.censored) ++r.censored_trials;
  }

  // One-sided two-sample DKW: P{sup(F_v - F_z) - sup(true gap) > eps} <= exp(-2 m n eps^2/(m+n)).
  const double m = static_cast<double>(trials);
  const double slack = std::sqrt(std::log(1.0 / options.alpha) * (m + m) / (2.0 * m * m));
  const std::int64_t lo = std::min(r.v_sum_counts.begin()->first, r.z_sum_counts.begin()->first);
  const std::int64_t hi = std::max(r.v_sum_counts.rbegin()->first, r.z_sum_counts.rbegin()->first);
  std::int64_t acc_v = 0;
  std::int64_t acc_z = 0;
  r.cdf_pass = true;
  for (std::int64_t x = lo; x <= hi; ++x) {
    if (auto it = r.v_sum_counts.find(x); it != r.v_sum_counts.end()) acc_v += it->second;
    if (auto it = r.z_sum_counts.find(x); it != r.z_sum_counts.end()) acc_z += it->second;
    CdfGap g;
    g.threshold = x;
    g.cdf_v = static_cast<double>(acc_v) / m;
    g.cdf_z = static_cast<double>(acc_z) / m;
    g.slack = slack;
    g.pass = g.cdf_v <= g.cdf_z + slack;
    r.cdf_pass = r.cdf_pass && g.pass;
    r.gaps.push_back(g);
  }

  r.target = 2.0 / (2.0 + params.b);
  if (r.conditional_positions > 0) {
    const double pos = static_cast<double>(r.conditional_positions);
    r.freq_m2 = static_cast<double>(r.count_m2) / pos;
    r.freq_m1 = static_cast<double>(r.count_m1) / pos;
    r.standard_error = std::sqrt(r.target * (1.0 - r.target) / pos);
  }
  const double limit = r.target + options.conditional_sigmas * r.standard_error;
  r.pass_m2 = r.freq_m2 <= limit;
  r.pass_m1 = r.freq_m1 <= limit;
  return r;
}

void write_json(std::ostream& os, const DominationReport& r) {
  nlohmann::ordered_json j;
  j["b"] = r.b;
  j["p"] = r.p;
  j["n"] = r.n;
  j["trial_count"] = r.trial_count;
  j["censored_trials"] = r.censored_trials;
  j["in_regime"] = r.in_regime;
  j["cdf_pass"] = r.cdf_pass;
  auto& gaps = j["gaps"] = nlohmann::ordered_json::array();
  for (const auto& g : r.gaps) {
    gaps.push_back({{"threshold", g.threshold},
                    {"cdf_v", g.cdf_v},
                    {"cdf_z", g.cdf_z},
                    {"slack", g.slack},
                    {"pass", g.pass}});
  }
  j["target"] = r.target;
  j["conditional_positions"] = r.conditional_positions;
  j["count_m2"] = r.count_m2;
  j["count_m1"] = r.count_m1;
  j["freq_m2"] = r.freq_m2;
  j["freq_m1"] = r.freq_m1;
  j["standard_error"] = r.standard_error;
  j["pass_m2"] = r.pass_m2;
  j["pass_m1"] = r.pass_m1;
  j["passed"] = r.passed();
  os << j.dump(2) << '\n';
}

void write_gaps_csv(std::ostream& os, const DominationReport& r) {
  os << "threshold,cdf_v,cdf_z,slack,pass\n";
  for (const auto& g : r.gaps) {
    os << g.threshold << ',' << format_real(g.cdf_v) << ',' << format_real(g.cdf_z) << ','
       << format_real(g.slack) << ',' << (g.pass ? 1 : 0) << '\n';
  }
}

}  // namespace dbarw
