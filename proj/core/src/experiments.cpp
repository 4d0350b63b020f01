#include "dbarw/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "dbarw/format.hpp"
#include "dbarw/parallel.hpp"
#include "dbarw/rng.hpp"

namespace dbarw {

std::pair<double, double> wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
  if (trials <= 0) throw std::invalid_argument("wilson_interval needs trials > 0");
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (phat + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  // The closed form leaves rounding residue at the boundary; pin it.
  const double lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, centre + half);
  return {lo, hi};
}

namespace {

std::vector<TerminalStatus> run_trials(const SiteConfiguration& initial, const RateParams& params,
                                       const SimParams& sim, std::int64_t trials,
                                       std::uint64_t master_seed, unsigned jobs) {
  params.validate();
  sim.validate();
  if (trials < 1) throw std::invalid_argument("at least one trial is required");
  std::vector<TerminalStatus> status(static_cast<std::size_t>(trials));
  parallel_for(status.size(), jobs, [&](std::size_t k) {
    SimParams local = sim;
    local.seed = derive_seed(master_seed, k);
    local.record = false;
    status[k] = simulate(initial, params, local).status;
  });
  return status;
}

}  // namespace

SurvivalEstimate estimate_survival(const SiteConfiguration& initial, const RateParams& params,
                                   const SimParams& sim, std::int64_t trials,
                                   std::uint64_t master_seed, unsigned jobs) {
  if (initial.empty()) throw std::invalid_argument("survival needs a nonempty initial configuration");
  SurvivalEstimate e;
  e.trials = trials;
  for (TerminalStatus s : run_trials(initial, params, sim, trials, master_seed, jobs)) {
    switch (s) {
      case TerminalStatus::Extinct: ++e.extinct; break;
      case TerminalStatus::WidthCap: ++e.survived; break;
      default: ++e.censored; break;
    }
  }
  e.point = static_cast<double>(e.survived) / static_cast<double>(trials);
  e.ci_low = wilson_interval(e.survived, trials).first;
  e.ci_high = wilson_interval(e.survived + e.censored, trials).second;
  return e;
}

std::vector<PhasePoint> sweep_phase(std::span<const double> p_grid, std::span<const double> b_grid,
                                    const SiteConfiguration& initial, const SimParams& sim,
                                    std::int64_t trials, std::uint64_t master_seed, unsigned jobs) {
  if (p_grid.empty() || b_grid.empty()) throw std::invalid_argument("sweep grids must be nonempty");
  std::vector<PhasePoint> out;
  out.reserve(p_grid.size() * b_grid.size());
  std::uint64_t cell = 0;
  for (double p : p_grid) {
    for (double b : b_grid) {
      out.push_back({p, b,
                     estimate_survival(initial, RateParams{p, b}, sim, trials,
                                       derive_seed(master_seed, cell), jobs)});
      ++cell;
    }
  }
  return out;
}

void write_sweep_csv(std::ostream& os, std::span<const PhasePoint> points) {
  os << "p,b,trials,extinct,survived,censored,point,ci_low,ci_high\n";
  for (const auto& pt : points) {
    const auto& e = pt.estimate;
    os << format_real(pt.p) << ',' << format_real(pt.b) << ',' << e.trials << ',' << e.extinct << ','
       << e.survived << ',' << e.censored << ',' << format_real(e.point) << ','
       << format_real(e.ci_low) << ',' << format_real(e.ci_high) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Oracle

namespace {

// Sites 0..w-1 of an anchored configuration as a bit mask.
std::uint32_t anchored_mask(const SiteConfiguration& c) {
  std::uint32_t m = 0;
  for (Site s : c.sites()) m |= 1u << static_cast<unsigned>(s - c.left());
  return m;
}

SiteConfiguration from_mask(std::uint32_t mask) {
  std::vector<Site> sites;
  for (Site s = 0; mask >> s; ++s) {
    if ((mask >> s) & 1u) sites.push_back(s);
  }
  return SiteConfiguration::from_sites(std::move(sites));
}

constexpr std::size_t kNoState = static_cast<std::size_t>(-1);

}  // namespace

std::size_t OracleModel::state_index(const SiteConfiguration& config) const {
  if (config.empty() || width(config) > window_L) {
    throw std::invalid_argument("configuration is not a transient state of the oracle window");
  }
  const std::uint32_t mask = anchored_mask(config);
  // States are stored in increasing mask order.
  auto it = std::lower_bound(states.begin(), states.end(), mask,
                             [](const SiteConfiguration& s, std::uint32_t m) {
                               return anchored_mask(s) < m;
                             });
  if (it == states.end() || anchored_mask(*it) != mask) {
    throw std::invalid_argument("configuration not found in oracle");
  }
  return static_cast<std::size_t>(it - states.begin());
}

double OracleModel::absorption_of(const SiteConfiguration& config) const {
  if (config.empty()) return 1.0;
  return absorption[state_index(config)];
}

OracleModel build_oracle(std::int64_t window_L, const RateParams& params) {
  if (window_L < 2 || window_L > 14) throw std::invalid_argument("oracle window must be in [2, 14]");
  params.validate();
  OracleModel model;
  model.window_L = window_L;
  model.params = params;

  const std::uint32_t limit = 1u << window_L;
  std::vector<std::size_t> index_of(limit, kNoState);
  for (std::uint32_t mask = 1; mask < limit; ++mask) {
    if ((mask & 1u) == 0 || std::popcount(mask) % 2 != 0) continue;
    index_of[mask] = model.states.size();
    model.states.push_back(from_mask(mask));
  }

  const auto n = static_cast<Eigen::Index>(model.states.size());
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (std::size_t s = 0; s < model.states.size(); ++s) {
    const auto& config = model.states[s];
    const auto events = enabled_events(config, params);
    double total = 0.0;
    for (const auto& e : events) total += e.rate;
    double row_sum = 0.0;
    const auto row = static_cast<Eigen::Index>(s);
    triplets.emplace_back(row, row, 1.0);
    for (const auto& e : events) {
      const double prob = e.rate / total;
      row_sum += prob;
      const SiteConfiguration next = apply_event(config, e.event);
      if (next.empty()) {
        rhs[row] += prob;
      } else if (width(next) < window_L) {
        triplets.emplace_back(row, static_cast<Eigen::Index>(index_of[anchored_mask(next)]), -prob);
      }
      // width >= L: absorbed in SURVIVE, contributes nothing
    }
    model.max_row_defect = std::max(model.max_row_defect, std::abs(row_sum - 1.0));
  }

  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
  solver.compute(a);
  if (solver.info() != Eigen::Success) throw std::runtime_error("oracle factorisation failed");
  Eigen::VectorXd x = solver.solve(rhs);
  model.residual = (a * x - rhs).lpNorm<Eigen::Infinity>();
  if (!(model.residual < 1e-12)) {
    throw std::runtime_error("oracle solve residual " + format_real(model.residual) +
                             " exceeds 1e-12");
  }
  model.absorption.assign(x.data(), x.data() + x.size());
  return model;
}

void write_oracle_csv(std::ostream& os, const OracleModel& oracle) {
  os << "state_id,config,absorption\n";
  for (std::size_t s = 0; s < oracle.states.size(); ++s) {
    os << s << ',' << oracle.states[s].to_string() << ',' << format_real(oracle.absorption[s])
       << '\n';
  }
}

OracleComparison compare_oracle_mc(const OracleModel& oracle, const SiteConfiguration& initial,
                                   const SimParams& sim, std::int64_t trials,
                                   std::uint64_t master_seed, unsigned jobs) {
  if (sim.width_cap != oracle.window_L) {
    throw std::invalid_argument("simulation width_cap must equal the oracle window");
  }
  if (initial.empty() || width(initial) > oracle.window_L) {
    throw std::invalid_argument("initial configuration does not fit the oracle window");
  }
  OracleComparison c;
  c.oracle_value = oracle.absorption_of(initial);
  c.trials = trials;
  for (TerminalStatus s : run_trials(initial, oracle.params, sim, trials, master_seed, jobs)) {
    if (s == TerminalStatus::Extinct) ++c.extinct;
    if (s == TerminalStatus::EventCap || s == TerminalStatus::TimeCap) ++c.censored;
  }
  c.frequency = static_cast<double>(c.extinct) / static_cast<double>(trials);
  std::tie(c.ci_low, c.ci_high) = wilson_interval(c.extinct, trials);
  c.agree = c.ci_low <= c.oracle_value && c.oracle_value <= c.ci_high;
  return c;
}

}  // namespace dbarw
