#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "dbarw/engine.hpp"
#include "dbarw/experiments.hpp"
#include "dbarw/format.hpp"
#include "dbarw/lattice.hpp"
#include "dbarw/separation.hpp"
#include "dbarw/width_analysis.hpp"

namespace dbarw::cli {

namespace {

using Json = nlohmann::ordered_json;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

double parse_real(std::string_view s) {
  std::string str(s);
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(str, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != str.size()) throw std::invalid_argument("not a number: '" + str + "'");
  return x;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = s.find(sep, start);
    parts.push_back(s.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return parts;
}

SimParams sim_params(const RunSpec& s) {
  SimParams sim;
  sim.seed = s.seed;
  sim.max_events = s.max_events;
  sim.max_time = s.max_time;
  sim.width_cap = s.width_cap;
  return sim;
}

std::string format_or(const RunSpec& s, const char* fallback) {
  const std::string f = s.format.empty() ? fallback : s.format;
  if (f != "csv" && f != "json") throw UsageError("--format must be csv or json");
  return f;
}

Json estimate_json(const SurvivalEstimate& e) {
  return Json{{"trials", e.trials},   {"extinct", e.extinct}, {"survived", e.survived},
              {"censored", e.censored}, {"point", e.point},   {"ci_low", e.ci_low},
              {"ci_high", e.ci_high}};
}

// Every command writes into `os` and throws on failure.

void cmd_simulate(const RunSpec& s, std::ostream& os) {
  const auto init = SiteConfiguration::parse(s.init);
  const RateParams params{s.p, s.b};
  const SimParams sim = sim_params(s);
  params.validate();
  sim.validate();
  const std::string fmt = format_or(s, "csv");
  const Trajectory t = simulate(init, params, sim);
  if (fmt == "csv") {
    write_trajectory(os, t, params, sim);
    return;
  }
  Json j{{"initial", t.initial.to_string()},
         {"status", std::string(to_string(t.status))},
         {"events", t.event_count},
         {"end_time", t.end_time},
         {"final_width", width(t.final)},
         {"final", t.final.to_string()}};
  os << j.dump(2) << '\n';
}

void cmd_survival(const RunSpec& s, std::ostream& os) {
  const auto init = SiteConfiguration::parse(s.init);
  const RateParams params{s.p, s.b};
  const SimParams sim = sim_params(s);
  params.validate();
  sim.validate();
  if (init.empty()) throw UsageError("--init must be nonempty for survival estimation");
  if (s.trials < 1) throw UsageError("--trials must be at least 1");
  const std::string fmt = format_or(s, "json");
  const auto e = estimate_survival(init, params, sim, s.trials, s.seed, s.jobs);
  if (fmt == "csv") {
    const PhasePoint pt{s.p, s.b, e};
    write_sweep_csv(os, std::span(&pt, 1));
    return;
  }
  Json j{{"p", s.p}, {"b", s.b}};
  j.update(estimate_json(e));
  os << j.dump(2) << '\n';
}

void cmd_sweep(const RunSpec& s, std::ostream& os) {
  const auto init = SiteConfiguration::parse(s.init);
  const auto p_grid = parse_grid(s.p_grid.empty() ? format_real(s.p) : s.p_grid);
  const auto b_grid = parse_grid(s.b_grid.empty() ? format_real(s.b) : s.b_grid);
  for (double p : p_grid) {
    for (double b : b_grid) RateParams{p, b}.validate();
  }
  const SimParams sim = sim_params(s);
  sim.validate();
  if (init.empty()) throw UsageError("--init must be nonempty for a sweep");
  if (s.trials < 1) throw UsageError("--trials must be at least 1");
  const std::string fmt = format_or(s, "csv");
  const auto points = sweep_phase(p_grid, b_grid, init, sim, s.trials, s.seed, s.jobs);
  if (fmt == "csv") {
    write_sweep_csv(os, points);
    return;
  }
  Json rows = Json::array();
  for (const auto& pt : points) {
    Json row{{"p", pt.p}, {"b", pt.b}};
    row.update(estimate_json(pt.estimate));
    rows.push_back(row);
  }
  os << rows.dump(2) << '\n';
}

void cmd_width_chain(const RunSpec& s, std::ostream& os) {
  const auto init = SiteConfiguration::parse(s.init);
  const RateParams params{s.p, s.b};
  const SimParams sim = sim_params(s);
  params.validate();
  sim.validate();
  const std::string fmt = format_or(s, "csv");
  const auto chain = extract_width_chain(simulate(init, params, sim));
  if (fmt == "csv") {
    os << "n,tau,w,v\n";
    for (std::size_t k = 0; k < chain.entries.size(); ++k) {
      const auto& e = chain.entries[k];
      os << k + 1 << ',' << format_real(e.tau) << ',' << e.w << ',' << e.v << '\n';
    }
    return;
  }
  Json entries = Json::array();
  for (const auto& e : chain.entries) entries.push_back({{"tau", e.tau}, {"w", e.w}, {"v", e.v}});
  Json j{{"initial_width", chain.initial_width}, {"entries", entries}};
  j["cutoff_n"] = chain.cutoff_n ? Json(*chain.cutoff_n) : Json(nullptr);
  os << j.dump(2) << '\n';
}

void cmd_domination(const RunSpec& s, std::ostream& os) {
  const auto init = SiteConfiguration::parse(s.init);
  const RateParams params{s.p, s.b};
  params.validate();
  if (!(s.b > 2.0)) throw UsageError("domination needs --b > 2");
  if (s.n < 1) throw UsageError("--n must be at least 1");
  if (s.trials < 1) throw UsageError("--trials must be at least 1");
  if (s.max_events < 1) throw UsageError("--max-events must be at least 1");
  const std::string fmt = format_or(s, "json");
  DominationOptions opt;
  opt.seed = s.seed;
  opt.max_events_per_trial = s.max_events;
  opt.jobs = s.jobs;
  const auto report = domination_test(init, params, s.n, s.trials, opt);
  if (fmt == "csv") {
    write_gaps_csv(os, report);
  } else {
    write_json(os, report);
  }
}

void cmd_separation(const RunSpec& s, std::ostream& os) {
  const auto init = SiteConfiguration::parse(s.init);
  const RateParams params{s.p, s.b};
  const SimParams sim = sim_params(s);
  params.validate();
  sim.validate();
  const std::string fmt = format_or(s, "json");
  if (s.split) {
    const auto labeled = split_at_gap(init, *s.split);
    const auto t = simulate_labeled(labeled, params, sim);
    if (fmt == "csv") {
      write_labeled_trajectory(os, t, params, sim);
      return;
    }
    const auto verdict = check_separation(t);
    Json j{{"group1", labeled.group1.to_string()},
           {"group2", labeled.group2.to_string()},
           {"status", std::string(to_string(t.status))},
           {"verdict", std::string(to_string(verdict.status))}};
    j["first_meeting_time"] =
        verdict.first_meeting_time ? Json(*verdict.first_meeting_time) : Json(nullptr);
    j["events"] = t.event_count;
    os << j.dump(2) << '\n';
    return;
  }
  if (s.trials < 1) throw UsageError("--trials must be at least 1");
  std::map<std::int64_t, std::int64_t> histogram;
  std::int64_t censored = 0;
  std::int64_t extinct = 0;
  for (std::int64_t k = 0; k < s.trials; ++k) {
    SimParams local = sim;
    local.seed = derive_seed(s.seed, static_cast<std::uint64_t>(k));
    const Trajectory t = simulate(init, params, local);
    const auto count = count_separation_times(t);
    ++histogram[count.k_lower];
    if (count.censored) ++censored;
    if (t.status == TerminalStatus::Extinct) ++extinct;
  }
  if (fmt == "csv") {
    os << "k_lower,trials\n";
    for (const auto& [k, c] : histogram) os << k << ',' << c << '\n';
    return;
  }
  Json hist = Json::array();
  for (const auto& [k, c] : histogram) hist.push_back({{"k_lower", k}, {"trials", c}});
  Json j{{"trials", s.trials}, {"extinct", extinct}, {"censored", censored}, {"k_histogram", hist}};
  os << j.dump(2) << '\n';
}

void cmd_oracle(const RunSpec& s, std::ostream& os) {
  const RateParams params{s.p, s.b};
  params.validate();
  if (s.window < 2 || s.window > 14) throw UsageError("--window must lie in [2, 14]");
  const std::string fmt = format_or(s, s.compare ? "json" : "csv");
  SiteConfiguration init;
  SimParams sim = sim_params(s);
  if (s.compare) {
    init = SiteConfiguration::parse(s.init);
    if (init.empty() || width(init) > s.window) {
      throw UsageError("--init must be nonempty and fit in the oracle window");
    }
    if (s.trials < 1) throw UsageError("--trials must be at least 1");
    sim.width_cap = s.window;
    sim.validate();
  }
  const auto oracle = build_oracle(s.window, params);
  if (!s.compare) {
    if (fmt == "csv") {
      write_oracle_csv(os, oracle);
      return;
    }
    Json states = Json::array();
    for (std::size_t k = 0; k < oracle.states.size(); ++k) {
      states.push_back({{"state_id", k},
                        {"config", oracle.states[k].to_string()},
                        {"absorption", oracle.absorption[k]}});
    }
    Json j{{"window", oracle.window_L}, {"residual", oracle.residual},
           {"max_row_defect", oracle.max_row_defect}, {"states", states}};
    os << j.dump(2) << '\n';
    return;
  }
  const auto c = compare_oracle_mc(oracle, init, sim, s.trials, s.seed, s.jobs);
  if (fmt == "csv") {
    os << "oracle,trials,extinct,censored,frequency,ci_low,ci_high,agree\n"
       << format_real(c.oracle_value) << ',' << c.trials << ',' << c.extinct << ',' << c.censored
       << ',' << format_real(c.frequency) << ',' << format_real(c.ci_low) << ','
       << format_real(c.ci_high) << ',' << (c.agree ? 1 : 0) << '\n';
    return;
  }
  Json j{{"window", oracle.window_L}, {"initial", init.to_string()},
         {"oracle", c.oracle_value},  {"trials", c.trials},
         {"extinct", c.extinct},      {"censored", c.censored},
         {"frequency", c.frequency},  {"ci_low", c.ci_low},
         {"ci_high", c.ci_high},      {"agree", c.agree}};
  os << j.dump(2) << '\n';
}

void cmd_gamma(const RunSpec& s, std::ostream& os) {
  if (!(s.b > 2.0)) throw UsageError("gamma needs --b > 2");
  if (s.v && !(*s.v > 0.0)) throw UsageError("--v must be positive");
  format_or(s, "json");
  Json j{{"b", s.b}};
  if (s.v) j["gamma"] = gamma(*s.v, s.b);
  const auto sol = solve_v_star(s.b);
  j["v_star"] = sol.v_star;
  j["gamma_at_root"] = sol.gamma_at_root;
  os << j.dump(2) << '\n';
}

void cmd_bounds(const RunSpec& s, std::ostream& os) {
  RateParams{s.p, s.b}.validate();
  if (s.u && *s.u < 2) throw UsageError("--u must be at least 2");
  if (s.w0 && (*s.w0 < 2 || s.n < 1)) throw UsageError("--w0 must be at least 2 and --n at least 1");
  format_or(s, "json");
  const auto d = decrement_bounds(s.p, s.b);
  Json j{{"p", s.p},
         {"b", s.b},
         {"in_regime", domination_regime(s.p, s.b)},
         {"bound_m2", d.bound_m2},
         {"bound_m1_empty", d.bound_m1_empty},
         {"bound_m1_occupied", d.bound_m1_occupied},
         {"target", d.target},
         {"all_satisfied", d.all_satisfied},
         {"C", constant_C(s.b)},
         {"induction_target", induction_target(s.b)}};
  if (s.b > 2.0) {
    const auto z = z_law(s.b);
    j["z_law"] = {{"p_minus2", z.p_minus2}, {"p_minus1", z.p_minus1}, {"p_plus1", z.p_plus1},
                  {"mean", z.mean}};
  }
  if (s.u) {
    const auto sb = sum_bound_check(*s.u);
    j["sum_bound"] = {{"u", *s.u}, {"lhs", sb.lhs}, {"rhs", sb.rhs}, {"holds", sb.holds}};
  }
  if (s.w0) {
    j["hitting_tail_bound"] = {{"w0", *s.w0}, {"n", s.n}, {"value", hitting_tail_bound(*s.w0, s.n)}};
  }
  os << j.dump(2) << '\n';
}

void dispatch(const RunSpec& s, std::ostream& os) {
  if (s.command == "simulate") return cmd_simulate(s, os);
  if (s.command == "survival") return cmd_survival(s, os);
  if (s.command == "sweep") return cmd_sweep(s, os);
  if (s.command == "width-chain") return cmd_width_chain(s, os);
  if (s.command == "domination") return cmd_domination(s, os);
  if (s.command == "separation") return cmd_separation(s, os);
  if (s.command == "oracle") return cmd_oracle(s, os);
  if (s.command == "gamma") return cmd_gamma(s, os);
  if (s.command == "bounds") return cmd_bounds(s, os);
  throw UsageError("unknown command '" + s.command + "'");
}

std::filesystem::path resolve_output(const std::string& path) {
  std::filesystem::path out(path);
  if (out.is_relative()) {
    if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) out = std::filesystem::path(dir) / out;
  }
  return out;
}

}  // namespace

std::vector<double> parse_grid(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty grid");
  const auto parts = split(text, ':');
  std::vector<double> grid;
  if (parts.size() == 1) {
    for (auto item : split(text, ',')) grid.push_back(parse_real(item));
    return grid;
  }
  if (parts.size() != 4) throw std::invalid_argument("grid must be lo:hi:log|lin:count");
  const double lo = parse_real(parts[0]);
  const double hi = parse_real(parts[1]);
  const std::string_view mode = parts[2];
  const double count_real = parse_real(parts[3]);
  if (count_real < 1 || count_real != std::floor(count_real)) {
    throw std::invalid_argument("grid count must be a positive integer");
  }
  const auto count = static_cast<std::int64_t>(count_real);
  if (mode != "log" && mode != "lin") throw std::invalid_argument("grid spacing must be log or lin");
  if (mode == "log" && !(lo > 0.0 && hi > 0.0)) {
    throw std::invalid_argument("log grid needs positive endpoints");
  }
  for (std::int64_t k = 0; k < count; ++k) {
    if (count == 1) {
      grid.push_back(lo);
      break;
    }
    const double t = static_cast<double>(k) / static_cast<double>(count - 1);
    if (k == count - 1) {
      grid.push_back(hi);
    } else if (mode == "log") {
      grid.push_back(std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))));
    } else {
      grid.push_back(lo + t * (hi - lo));
    }
  }
  return grid;
}

int run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  std::ofstream file;
  if (!spec.output_path.empty()) {
    const auto path = resolve_output(spec.output_path);
    file.open(path, std::ios::binary | std::ios::trunc);
    if (!file) {
      err << "error: cannot write output file '" << path.string() << "'\n";
      return kRuntimeError;
    }
  }
  std::ostringstream buffer;
  try {
    dispatch(spec, buffer);
  } catch (const std::invalid_argument& e) {
    err << "error: invalid parameters for '" << spec.command << "': " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: '" << spec.command << "' failed: " << e.what() << '\n';
    return kRuntimeError;
  }
  std::ostream& target = spec.output_path.empty() ? out : static_cast<std::ostream&>(file);
  target << buffer.str();
  target.flush();
  if (!target) {
    err << "error: failed while writing output\n";
    return kRuntimeError;
  }
  return kSuccess;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  if (argc >= 2 && argv[1][0] != '-') {
    const std::string_view cmd = argv[1];
    bool known = false;
    for (auto c : kCommands) known = known || c == cmd;
    if (!known) {
      err << "error: unknown command '" << cmd << "' (see --help)\n";
      return kUsageError;
    }
  }

  RunSpec spec;
  CLI::App app{"Exact simulation and verification tools for the double branching annihilating "
               "random walk with neighbour-dependent rates"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  auto add_common = [&](CLI::App* c, bool rates) {
    c->add_option("--out", spec.output_path,
                  "Output file (default stdout; relative paths resolve under $DBARW_OUTPUT_DIR)");
    c->add_option("--format", spec.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    c->add_option("--seed", spec.seed, "Master random seed");
    if (rates) {
      c->add_option("--p", spec.p, "Interaction factor p in (0, 1]");
      c->add_option("--b", spec.b, "Branching intensity b > 0");
    }
  };
  auto add_init = [&](CLI::App* c) {
    c->add_option("--init", spec.init, "Initial occupied sites, whitespace separated");
  };
  auto add_caps = [&](CLI::App* c) {
    c->add_option("--max-events", spec.max_events, "Event cap per run");
    c->add_option("--max-time", spec.max_time, "Model-time cap per run");
    c->add_option("--width-cap", spec.width_cap, "Stop once the width reaches this (0 = off)");
  };
  auto add_trials = [&](CLI::App* c) {
    c->add_option("--trials", spec.trials, "Number of independent runs");
    c->add_option("--jobs", spec.jobs, "Worker threads; output does not depend on it");
  };

  auto* simulate_cmd = app.add_subcommand("simulate", "Run one trajectory and dump its events");
  add_common(simulate_cmd, true);
  add_init(simulate_cmd);
  add_caps(simulate_cmd);

  auto* survival_cmd = app.add_subcommand("survival", "Monte Carlo survival estimate");
  add_common(survival_cmd, true);
  add_init(survival_cmd);
  add_caps(survival_cmd);
  add_trials(survival_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "Survival estimates over a (p, b) grid");
  add_common(sweep_cmd, false);
  add_init(sweep_cmd);
  add_caps(sweep_cmd);
  add_trials(sweep_cmd);
  sweep_cmd->add_option("--p", spec.p_grid, "p grid: lo:hi:log|lin:count, list, or value")->required();
  sweep_cmd->add_option("--b", spec.b_grid, "b grid: lo:hi:log|lin:count, list, or value")->required();

  auto* chain_cmd = app.add_subcommand("width-chain", "Embedded width chain of one trajectory");
  add_common(chain_cmd, true);
  add_init(chain_cmd);
  add_caps(chain_cmd);

  auto* dom_cmd = app.add_subcommand("domination", "Width chain vs. Z-walk domination test");
  add_common(dom_cmd, true);
  add_init(dom_cmd);
  add_trials(dom_cmd);
  dom_cmd->add_option("--n", spec.n, "Number of width increments");
  dom_cmd->add_option("--max-events", spec.max_events, "Event cap per trial");

  auto* sep_cmd = app.add_subcommand("separation", "Separation-time analysis");
  add_common(sep_cmd, true);
  add_init(sep_cmd);
  add_caps(sep_cmd);
  add_trials(sep_cmd);
  sep_cmd->add_option("--split", spec.split, "Gap offset: run the labelled two-group process");

  auto* oracle_cmd = app.add_subcommand("oracle", "Exact truncated extinction probabilities");
  add_common(oracle_cmd, true);
  add_init(oracle_cmd);
  add_trials(oracle_cmd);
  oracle_cmd->add_option("--window", spec.window, "Window width L in [2, 14]");
  oracle_cmd->add_flag("--compare", spec.compare, "Also run Monte Carlo with width cap L");
  oracle_cmd->add_option("--max-events", spec.max_events, "Event cap per Monte Carlo run");

  auto* gamma_cmd = app.add_subcommand("gamma", "Solve gamma(v, b) = 1/2 for its largest root");
  add_common(gamma_cmd, false);
  gamma_cmd->add_option("--b", spec.b, "Branching intensity b > 2")->required();
  gamma_cmd->add_option("--v", spec.v, "Also evaluate gamma at this v");

  auto* bounds_cmd = app.add_subcommand("bounds", "Closed-form bounds at (p, b)");
  add_common(bounds_cmd, true);
  bounds_cmd->add_option("--u", spec.u, "Check the reciprocal-square sum bound at u");
  bounds_cmd->add_option("--w0", spec.w0, "Evaluate the hitting-count tail bound at w0");
  bounds_cmd->add_option("--n", spec.n, "Hitting count n for the tail bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }
  for (auto* sub : app.get_subcommands()) spec.command = sub->get_name();
  return run(spec, out, err);
}

}  // namespace dbarw::cli
