#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fjrec/fjrec.hpp"

namespace {

using fjrec::ScenarioFile;
using nlohmann::json;

struct Common
{
  std::uint64_t seed = 1;
  std::size_t steps = 50;
  std::size_t horizon = 50;
  std::optional<double> soft_terminal;
  bool renormalize = false;
  std::string out;
};

void emit(const std::string & text, const std::string & out)
{
  if (out.empty()) {
    std::cout << text;
  } else {
    fjrec::write_text(out, text);
  }
}

/// Scenario file if given, otherwise a generated network.
ScenarioFile load_or_generate(const std::string & path, const Common & c, std::size_t n_users, double pct)
{
  if (!path.empty()) { return fjrec::import_scenario(path); }
  const fjrec::GeneratedNetwork g = fjrec::generate_network(n_users, pct, c.seed);
  return ScenarioFile::from_network("generated-" + std::to_string(c.seed), g.network, g.rs_index);
}

fjrec::MpcOptions mpc_options(const Common & c)
{
  fjrec::MpcOptions o;
  o.horizon = c.horizon;
  o.soft_terminal = c.soft_terminal;
  return o;
}

void run_simulate(const std::string & path, const std::string & controller, const Common & c)
{
  const ScenarioFile s = fjrec::import_scenario(path);
  const fjrec::OpinionNetwork net = s.to_network(c.renormalize);
  const fjrec::ControlledPlant p = fjrec::extract_plant(net, s.rs_index);
  fjrec::ClosedLoopTrace tr;
  if (controller == "mf") {
    tr = fjrec::closed_loop(p, fjrec::MfController{}, c.steps);
  } else {
    fjrec::MpcController mpc(p, fjrec::mb_target(p), mpc_options(c));
    tr = fjrec::closed_loop(p, mpc, c.steps);
  }
  emit(fjrec::trajectory_json(s.name, controller, tr).dump(2) + "\n", c.out);
}

void run_batch(const Common & c, std::size_t trials, std::size_t n_users, std::size_t workers,
               const std::string & json_out)
{
  fjrec::BatchConfig cfg;
  cfg.trials = trials;
  cfg.n_users = n_users;
  cfg.steps = c.steps;
  cfg.horizon = c.horizon;
  cfg.master_seed = c.seed;
  cfg.workers = workers;
  cfg.soft_terminal = c.soft_terminal;
  const fjrec::BatchResult r = fjrec::run_batch(cfg);
  emit(fjrec::records_to_csv(r.records), c.out);
  if (!json_out.empty()) { fjrec::export_json(r.records, json_out); }
  std::cerr << fjrec::summary_json(r.summary).dump(2) << "\n";
}

void run_radical(const Common & c, const std::string & fixture_out)
{
  const ScenarioFile s = fjrec::radical_user_scenario();
  if (!fixture_out.empty()) { fjrec::export_scenario(s, fixture_out); }
  const fjrec::OpinionNetwork net = s.to_network(c.renormalize);
  const fjrec::ControlledPlant p = fjrec::extract_plant(net, s.rs_index);
  fjrec::ComparisonOptions opt;
  opt.steps = c.steps;
  opt.mpc = mpc_options(c);
  const fjrec::ComparisonReport r = fjrec::compare_controllers(p, net, s.rs_index, opt);
  json j{{"scenario", s.name},
         {"u_star", r.target.u_star},
         {"x_star", r.target.x_star.values()},
         {"cost_mf_cum", r.cost_mf},
         {"cost_mb_cum", r.cost_mb},
         {"cost_mf_ss", r.cost_mf_ss},
         {"cost_mb_ss", r.cost_mb_ss},
         {"improvement_pct", r.improvement_pct},
         {"improvement_ss_pct", r.improvement_ss_pct},
         {"shift_mf_pct", r.shift_mf.percent.values()},
         {"shift_mb_pct", r.shift_mb.percent.values()},
         {"shift_excluded", r.shift_mf.excluded},
         {"avg_shift_mf_pct", r.shift_mf.average()},
         {"avg_shift_mb_pct", r.shift_mb.average()},
         {"avg_shift_gap_pct", r.avg_shift_gap_pct},
         {"trajectories",
          {fjrec::trajectory_json(s.name, "mf", *r.trace_mf), fjrec::trajectory_json(s.name, "mb", *r.trace_mb)}}};
  emit(j.dump(2) + "\n", c.out);
}

void run_bounds(const ScenarioFile & s, const Common & c)
{
  const fjrec::ControlledPlant p = fjrec::extract_plant(s.to_network(c.renormalize), s.rs_index);
  const fjrec::ReachabilityBounds b = fjrec::reachability_bounds(p);
  const json j{{"scenario", s.name},
               {"lower", b.lower.values()},
               {"upper", b.upper.values()},
               {"x_mf", fjrec::mf_equilibrium(p).values()},
               {"x_mb", fjrec::mb_target(p).x_star.values()}};
  emit(j.dump(2) + "\n", c.out);
}

void run_equivalence(const ScenarioFile & s, const Common & c)
{
  const fjrec::ControlledPlant p = fjrec::extract_plant(s.to_network(c.renormalize), s.rs_index);
  const fjrec::EquivalenceCertificate cert = fjrec::equivalence_certificate(p);
  const json j{{"scenario", s.name},
               {"alpha", cert.alpha},
               {"gap", cert.gap},
               {"equivalent", cert.gap <= 1e-9},
               {"kernel_functional", cert.kernel_functional.values()},
               {"difference", cert.difference.values()}};
  emit(j.dump(2) + "\n", c.out);
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Opinion dynamics under recommender feedback"};
  app.require_subcommand(1);
  Common c;
  auto add_common = [&](CLI::App * sub) {
    sub->add_option("--seed", c.seed, "Master seed");
    sub->add_option("--steps", c.steps, "Closed-loop steps")->check(CLI::PositiveNumber);
    sub->add_option("--horizon", c.horizon, "MPC horizon")->check(CLI::PositiveNumber);
    sub->add_option("--soft-terminal", c.soft_terminal, "Replace the terminal constraint by a penalty of this weight");
    sub->add_flag("--renormalize-rows", c.renormalize, "Rescale adjacency rows to sum to one");
    sub->add_option("--out", c.out, "Output path (stdout if omitted)");
  };

  std::string scenario_path;
  std::string controller = "mb";
  auto * simulate = app.add_subcommand("simulate", "Run one controller on a scenario file, emit trajectory JSON");
  add_common(simulate);
  simulate->add_option("--scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--controller", controller, "mf or mb")->check(CLI::IsMember({"mf", "mb"}));

  std::size_t trials = 1000;
  std::size_t n_users = 20;
  std::size_t workers = 1;
  std::string json_out;
  auto * batch = app.add_subcommand("batch", "Randomised MF vs MB study, CSV out");
  add_common(batch);
  batch->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber);
  batch->add_option("--n-users", n_users, "Users per network")->check(CLI::Range(2, 1000));
  batch->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  batch->add_option("--json", json_out, "Also write per-trial records as JSON");

  auto * scenario = app.add_subcommand("scenario", "Built-in scenarios");
  scenario->require_subcommand(1);
  std::string fixture_out;
  auto * radical = scenario->add_subcommand("radical-user", "Emit the radical-user fixture and compare controllers");
  add_common(radical);
  radical->add_option("--fixture", fixture_out, "Write the scenario file here");

  double pct = 50.0;
  auto * bounds = app.add_subcommand("bounds", "Reachable steady-state interval per user");
  auto * equivalence = app.add_subcommand("equivalence", "MF vs MB equilibrium equivalence certificate");
  for (auto * sub : {bounds, equivalence}) {
    add_common(sub);
    sub->add_option("--scenario", scenario_path, "Scenario JSON (a generated network if omitted)")
        ->check(CLI::ExistingFile);
    sub->add_option("--n-users", n_users, "Users in a generated network")->check(CLI::Range(2, 1000));
    sub->add_option("--connectivity", pct, "Edge percentage of a generated network")->check(CLI::Range(1.0, 100.0));
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      run_simulate(scenario_path, controller, c);
    } else if (batch->parsed()) {
      run_batch(c, trials, n_users, workers, json_out);
    } else if (radical->parsed()) {
      run_radical(c, fixture_out);
    } else if (bounds->parsed()) {
      run_bounds(load_or_generate(scenario_path, c, n_users, pct), c);
    } else if (equivalence->parsed()) {
      run_equivalence(load_or_generate(scenario_path, c, n_users, pct), c);
    }
  } catch (const fjrec::Error & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
