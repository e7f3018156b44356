#ifndef FJREC_HARNESS_IO_HPP_
#define FJREC_HARNESS_IO_HPP_

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "fjrec/controllers.hpp"
#include "fjrec/harness/batch.hpp"
#include "fjrec/harness/scenario.hpp"

namespace fjrec {

inline constexpr const char * kCsvHeader =
    "trial_id,seed,n_users,connectivity_pct,mpc_feasible,cost_mf_cum,cost_mb_cum,cost_mf_ss,cost_mb_ss,"
    "improvement_pct,avg_shift_mf_pct,avg_shift_mb_pct,max_shift_mf_pct,max_shift_mb_pct,wall_time_ms";

/// Shortest form that reads back to the same double (%.17g).
inline std::string format_double(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// CSV text; infeasible trials leave the metric columns empty.
inline std::string records_to_csv(const std::vector<TrialRecord> & records)
{
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto & r : records) {
    out += std::to_string(r.trial_id) + ',' + std::to_string(r.config.seed) + ',' + std::to_string(r.config.n_users) +
           ',' + format_double(r.config.connectivity_pct) + ',' + (r.mpc_feasible ? "true" : "false");
    if (r.report) {
      const ComparisonReport & c = *r.report;
      for (double v : {c.cost_mf, c.cost_mb, c.cost_mf_ss, c.cost_mb_ss, c.improvement_pct, c.shift_mf.average(),
                       c.shift_mb.average(), c.shift_mf.maximum(), c.shift_mb.maximum()}) {
        out += ',' + format_double(v);
      }
    } else {
      out += ",,,,,,,,,";
    }
    out += ',' + format_double(r.wall_time_ms) + '\n';
  }
  return out;
}

inline void export_csv(const std::vector<TrialRecord> & records, const std::string & path)
{
  write_text(path, records_to_csv(records));
}

inline nlohmann::json trajectory_json(const std::string & scenario, const std::string & controller,
                                      const ClosedLoopTrace & tr)
{
  nlohmann::json states = nlohmann::json::array();
  for (const auto & x : tr.states) { states.push_back(x.values()); }
  return {{"scenario", scenario}, {"controller", controller}, {"states", states}, {"inputs", tr.inputs},
          {"costs", tr.costs}};
}

inline void export_trajectory(const std::string & scenario, const std::string & controller, const ClosedLoopTrace & tr,
                              const std::string & path)
{
  write_text(path, trajectory_json(scenario, controller, tr).dump(2) + "\n");
}

inline nlohmann::json summary_json(const std::vector<SubsetSummary> & summary)
{
  auto q = [](const Quartiles & v) {
    return nlohmann::json{{"count", v.count}, {"q1", v.q1}, {"median", v.median}, {"q3", v.q3}, {"max", v.max}};
  };
  nlohmann::json out = nlohmann::json::array();
  for (const auto & s : summary) {
    out.push_back({{"connectivity_pct", s.connectivity_pct},
                   {"trials", s.trials},
                   {"feasible", s.feasible},
                   {"improvement_pct", q(s.improvement_pct)},
                   {"avg_shift_mf_pct", q(s.avg_shift_mf_pct)},
                   {"avg_shift_mb_pct", q(s.avg_shift_mb_pct)},
                   {"max_shift_mf_pct", q(s.max_shift_mf_pct)},
                   {"max_shift_mb_pct", q(s.max_shift_mb_pct)}});
  }
  return out;
}

inline nlohmann::json records_json(const std::vector<TrialRecord> & records)
{
  nlohmann::json out = nlohmann::json::array();
  for (const auto & r : records) {
    nlohmann::json j{{"trial_id", r.trial_id},
                     {"seed", r.config.seed},
                     {"n_users", r.config.n_users},
                     {"connectivity_pct", r.config.connectivity_pct},
                     {"steps", r.config.steps},
                     {"horizon", r.config.horizon},
                     {"mpc_feasible", r.mpc_feasible},
                     {"wall_time_ms", r.wall_time_ms}};
    if (r.report) {
      const ComparisonReport & c = *r.report;
      j["cost_mf_cum"] = c.cost_mf;
      j["cost_mb_cum"] = c.cost_mb;
      j["cost_mf_ss"] = c.cost_mf_ss;
      j["cost_mb_ss"] = c.cost_mb_ss;
      j["improvement_pct"] = c.improvement_pct;
      j["improvement_ss_pct"] = c.improvement_ss_pct;
      j["shift_mf_pct"] = c.shift_mf.percent.values();
      j["shift_mb_pct"] = c.shift_mb.percent.values();
      j["shift_excluded"] = c.shift_mf.excluded;
    } else {
      j["error"] = r.error;
    }
    out.push_back(std::move(j));
  }
  return out;
}

inline void export_json(const std::vector<TrialRecord> & records, const std::string & path)
{
  write_text(path, records_json(records).dump(2) + "\n");
}

}  // namespace fjrec

#endif  // FJREC_HARNESS_IO_HPP_
