#ifndef FJREC_HARNESS_BATCH_HPP_
#define FJREC_HARNESS_BATCH_HPP_

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fjrec/analysis.hpp"
#include "fjrec/error.hpp"
#include "fjrec/harness/generator.hpp"
#include "fjrec/plant.hpp"

namespace fjrec {

inline constexpr std::array<double, 4> kConnectivitySubsets{25.0, 50.0, 75.0, 100.0};

struct TrialConfig
{
  std::size_t n_users = 20;
  double connectivity_pct = 100.0;
  std::uint64_t seed = 0;
  std::size_t steps = 50;
  std::size_t horizon = 50;
};

struct TrialRecord
{
  std::size_t trial_id = 0;
  TrialConfig config;
  bool mpc_feasible = false;
  std::optional<ComparisonReport> report;  ///< present iff mpc_feasible
  std::string error;                       ///< why the trial produced no report
  double wall_time_ms = 0.0;
};

struct BatchConfig
{
  std::size_t trials = 1000;
  std::size_t n_users = 20;
  std::size_t steps = 50;
  std::size_t horizon = 50;
  std::uint64_t master_seed = 1;
  std::size_t workers = 1;
  std::optional<double> soft_terminal;
};

/// Trial i goes to subset i mod 4 and uses seed splitmix64(master + i).
inline TrialConfig trial_config(const BatchConfig & b, std::size_t index)
{
  return {b.n_users, kConnectivitySubsets[index % kConnectivitySubsets.size()], splitmix64(b.master_seed + index),
          b.steps, b.horizon};
}

inline TrialRecord run_trial(std::size_t trial_id, const TrialConfig & cfg, std::optional<double> soft_terminal = {})
{
  TrialRecord rec;
  rec.trial_id = trial_id;
  rec.config = cfg;
  const auto start = std::chrono::steady_clock::now();
  try {
    const GeneratedNetwork g = generate_network(cfg.n_users, cfg.connectivity_pct, cfg.seed);
    const ControlledPlant plant = extract_plant(g.network, g.rs_index);
    ComparisonOptions opt;
    opt.steps = cfg.steps;
    opt.mpc.horizon = cfg.horizon;
    opt.mpc.soft_terminal = soft_terminal;
    opt.keep_traces = false;
    rec.report = compare_controllers(plant, g.network, g.rs_index, opt);
    rec.mpc_feasible = true;
  } catch (const Error & e) {
    rec.error = e.what();
  }
  rec.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

struct Quartiles
{
  std::size_t count = 0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Linear-interpolation quantiles (type 7).
inline Quartiles quartiles(std::vector<double> v)
{
  Quartiles q;
  q.count = v.size();
  if (v.empty()) { return q; }
  std::sort(v.begin(), v.end());
  auto at = [&](double p) {
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  q.q1 = at(0.25);
  q.median = at(0.5);
  q.q3 = at(0.75);
  q.max = v.back();
  return q;
}

struct SubsetSummary
{
  double connectivity_pct = 0.0;
  std::size_t trials = 0;
  std::size_t feasible = 0;
  Quartiles improvement_pct;
  Quartiles avg_shift_mf_pct;
  Quartiles avg_shift_mb_pct;
  Quartiles max_shift_mf_pct;
  Quartiles max_shift_mb_pct;
};

inline std::vector<SubsetSummary> summarize(const std::vector<TrialRecord> & records)
{
  std::vector<SubsetSummary> out;
  for (double pct : kConnectivitySubsets) {
    SubsetSummary s;
    s.connectivity_pct = pct;
    std::vector<double> imp, amf, amb, mmf, mmb;
    for (const auto & r : records) {
      if (r.config.connectivity_pct != pct) { continue; }
      ++s.trials;
      if (!r.report) { continue; }
      ++s.feasible;
      imp.push_back(r.report->improvement_pct);
      amf.push_back(r.report->shift_mf.average());
      amb.push_back(r.report->shift_mb.average());
      mmf.push_back(r.report->shift_mf.maximum());
      mmb.push_back(r.report->shift_mb.maximum());
    }
    s.improvement_pct = quartiles(std::move(imp));
    s.avg_shift_mf_pct = quartiles(std::move(amf));
    s.avg_shift_mb_pct = quartiles(std::move(amb));
    s.max_shift_mf_pct = quartiles(std::move(mmf));
    s.max_shift_mb_pct = quartiles(std::move(mmb));
    out.push_back(s);
  }
  return out;
}

struct BatchResult
{
  std::vector<TrialRecord> records;  ///< ordered by trial_id
  std::vector<SubsetSummary> summary;
};

/// Runs every trial on a pool of `workers` threads; results do not depend on scheduling.
inline BatchResult run_batch(const BatchConfig & cfg)
{
  if (cfg.trials == 0) { throw Error(ErrorKind::InvalidArgument, "trials must be positive"); }
  BatchResult res;
  res.records.resize(cfg.trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < cfg.trials; i = next.fetch_add(1)) {
      res.records[i] = run_trial(i, trial_config(cfg, i), cfg.soft_terminal);
    }
  };
  const std::size_t n_workers = std::clamp<std::size_t>(cfg.workers, 1, cfg.trials);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) { pool.emplace_back(worker); }
  }
  res.summary = summarize(res.records);
  return res;
}

}  // namespace fjrec

#endif  // FJREC_HARNESS_BATCH_HPP_
