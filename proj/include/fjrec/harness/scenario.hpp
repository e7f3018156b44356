#ifndef FJREC_HARNESS_SCENARIO_HPP_
#define FJREC_HARNESS_SCENARIO_HPP_

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fjrec/error.hpp"
#include "fjrec/numerics/matrix.hpp"
#include "fjrec/opinion_model.hpp"

namespace fjrec {

/// On-disk network description. `adjacency` is row-major, n_total² entries.
struct ScenarioFile
{
  std::string name;
  std::size_t n_total = 0;
  std::vector<double> adjacency;
  std::vector<double> stubbornness;
  std::vector<double> initial_opinions;
  std::size_t rs_index = 0;  ///< 0-based

  /// Builds the network, optionally rescaling rows that carry rounded weights.
  [[nodiscard]] OpinionNetwork to_network(bool renormalize = false) const
  {
    if (adjacency.size() != n_total * n_total) {
      throw Error(ErrorKind::DimensionMismatch, "scenario adjacency must have n_total² entries");
    }
    if (rs_index >= n_total) { throw Error(ErrorKind::InvalidIndex, "scenario rs_index out of range"); }
    OpinionNetwork net(DenseMatrix::from_row_major(n_total, n_total, adjacency), DenseVector(stubbornness),
                       DenseVector(initial_opinions));
    return renormalize ? renormalize_rows(std::move(net)) : net;
  }

  static ScenarioFile from_network(std::string name, const OpinionNetwork & net, std::size_t rs_index)
  {
    return {std::move(name),
            net.n_total(),
            net.adjacency.values(),
            net.stubbornness.values(),
            net.initial_opinions.values(),
            rs_index};
  }
};

/**
 * Six users and a recommender (index 6). User 5 (index 4) is a fully
 * prejudiced radical at opinion 0 that nobody listens to.
 */
inline ScenarioFile radical_user_scenario()
{
  constexpr std::size_t n = 7;
  constexpr std::size_t rs = 6;
  std::vector<double> w(n * n, 0.0);
  auto set = [&](std::size_t i, std::size_t j, double v) { w[i * n + j] = v; };
  set(0, 1, 0.041);
  set(0, 3, 0.397);
  set(0, rs, 0.562);
  set(1, 1, 0.191);
  set(1, 5, 0.011);
  set(1, rs, 0.798);
  set(2, 5, 0.224);
  set(2, rs, 0.776);
  set(3, 0, 1.000);
  set(4, 2, 0.472);
  set(4, 3, 0.357);
  set(4, 5, 0.171);
  set(5, 3, 1.000);
  set(rs, rs, 1.0);
  return {"radical-user",
          n,
          std::move(w),
          {0.011, 0.001, 0.092, 0.064, 1.000, 0.055, 1.0},
          {0.67, 0.74, 0.83, 0.68, 0.0, 0.59, 0.5},
          rs};
}

inline nlohmann::json to_json(const ScenarioFile & s)
{
  return {{"name", s.name},
          {"n_total", s.n_total},
          {"adjacency", s.adjacency},
          {"stubbornness", s.stubbornness},
          {"initial_opinions", s.initial_opinions},
          {"rs_index", s.rs_index}};
}

/// Accepts `adjacency` either flat row-major or as a list of rows.
inline ScenarioFile scenario_from_json(const nlohmann::json & j)
{
  try {
    ScenarioFile s;
    s.name = j.value("name", std::string("unnamed"));
    s.n_total = j.at("n_total").get<std::size_t>();
    const auto & adj = j.at("adjacency");
    if (!adj.empty() && adj.front().is_array()) {
      for (const auto & row : adj) {
        for (const auto & v : row) { s.adjacency.push_back(v.get<double>()); }
      }
    } else {
      s.adjacency = adj.get<std::vector<double>>();
    }
    s.stubbornness = j.at("stubbornness").get<std::vector<double>>();
    s.initial_opinions = j.at("initial_opinions").get<std::vector<double>>();
    s.rs_index = j.at("rs_index").get<std::size_t>();
    return s;
  } catch (const nlohmann::json::exception & e) {
    throw Error(ErrorKind::IoError, std::string("malformed scenario: ") + e.what());
  }
}

inline void write_text(const std::string & path, const std::string & text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) { throw Error(ErrorKind::IoError, "cannot open " + path + " for writing"); }
  out << text;
  if (!out) { throw Error(ErrorKind::IoError, "write failed for " + path); }
}

inline std::string read_text(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) { throw Error(ErrorKind::IoError, "cannot open " + path); }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void export_scenario(const ScenarioFile & s, const std::string & path)
{
  write_text(path, to_json(s).dump(2) + "\n");
}

inline ScenarioFile import_scenario(const std::string & path)
{
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error & e) {
    throw Error(ErrorKind::IoError, path + ": " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace fjrec

#endif  // FJREC_HARNESS_SCENARIO_HPP_
