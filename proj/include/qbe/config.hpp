#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include <json.hpp>

#include "qbe/errors.hpp"
#include "qbe/qtensor.hpp"

namespace qbe {

enum class Experiment {
  full_beris,
  trotter_rate,
  ericksen_limit,
  xi_escape,
  phase_mismatch,
  vortex_defects,
  ode_portrait,
};

inline const char* experiment_name(Experiment e) {
  switch (e) {
    case Experiment::full_beris: return "full_beris";
    case Experiment::trotter_rate: return "trotter_rate";
    case Experiment::ericksen_limit: return "ericksen_limit";
    case Experiment::xi_escape: return "xi_escape";
    case Experiment::phase_mismatch: return "phase_mismatch";
    case Experiment::vortex_defects: return "vortex_defects";
    case Experiment::ode_portrait: return "ode_portrait";
  }
  return "?";
}

struct RunConfig {
  Experiment experiment = Experiment::full_beris;
  Params params;
  int grid_n = 64;
  double dt = 1e-3;
  double T = 1.0;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  double snapshot_every = 0.0;  // time cadence; 0 disables snapshots
  int diag_every = 10;          // steps between diagnostics rows
  int threads = 1;
  nlohmann::json raw;  // full parsed config, including experiment blocks

  static RunConfig from_json(const nlohmann::json& j) {
    RunConfig c;
    c.raw = j;
    try {
      std::string name = j.at("experiment").get<std::string>();
      bool known = false;
      for (Experiment e :
           {Experiment::full_beris, Experiment::trotter_rate,
            Experiment::ericksen_limit, Experiment::xi_escape,
            Experiment::phase_mismatch, Experiment::vortex_defects,
            Experiment::ode_portrait}) {
        if (name == experiment_name(e)) {
          c.experiment = e;
          known = true;
        }
      }
      if (!known) throw config_error("unknown experiment: " + name);
      if (j.contains("params")) {
        const auto& p = j["params"];
        c.params.eps = p.value("eps", c.params.eps);
        c.params.xi = p.value("xi", c.params.xi);
        c.params.kappa = p.value("kappa", c.params.kappa);
        c.params.a = p.value("a", c.params.a);
        c.params.b = p.value("b", c.params.b);
        c.params.c = p.value("c", c.params.c);
      }
      c.grid_n = j.value("grid_n", c.grid_n);
      c.dt = j.value("dt", c.dt);
      c.T = j.value("T", c.T);
      c.seed = j.value("seed", c.seed);
      c.out_dir = j.value("out_dir", c.out_dir);
      c.snapshot_every = j.value("snapshot_every", c.snapshot_every);
      c.diag_every = j.value("diag_every", c.diag_every);
      c.threads = j.value("threads", c.threads);
    } catch (const config_error&) {
      throw;
    } catch (const nlohmann::json::exception& e) {
      throw config_error(std::string("config field error: ") + e.what());
    }
    return c;
  }

  static RunConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw config_error(std::string("malformed config: ") + e.what());
    }
    return from_json(j);
  }

  const nlohmann::json& block(const char* name) const {
    static const nlohmann::json empty = nlohmann::json::object();
    if (raw.contains(name)) return raw[name];
    return empty;
  }

  void validate() const {
    if (params.b <= 0.0)
      throw validation_error("params.b violates the constraint b > 0");
    if (params.c <= 0.0)
      throw validation_error("params.c violates the constraint c > 0");
    if (params.kappa <= 0.0)
      throw validation_error("params.kappa violates the constraint kappa > 0");
    if (params.eps < 0.0)
      throw validation_error("params.eps must be non-negative");
    if (grid_n < 8 || (grid_n & (grid_n - 1)) != 0)
      throw validation_error("grid_n must be a power of two >= 8");
    if (dt <= 0.0) throw validation_error("dt must be positive");
    if (T < 0.0) throw validation_error("T must be non-negative");
    if (diag_every < 1) throw validation_error("diag_every must be >= 1");
    if (threads < 1) throw validation_error("threads must be >= 1");
    if (params.discriminant() < 0.0)
      throw validation_error("b^2 - 24 a c must be non-negative");
  }
};

/// Set a numeric key addressed by a dotted path ("params.eps", "escape.lambda").
inline void set_by_path(nlohmann::json& j, const std::string& path, double value) {
  nlohmann::json* cur = &j;
  std::size_t start = 0;
  while (true) {
    std::size_t dot = path.find('.', start);
    std::string key = path.substr(start, dot - start);
    if (key.empty()) throw config_error("bad sweep parameter path: " + path);
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      return;
    }
    cur = &(*cur)[key];
    start = dot + 1;
  }
}

}  // namespace qbe
