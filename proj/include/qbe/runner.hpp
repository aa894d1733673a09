#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "qbe/config.hpp"
#include "qbe/csv.hpp"
#include "qbe/defects.hpp"
#include "qbe/limit.hpp"
#include "qbe/random_fields.hpp"
#include "qbe/snapshot.hpp"
#include "qbe/trotter.hpp"
#include "qbe/version.hpp"

namespace qbe {

struct RunResult {
  std::vector<std::pair<std::string, double>> metrics;

  double get(const std::string& key) const {
    for (const auto& [k, v] : metrics)
      if (k == key) return v;
    throw std::out_of_range("no metric " + key);
  }
};

namespace runner_detail {

inline std::vector<double> doubles_from(const nlohmann::json& j, const char* key,
                                        std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("bad array for ") + key + ": " + e.what());
  }
}

inline std::vector<int> ints_from(const nlohmann::json& j, const char* key,
                                  std::vector<int> fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("bad array for ") + key + ": " + e.what());
  }
}

struct InitialData {
  Field u;
  Field q;
};

inline InitialData initial_data(const RunConfig& cfg, Grid g) {
  const auto& ic = cfg.block("ic");
  double u_amp = ic.value("u_amplitude", 0.4);
  double q_amp = ic.value("q_amplitude", 0.2);
  bool rescale = ic.value("rescale_q", true);
  int kmax = ic.value("kmax", 4);
  InitialData d{random_velocity(g, cfg.seed, u_amp, kmax),
                random_qfield(g, cfg.seed, cfg.params, rescale, q_amp, kmax)};
  if (u_amp == 0.0) d.u = Field::velocity(g);
  if (q_amp == 0.0 && !rescale) d.q = Field::qtensor(g);
  return d;
}

inline std::string snap_name(const std::string& stem, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%04d.qbe", stem.c_str(), index);
  return buf;
}

inline std::vector<std::string> diag_columns() {
  return {"t",       "min_eig",     "max_eig",  "linf_Q",
          "kinetic", "free_energy", "max_gradQ", "Y", "resolved_flag"};
}

inline void diag_row(CsvWriter& csv, const DiagRecord& d) {
  std::vector<std::string> cells{
      CsvWriter::num(d.t),           CsvWriter::num(d.min_eig),
      CsvWriter::num(d.max_eig),     CsvWriter::num(d.linf_Q),
      CsvWriter::num(d.kinetic),     CsvWriter::num(d.free_energy),
      CsvWriter::num(d.max_gradQ),   std::isnan(d.Y) ? "" : CsvWriter::num(d.Y),
      d.resolved ? "1" : "0"};
  csv.row(cells);
}

inline RunResult run_full_beris(const RunConfig& cfg,
                                const std::filesystem::path& out) {
  Grid g(cfg.grid_n);
  InitialData ic = initial_data(cfg, g);
  BerisSolver solver(g, cfg.params, {cfg.dt, "imex2", 0.9});
  solver.init(ic.u, ic.q);

  CsvWriter csv((out / "diagnostics.csv").string(), diag_columns());
  double min_eig = 1e300, max_eig = -1e300, max_div = 0.0;
  DiagRecord d = solver.monitor();
  diag_row(csv, d);
  min_eig = std::min(min_eig, d.min_eig);
  max_eig = std::max(max_eig, d.max_eig);

  int snap_index = 0;
  double next_snap = cfg.snapshot_every > 0.0 ? cfg.snapshot_every : 1e300;
  SimState st = solver.state();
  if (cfg.snapshot_every > 0.0) {
    write_snapshot((out / snap_name("u", snap_index)).string(), st.u, 0.0,
                   cfg.params);
    write_snapshot((out / snap_name("q", snap_index)).string(), st.Q, 0.0,
                   cfg.params);
    ++snap_index;
  }

  long total_steps = std::lround(cfg.T / cfg.dt);
  for (long s = 1; s <= total_steps; ++s) {
    solver.step();
    if (s % cfg.diag_every == 0 || s == total_steps) {
      d = solver.monitor();
      diag_row(csv, d);
      min_eig = std::min(min_eig, d.min_eig);
      max_eig = std::max(max_eig, d.max_eig);
      max_div = std::max(max_div, solver.divergence_l2());
    }
    if (solver.time() >= next_snap - 0.5 * cfg.dt) {
      st = solver.state();
      write_snapshot((out / snap_name("u", snap_index)).string(), st.u,
                     solver.time(), cfg.params);
      write_snapshot((out / snap_name("q", snap_index)).string(), st.Q,
                     solver.time(), cfg.params);
      ++snap_index;
      next_snap += cfg.snapshot_every;
    }
  }
  RunResult r;
  r.metrics = {{"min_eig", min_eig},
               {"max_eig", max_eig},
               {"final_kinetic", d.kinetic},
               {"final_free_energy", d.free_energy},
               {"max_divergence", max_div},
               {"steps", double(solver.steps())}};
  return r;
}

inline RunResult run_trotter_rate(const RunConfig& cfg,
                                  const std::filesystem::path& out) {
  Grid g(cfg.grid_n);
  const auto& block = cfg.block("trotter");
  std::vector<int> n_list = ints_from(block, "n_list", {8, 16, 32, 64});
  if (n_list.empty()) throw validation_error("trotter.n_list must not be empty");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1])
      throw validation_error("trotter.n_list must be ascending");
  std::string flow_name = block.value("flow", "taylor_green");
  PrescribedFlow flow(builtin_flow(flow_name), g);
  Field q0 = random_qfield(g, cfg.seed, cfg.params, true, 0.2,
                           cfg.block("ic").value("kmax", 3));
  RateStudy study = rate_study(q0, flow, cfg.params, cfg.T, n_list);

  CsvWriter csv((out / "rate.csv").string(),
                {"n", "h2_error", "fitted_slope_so_far"});
  for (const auto& row : study.rows)
    csv.row_nums({double(row.n), row.h2_error, row.slope_so_far});
  RunResult r;
  r.metrics = {{"slope", study.slope},
               {"reference_error", study.reference_error},
               {"coarsest_error", study.rows.front().h2_error},
               {"finest_error", study.rows.back().h2_error}};
  return r;
}

inline RunResult run_ericksen(const RunConfig& cfg,
                              const std::filesystem::path& out) {
  Grid g(cfg.grid_n);
  const auto& block = cfg.block("ericksen");
  std::vector<double> eps_list =
      doubles_from(block, "eps_list", {cfg.params.eps});
  if (eps_list.empty())
    throw validation_error("ericksen.eps_list must not be empty");
  int n_samples = block.value("n_samples", 20);
  InitialData ic = initial_data(cfg, g);
  EricksenStudy study = ericksen_study(ic.u, ic.q, cfg.params, cfg.params.xi,
                                       eps_list, cfg.T, cfg.dt, n_samples);
  CsvWriter csv((out / "ericksen.csv").string(),
                {"eps", "sup_Y", "slope_running"});
  for (const auto& row : study.rows)
    csv.row_nums({row.eps, row.sup_Y, row.slope_running});
  double hmin = 0.0, hmax = 0.0;
  if (!study.halving_ratios.empty()) {
    hmin = hmax = study.halving_ratios.front();
    for (double h : study.halving_ratios) {
      hmin = std::min(hmin, h);
      hmax = std::max(hmax, h);
    }
  }
  RunResult r;
  r.metrics = {{"slope", study.slope},
               {"sup_Y", study.rows.back().sup_Y},
               {"halving_min", hmin},
               {"halving_max", hmax}};
  return r;
}

inline RunResult run_xi_escape(const RunConfig& cfg,
                               const std::filesystem::path& out) {
  Grid g(cfg.grid_n);
  const auto& block = cfg.block("escape");
  double a0 = block.value("a0", cfg.params.a);
  double b0 = block.value("b0", cfg.params.b);
  double c0 = block.value("c0", cfg.params.c);
  double lambda = block.value("lambda", 1e-3);
  double margin = block.value("margin", 0.05);
  std::string flow_name = block.value("flow", "shear");
  if (lambda <= 0.0) throw validation_error("escape.lambda must be positive");
  EscapeReport rep = xi_escape_run(a0, b0, c0, lambda, cfg.params.xi,
                                   builtin_flow(flow_name), g, cfg.T, cfg.dt,
                                   margin);
  CsvWriter csv((out / "escape.csv").string(), {"t", "min_eig", "max_eig"});
  for (const auto& row : rep.trace) csv.row_nums({row[0], row[1], row[2]});
  RunResult r;
  r.metrics = {{"first_exit_t", rep.first_exit_t},
               {"margin_reached_t", rep.margin_reached_t},
               {"max_margin", rep.max_margin},
               {"ode_exit_t", rep.ode_exit_t},
               {"m_interval", rep.m_interval},
               {"control_exited", rep.control_exited ? 1.0 : 0.0}};
  return r;
}

inline RunResult run_phase_mismatch(const RunConfig& cfg,
                                    const std::filesystem::path& out) {
  Grid g(cfg.grid_n);
  const auto& block = cfg.block("phase");
  std::vector<double> times = doubles_from(block, "times", {1.0, cfg.T});
  PhaseMismatchResult res = phase_mismatch_run(cfg.params, g, times, cfg.dt);
  CsvWriter csv((out / "growth.csv").string(),
                {"t", "max_grad_R", "resolved_flag", "probe_angle"});
  for (const auto& row : res.rows)
    csv.row({CsvWriter::num(row.t), CsvWriter::num(row.max_grad),
             row.resolved ? "1" : "0", ""});
  if (cfg.snapshot_every > 0.0)
    write_snapshot((out / "final_R.qbe").string(), res.final_R,
                   res.rows.back().t, cfg.params);
  RunResult r;
  r.metrics = {
      {"growth_ratio", res.rows.back().max_grad / res.rows.front().max_grad},
      {"final_max_grad", res.rows.back().max_grad}};
  return r;
}

inline RunResult run_vortex_defects(const RunConfig& cfg,
                                    const std::filesystem::path& out) {
  Grid g(cfg.grid_n);
  const auto& block = cfg.block("vortex");
  std::vector<double> times = doubles_from(block, "times", {1.0, 2.0, 4.0, 8.0});
  std::string flow_name = block.value("flow", "taylor_green");
  double probe_offset = block.value("probe_offset", 0.35);
  std::array<double, 2> center{block.value("probe_x", 0.0),
                               block.value("probe_y", 0.0)};
  VortexReport rep = vortex_defect_run(builtin_flow(flow_name), cfg.params, g,
                                       times, cfg.dt, center, probe_offset);
  CsvWriter csv((out / "growth.csv").string(),
                {"t", "max_grad_R", "resolved_flag", "probe_angle"});
  for (const auto& row : rep.rows)
    csv.row({CsvWriter::num(row.t), CsvWriter::num(row.max_grad),
             row.resolved ? "1" : "0",
             std::isnan(row.probe_angle) ? "" : CsvWriter::num(row.probe_angle)});
  CsvWriter cmp((out / "oracle_compare.csv").string(),
                {"t", "max_grad_pde", "max_grad_oracle", "rel_gap"});
  for (std::size_t i = 0; i < rep.rows.size(); ++i)
    cmp.row_nums({rep.rows[i].t, rep.rows[i].max_grad, rep.oracle_max_grad[i],
                  rep.rel_gap[i]});
  double max_gap = 0.0;
  bool all_resolved = true;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    if (rep.rows[i].resolved)
      max_gap = std::max(max_gap, rep.rel_gap[i]);
    else
      all_resolved = false;
  }
  RunResult r;
  r.metrics = {
      {"growth_ratio", rep.rows.back().max_grad / rep.rows.front().max_grad},
      {"max_rel_gap", max_gap},
      {"all_resolved", all_resolved ? 1.0 : 0.0},
      {"probe_time", rep.probe_time},
      {"probe_angle_at_tk", rep.probe_angle_at_tk}};
  return r;
}

inline RunResult run_ode_portrait(const RunConfig& cfg,
                                  const std::filesystem::path& out) {
  const auto& block = cfg.block("portrait");
  int per_axis = block.value("per_axis", 7);
  double range = block.value("range", 0.45);
  double t_end = block.value("t_end", cfg.T);
  int store_every = block.value("store_every", 100);
  CsvWriter csv((out / "portrait.csv").string(), {"seed_id", "t", "l1", "l2"});
  int id = 0;
  for (int i = 0; i < per_axis; ++i)
    for (int j = 0; j < per_axis; ++j) {
      EigenPair l{-range + 2.0 * range * i / (per_axis - 1),
                  -range + 2.0 * range * j / (per_axis - 1)};
      double t = 0.0;
      csv.row_nums({double(id), t, l.l1, l.l2});
      long nstep = std::lround(t_end / cfg.dt);
      for (long k = 0; k < nstep; ++k) {
        l = eigenvalue_flow(l, cfg.params, {cfg.dt, OdeMethod::rk4, cfg.dt, 1e-12});
        t += cfg.dt;
        if ((k + 1) % store_every == 0 || k + 1 == nstep)
          csv.row_nums({double(id), t, l.l1, l.l2});
      }
      ++id;
    }
  RunResult r;
  r.metrics = {{"n_trajectories", double(per_axis * per_axis)},
               {"t_end", t_end}};
  return r;
}

inline const char* primary_metric(Experiment e) {
  switch (e) {
    case Experiment::full_beris: return "final_kinetic";
    case Experiment::trotter_rate: return "slope";
    case Experiment::ericksen_limit: return "sup_Y";
    case Experiment::xi_escape: return "first_exit_t";
    case Experiment::phase_mismatch: return "growth_ratio";
    case Experiment::vortex_defects: return "growth_ratio";
    case Experiment::ode_portrait: return "n_trajectories";
  }
  return "";
}

}  // namespace runner_detail

/// Execute one experiment. Writes diagnostics, experiment CSVs, optional
/// snapshots and a manifest into cfg.out_dir; partial outputs are kept when
/// a run diverges. Deterministic for a fixed config, seed and thread count.
inline RunResult run(const RunConfig& cfg) {
  cfg.validate();
  worker_threads() = cfg.threads;
  namespace fs = std::filesystem;
  fs::path out(cfg.out_dir);
  fs::create_directories(out);
  auto t0 = std::chrono::steady_clock::now();

  RunResult result;
  std::string status = "ok";
  try {
    using runner_detail::run_ericksen;
    using runner_detail::run_full_beris;
    using runner_detail::run_ode_portrait;
    using runner_detail::run_phase_mismatch;
    using runner_detail::run_trotter_rate;
    using runner_detail::run_vortex_defects;
    using runner_detail::run_xi_escape;
    switch (cfg.experiment) {
      case Experiment::full_beris: result = run_full_beris(cfg, out); break;
      case Experiment::trotter_rate: result = run_trotter_rate(cfg, out); break;
      case Experiment::ericksen_limit: result = run_ericksen(cfg, out); break;
      case Experiment::xi_escape: result = run_xi_escape(cfg, out); break;
      case Experiment::phase_mismatch:
        result = run_phase_mismatch(cfg, out);
        break;
      case Experiment::vortex_defects:
        result = run_vortex_defects(cfg, out);
        break;
      case Experiment::ode_portrait: result = run_ode_portrait(cfg, out); break;
    }
  } catch (...) {
    status = "diverged_or_failed";
    double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    nlohmann::json manifest = {{"config", cfg.raw},
                               {"version", kVersion},
                               {"status", status},
                               {"wall_time_s", wall}};
    std::ofstream(out / "manifest.json") << manifest.dump(2) << '\n';
    throw;
  }

  double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  nlohmann::json metrics = nlohmann::json::object();
  for (const auto& [k, v] : result.metrics) metrics[k] = v;
  nlohmann::json manifest = {{"config", cfg.raw},
                             {"version", kVersion},
                             {"status", status},
                             {"wall_time_s", wall},
                             {"metrics", metrics}};
  std::ofstream(out / "manifest.json") << manifest.dump(2) << '\n';
  std::ofstream(out / "summary.json") << metrics.dump(2) << '\n';
  return result;
}

struct SweepRow {
  double value = 0.0;
  int status = 0;  // CLI-style code; 0 ok
  RunResult result;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

/// Run the experiment once per parameter value, each in its own directory
/// under <out_dir>/sweep; failures are recorded per row and the sweep
/// continues. The aggregated CSV carries the experiment's metrics plus a
/// running log-log slope of its primary metric against the parameter.
inline SweepResult sweep(const RunConfig& base, const std::string& param,
                         const std::vector<double>& values) {
  if (values.empty()) throw config_error("sweep: empty values list");
  namespace fs = std::filesystem;
  fs::path root(base.out_dir);
  fs::create_directories(root);

  SweepResult out;
  std::vector<std::string> metric_names;
  for (double v : values) {
    nlohmann::json j = base.raw;
    set_by_path(j, param, v);
    SweepRow row;
    row.value = v;
    try {
      RunConfig cfg = RunConfig::from_json(j);
      char sub[64];
      std::snprintf(sub, sizeof(sub), "value_%.10g", v);
      cfg.out_dir = (root / sub).string();
      row.result = run(cfg);
      if (metric_names.empty())
        for (const auto& [k, _] : row.result.metrics) metric_names.push_back(k);
    } catch (const config_error&) {
      row.status = 2;
    } catch (const validation_error&) {
      row.status = 3;
    } catch (const divergence_error&) {
      row.status = 4;
    } catch (const std::exception&) {
      row.status = 1;
    }
    out.rows.push_back(std::move(row));
  }

  std::vector<std::string> cols{param, "status"};
  for (const auto& m : metric_names) cols.push_back(m);
  cols.push_back("slope_running");
  CsvWriter csv((root / "sweep.csv").string(), cols);
  const char* primary = runner_detail::primary_metric(base.experiment);
  std::vector<double> xs, ys;
  for (const auto& row : out.rows) {
    std::vector<std::string> cells{CsvWriter::num(row.value),
                                   std::to_string(row.status)};
    if (row.status == 0) {
      for (const auto& m : metric_names) cells.push_back(CsvWriter::num(row.result.get(m)));
      double pv = row.result.get(primary);
      if (row.value > 0.0 && pv > 0.0) {
        xs.push_back(row.value);
        ys.push_back(pv);
      }
    } else {
      for (std::size_t i = 0; i < metric_names.size(); ++i) cells.push_back("");
    }
    cells.push_back(xs.size() >= 2 ? CsvWriter::num(fit_loglog_slope(xs, ys))
                                   : "");
    csv.row(cells);
  }
  return out;
}

}  // namespace qbe
