#ifndef HOCBF_CSV_IO_HPP
#define HOCBF_CSV_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "hocbf/errors.hpp"
#include "hocbf/sim.hpp"

namespace hocbf {

// Fixed, documented trajectory column order.  Tools and tests treat this
// string as the single source of truth for the CSV layout.
inline const char* trajectory_csv_header() {
  return "t,x1_angle,x1_rate,x2_angle,x2_rate,u1,u2,sigma1,sigma2,"
         "phi0_1,phi1_1,phi0_2,phi1_2,clf_phi0_1,clf_phi0_2,"
         "varrho_1,varrho_2,region_1,region_2";
}

namespace io_detail {

inline void append_num(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  out += buf;
}

}  // namespace io_detail

inline std::string format_trajectory_csv(const TrajectoryRecord& record) {
  std::string out = trajectory_csv_header();
  out += '\n';
  for (const TrajectoryRow& row : record.rows) {
    io_detail::append_num(out, row.t);
    for (int i = 0; i < row.x.size(); ++i) {
      out += ',';
      io_detail::append_num(out, row.x(i));
    }
    for (int i = 0; i < row.u.size(); ++i) {
      out += ',';
      io_detail::append_num(out, row.u(i));
    }
    for (int i = 0; i < 2; ++i) {
      out += ',';
      io_detail::append_num(out, row.diag[i].sigma);
    }
    for (int i = 0; i < 2; ++i) {
      out += ',';
      io_detail::append_num(out, row.diag[i].phi0);
      out += ',';
      io_detail::append_num(out, row.diag[i].phi1);
    }
    for (int i = 0; i < 2; ++i) {
      out += ',';
      io_detail::append_num(out, row.diag[i].clf_phi0);
    }
    for (int i = 0; i < 2; ++i) {
      out += ',';
      io_detail::append_num(out, row.diag[i].varrho);
    }
    for (int i = 0; i < 2; ++i) {
      out += ',';
      out += row.diag[i].region;
    }
    out += '\n';
  }
  return out;
}

inline nlohmann::json metrics_to_json(const Scenario& sc,
                                      const TrajectoryRecord& record) {
  const Metrics& m = record.metrics;
  nlohmann::json out;
  out["scenario"] = sc.name;
  out["controller"] = to_string(sc.controller);
  out["steps"] = m.steps;
  out["dt"] = sc.dt;
  out["horizon"] = sc.horizon;
  out["diverged"] = record.diverged;
  out["max_u_inf"] = m.max_u_inf;
  out["tracking_rmse"] = m.tracking_rmse;
  out["tracking_rmse_all"] = m.tracking_rmse_all;
  if (m.has_margin_metrics) {
    out["min_phi0"] = m.min_phi0;
    out["min_phi1"] = m.min_phi1;
    out["min_phi0_overall"] = m.min_phi0_overall;
    out["min_phi_issf"] = m.min_phi_issf_overall;
    out["min_phi_issf_per_pendulum"] = m.min_phi_issf;
    out["reference_infeasible_fraction"] = m.reference_infeasible_fraction;
  }
  if (m.has_filter_metrics) {
    out["filter_inactive_fraction"] = m.filter_inactive_fraction;
    out["filter_feasible_max_dev"] = m.filter_feasible_max_dev;
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << text;
  if (!out) throw ConfigError("failed writing output file: " + path);
}

// Run provenance, written last and atomically (temp file + rename) so a
// manifest only ever describes a completed run.
struct RunManifest {
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string tool_version;
  double duration_seconds = 0.0;
};

inline nlohmann::json to_json(const RunManifest& m) {
  return nlohmann::json{{"command", m.command},
                        {"config", m.config_path},
                        {"out_dir", m.out_dir},
                        {"seed", m.seed},
                        {"tool_version", m.tool_version},
                        {"duration_seconds", m.duration_seconds}};
}

inline void write_manifest_atomic(const std::string& path, const RunManifest& m) {
  const std::string tmp = path + ".tmp";
  write_text_file(tmp, to_json(m).dump(2) + "\n");
  std::filesystem::rename(tmp, path);
}

}  // namespace hocbf

#endif  // HOCBF_CSV_IO_HPP
