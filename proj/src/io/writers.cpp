#include "covsim/io/writers.hpp"

#include <cmath>
#include <cstdio>

#include "covsim/errors.hpp"

namespace covsim::io {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw ValidationError(std::string("refusing to write non-finite ") + what);
  }
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) {
      throw ValidationError("cannot open for writing: " + tmp.string());
    }
    f << content;
    f.flush();
    if (!f) {
      throw ValidationError("short write: " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

RunWriter::RunWriter(const std::filesystem::path& dir, int n_agents)
    : dir_(dir), n_agents_(n_agents) {
  std::filesystem::create_directories(dir_);
  metrics_buf_ = "t,e_norm,min_pair_dist";
  for (int i = 1; i <= n_agents_; ++i) {
    metrics_buf_ += ",mode_" + std::to_string(i);
  }
  for (int i = 1; i <= n_agents_; ++i) {
    metrics_buf_ += ",normal_len_" + std::to_string(i);
  }
  metrics_buf_ += "\n";
}

void RunWriter::metrics(const eng::MetricsRow& row) {
  require_finite(row.t, "t");
  require_finite(row.e_norm, "e_norm");
  // the pair distance is undefined while fewer than two agents fly
  const double dist = std::isfinite(row.min_pair_dist) ? row.min_pair_dist
                                                       : -1.0;
  metrics_buf_ += fmt_double(row.t);
  metrics_buf_ += ',';
  metrics_buf_ += fmt_double(row.e_norm);
  metrics_buf_ += ',';
  metrics_buf_ += fmt_double(dist);
  for (const auto& m : row.modes) {
    metrics_buf_ += ',';
    metrics_buf_ += m;
  }
  for (double n : row.normal_length) {
    require_finite(n, "normal length");
    metrics_buf_ += ',';
    metrics_buf_ += fmt_double(n);
  }
  metrics_buf_ += '\n';
}

void RunWriter::event(const nlohmann::ordered_json& e) {
  events_buf_ += e.dump();
  events_buf_ += '\n';
}

void RunWriter::snapshot(double t, const cov::CoverageField& field,
                         const cov::SurfaceMesh& mesh) {
  std::string buf = "x,y,z,q\n";
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const auto& cell = mesh.cells()[i];
    const double q = field.q[static_cast<int>(i)];
    require_finite(q, "coverage level");
    buf += fmt_double(cell.center.x());
    buf += ',';
    buf += fmt_double(cell.center.y());
    buf += ',';
    buf += fmt_double(cell.center.z());
    buf += ',';
    buf += fmt_double(q);
    buf += '\n';
  }
  char name[64];
  std::snprintf(name, sizeof(name), "coverage_%06d_t%.0f.csv",
                snapshot_count_++, t);
  write_file_atomic(dir_ / "snapshots" / name, buf);
}

void RunWriter::finish() {
  write_file_atomic(dir_ / "metrics.csv", metrics_buf_);
  write_file_atomic(dir_ / "events.jsonl", events_buf_);
}

std::string checker_report_json(const eng::CheckerReport& r) {
  nlohmann::ordered_json j;
  j["p_max"] = r.p_max;
  j["perimeter_factor_outer"] = r.perimeter_factor_outer;
  j["perimeter_factor_inner"] = r.perimeter_factor_inner;
  j["theorem1"] = {{"status", eng::status_name(r.th1)},
                   {"lhs_detection_time", r.th1_lhs},
                   {"rhs_worst_transit", r.th1_rhs},
                   {"margin", r.th1_margin}};
  j["theorem2"] = {{"status", eng::status_name(r.th2)},
                   {"window", r.th2_window},
                   {"return_reserve", r.th2_reserve},
                   {"detect_to_impact_min", r.th2_time_min},
                   {"detect_to_impact_max", r.th2_time_max},
                   {"margin_best", r.th2_margin_best},
                   {"margin_worst", r.th2_margin_worst}};
  j["theorem3"] = {{"status", eng::status_name(r.th3)},
                   {"min_sensing_range", r.th3_lhs},
                   {"size_threshold", r.th3_rhs}};
  j["remark1"] = {{"window", r.remark1_window},
                  {"impacts_per_window", r.remark1_impacts_per_window},
                  {"premise_ok", r.remark1_premise_ok}};
  j["overall"] = eng::status_name(r.overall());
  return j.dump(2) + "\n";
}

}  // namespace covsim::io
