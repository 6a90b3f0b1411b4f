#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "covsim/eng/checkers.hpp"
#include "covsim/eng/engine.hpp"

namespace covsim::io {

// Writes content to path atomically (temp file + rename).
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

// Buffered run-output writers. CSV/JSONL content is accumulated and flushed
// atomically on finish(); numeric fields are validated against NaN/Inf.
class RunWriter {
 public:
  RunWriter(const std::filesystem::path& dir, int n_agents);

  void metrics(const eng::MetricsRow& row);
  void event(const nlohmann::ordered_json& e);
  void snapshot(double t, const cov::CoverageField& field,
                const cov::SurfaceMesh& mesh);
  void finish();

  const std::filesystem::path& directory() const { return dir_; }

 private:
  std::filesystem::path dir_;
  int n_agents_;
  std::string metrics_buf_;
  std::string events_buf_;
  int snapshot_count_ = 0;
};

std::string checker_report_json(const eng::CheckerReport& r);

}  // namespace covsim::io
