#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hypercs/sampling.hpp"
#include "hypercs/solver.hpp"
#include "hypercs/synthdata.hpp"
#include "hypercs/threshold.hpp"

namespace hypercs::harness {

struct ExperimentConfig {
  synthdata::SceneSpec scene;
  double compression = 0.9;
  sampling::RowOrdering ordering = sampling::RowOrdering::max_variance;
  bool shifted = true;
  std::uint64_t seed = 7;
  std::size_t background_frames = 20;  // leading plume-free frames
  double alpha = 99.0;
  double beta_raw = 1.0;
  double beta_recon = 2.0;
  bool center_ace = true;
  std::vector<std::string> methods = {"l1", "tv"};
  solver::SolverParams l1_params;
  solver::SolverParams tv_params;

  void validate() const;
};

ExperimentConfig default_config();  // the release scenario end to end
void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path);
ExperimentConfig load_config(const std::filesystem::path& path);

struct ReportRow {
  std::size_t frame = 0;
  std::string method;     // l1 | tv
  std::string statistic;  // ace | bulk | bulk_persist
  double multiplier = 0.0;
  double threshold = 0.0;  // reconstruction-path threshold at this multiplier
  std::size_t count_raw = 0;
  std::size_t count_recon = 0;
};

struct RunSummary {
  std::filesystem::path out_dir;
  std::vector<ReportRow> rows;
  // operating thresholds keyed "path.statistic", e.g. "raw.ace", "l1.bulk"
  std::map<std::string, double> thresholds;
  std::map<std::string, bool> converged;  // per method
  std::string report_hash;                // fnv1a-64 of report.csv, hex
};

// Runs scene generation, sampling, both reconstructions, detection,
// thresholding and the sweep, leaving every intermediate on disk under
// out_dir. Honors HYPERCS_WORKERS for frame-level parallelism; outputs do
// not depend on the worker count.
RunSummary run_pipeline(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

std::vector<ReportRow> load_report(const std::filesystem::path& csv_path);

// per-frame error metrics between two cube sequences, written as CSV
void compare_sequences(const std::filesystem::path& dir_a, const std::filesystem::path& dir_b,
                       const std::filesystem::path& out_csv);

std::uint64_t fnv1a(const void* data, std::size_t len);
std::string fnv1a_hex(const std::string& bytes);
std::string read_file_bytes(const std::filesystem::path& path);

std::size_t worker_count();  // HYPERCS_WORKERS override, else hardware

// Runs fn(0..count-1) on worker_count() threads. Callers must make writes
// slot-deterministic; the first exception wins and is rethrown.
void parallel_frames(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace hypercs::harness
