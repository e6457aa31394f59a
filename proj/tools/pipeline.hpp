#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "barytrack/barytrack.hpp"

namespace barytrack::cli {

/// Every knob of a run. Written next to each output as run_config.ini, in the
/// same key = value form that --config accepts.
struct RunConfig {
  std::string data_path;
  std::string labels_path;  // optional label-table CSV for `test`
  int year_from = 1950;
  int year_to = 2012;
  double lower_lat = 20.0;
  double register_lat = 35.0;
  std::int64_t grid_step_seconds = kDefaultGridStepSeconds;
  int k = 20;
  int restarts = 10;
  int min_per_year = 3;
  double beta = kDefaultBeta;
  int permutations = 1000;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::optional<double> reference_t;
  std::optional<double> reference_t_beta;

  void validate() const;
  std::string to_ini() const;
  CrossingSpec crossing() const { return {lower_lat, register_lat, year_from, year_to}; }
};

/// Failure of one pipeline stage; what() is prefixed with the stage name.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct IngestResult {
  std::vector<Storm> storms;
  std::map<int, int> totals;
  std::map<int, int> crossing;
};

struct ClusterResult {
  std::vector<RegisteredTrajectory> registered;  // after year exclusion, before cropping
  CroppedCollection cropped;
  Clustering clustering;
  LabelTable labels;
};

struct TestResult {
  TestReport plain;
  TestReport decayed;
  QQData qq;
};

std::vector<Storm> load_storms(const std::string& path);

IngestResult cmd_ingest(const RunConfig& config);
ClusterResult cmd_cluster(const RunConfig& config);
ClusterResult cluster_storms(const std::vector<Storm>& storms, const RunConfig& config);
TestResult cmd_test(const RunConfig& config);
TestResult test_labels(const LabelTable& table, const RunConfig& config);
/// Runs ingest, cluster and test, then writes manifest.json with SHA-256
/// hashes of every artifact. Returns the manifest entries (file -> hash).
std::map<std::string, std::string> cmd_pipeline(const RunConfig& config);

std::string sha256_hex(const std::filesystem::path& file);

}  // namespace barytrack::cli
