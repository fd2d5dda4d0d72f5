#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "solheat/config.hpp"
#include "solheat/csv.hpp"

namespace solheat {

struct RunReport {
  RunConfig config;
  std::vector<Sample> series;
  Eigen::MatrixXd field;      ///< final T, ns x 1 in 1D; ion temperature for the coupled problem
  Eigen::MatrixXd electrons;  ///< coupled problem only
  std::vector<std::pair<double, Eigen::MatrixXd>> snapshots;
  double wall_seconds = 0;    ///< time loop only
  long steps = 0;
  double final_time = 0;
  long nonlinear_iterations = 0;
  std::optional<double> error;  ///< relative L2 error against the reference
};

struct RunOptions {
  bool write_outputs = true;
  bool compute_error = true;
};

/// Integrates from constant initial data to t_end. Scheme failures are
/// rethrown after the partial series is written with an error marker row.
RunReport run(const RunConfig& config, const RunOptions& options = {});

/// Directory from SOLHEAT_CACHE_DIR, else ./.solheat-cache.
std::filesystem::path cache_dir();

/// 16 hex digits of FNV-1a over the canonical config text.
std::string config_hash(const RunConfig& config);

/// Cached explicit fine-grid solution matching `config`, computed on a miss.
FieldFile load_or_compute_reference(const RunConfig& config);

/// Relative L2 error of a final field against a reference field file.
double relative_error_against(const RunConfig& config, const Eigen::MatrixXd& field, const FieldFile& reference);

/// Writes the final field(s) of a report under config.output_dir.
void write_outputs(const RunReport& report);

/// T_i / T_e in the cell containing (s, r).
double temperature_ratio(const RunReport& report, double s, double r);

struct BenchRow {
  RunConfig config;
  double seconds = 0;
  long steps = 0;
  std::optional<double> error;
  std::string status = "ok";
};

/// Runs every config, at most `workers` at a time. A failing run is
/// recorded in its row and the others continue.
std::vector<BenchRow> bench(const std::vector<RunConfig>& configs, int workers = 1);
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

/// All *.cfg files of a directory, in file-name order.
std::vector<RunConfig> load_config_dir(const std::filesystem::path& dir);

struct TableOptions {
  std::optional<double> t_end;  ///< overrides the experiment end time
  int workers = 1;
};

/// Configs behind one of the experiment tables (1 to 6).
std::vector<RunConfig> table_configs(int which, const TableOptions& options = {});
/// Table-shaped CSV: one line per scheme row, one column per sweep value.
void write_table_csv(std::ostream& out, int which, const std::vector<BenchRow>& rows);

}  // namespace solheat
