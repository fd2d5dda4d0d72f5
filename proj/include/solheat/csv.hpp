#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "solheat/mesh.hpp"

namespace solheat {

/// One recorded time-series row.
struct Sample {
  long step = 0;
  double time = 0;
  double l2 = 0;
  double mass = 0;
  double e1 = 0;
  double e2 = 0;
  double e3 = 0;
  double nu = 0;  ///< IMEX viscosity, 0 for other schemes
};

/// Full-precision decimal form (17 significant digits).
std::string format_double(double v);

/// Header `s,T`, one row per cell centre.
void write_field_csv(const std::filesystem::path& path, const Mesh1D<double>& mesh, const Eigen::VectorXd& t);
/// Header `s,r,T`, cells in row-major (s-major) order.
void write_field_csv(const std::filesystem::path& path, const Mesh2D<double>& mesh, const Eigen::MatrixXd& t);

struct FieldFile {
  Eigen::VectorXd s_centers;
  Eigen::VectorXd r_centers;  ///< empty for 1D files
  Eigen::MatrixXd T;          ///< ns x nr (nr = 1 for 1D files)
  bool two_d() const { return r_centers.size() > 0; }
};

FieldFile read_field_csv(const std::filesystem::path& path);

/// Writes the series; a failure message adds a final `# error: ...` marker row.
void write_series_csv(const std::filesystem::path& path, const std::vector<Sample>& series,
                      const std::optional<std::string>& failure = std::nullopt);

struct SeriesFile {
  std::vector<Sample> series;
  std::optional<std::string> failure;
};

SeriesFile read_series_csv(const std::filesystem::path& path);

}  // namespace solheat
