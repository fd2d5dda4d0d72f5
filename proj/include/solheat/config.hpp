#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "solheat/coupled.hpp"
#include "solheat/errors.hpp"
#include "solheat/heat1d.hpp"
#include "solheat/heat2d.hpp"

namespace solheat {

/// Malformed or inconsistent run configuration.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what) : Error(key + ": " + what), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

enum class Problem { one_d, two_d, two_d_unsplit, coupled };
enum class Scheme { explicit_euler, implicit, imex };

std::string to_string(Problem p);
std::string to_string(Scheme s);
Problem parse_problem(std::string_view text);
Scheme parse_scheme(std::string_view text);

struct RunConfig {
  std::string name = "run";
  Problem problem = Problem::one_d;
  Scheme scheme = Scheme::imex;
  int ns = 150;
  int nr = 100;
  /// Fixed time step. Empty means adaptive (explicit scheme only).
  std::optional<double> dt;
  double t_end = 1;
  double t0 = 5;
  double t0_electron = 3;

  Params2D<double> physics{1.0, 1e-2, 2.0, 10.0};  ///< 1d uses k_par and gamma only
  CoupledParams<double> coupled{{0.02, 1e-2, 0.0, 10.0}, {1.0, 1e-2, 2.5, 10.0}, -0.02};

  double newton_tol = 1e-10;
  int newton_max_iter = 50;
  double solver_tol = 1e-10;
  int solver_max_iter = 20000;

  std::string output_dir;       ///< empty: no files written
  long record_stride = 0;       ///< 0: about 2000 samples per run
  std::vector<double> snapshot_times;
  std::string reference;        ///< empty, "auto", or a field CSV path

  Params1D<double> params_1d() const { return physics.parallel(); }
  NewtonOptions newton() const { return {newton_tol, newton_max_iter}; }
  UnsplitOptions unsplit() const { return {newton(), solver_tol, solver_max_iter}; }

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Parses `key = value` lines; `#` starts a comment. Defaults follow the
/// experiment constants of the chosen problem.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Stable textual form of every field that affects the computed solution.
std::string canonical_form(const RunConfig& config);

/// The explicit fine-grid run a config's errors are measured against.
RunConfig reference_config(const RunConfig& config);

}  // namespace solheat
