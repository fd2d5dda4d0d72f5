#include "solheat/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <memory>

#include "solheat/coupled.hpp"
#include "solheat/diagnostics.hpp"

namespace solheat {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Clock = std::chrono::steady_clock;

constexpr long kTargetSamples = 2000;

/// Fixed steps of size dt with a shortened last step, or adaptive steps
/// from a bound evaluated on the current state.
class TimeGrid {
 public:
  explicit TimeGrid(const RunConfig& c) : t_end_(c.t_end), dt_(c.dt) {
    if (dt_) {
      const double n = c.t_end / *dt_;
      steps_ = std::max(1L, static_cast<long>(std::ceil(n - 1e-9 * std::max(1.0, n))));
    }
  }

  bool fixed() const { return dt_.has_value(); }
  long fixed_steps() const { return steps_; }

  bool done(long k, double time) const {
    if (dt_) return k >= steps_;
    return time >= t_end_ * (1 - 1e-14);
  }

  double time_at(long k) const { return k >= steps_ ? t_end_ : double(k) * *dt_; }

  double next(long k, double time, double bound) const {
    if (dt_) return k + 1 == steps_ ? t_end_ - double(k) * *dt_ : *dt_;
    return std::min(bound, t_end_ - time);
  }

 private:
  double t_end_;
  std::optional<double> dt_;
  long steps_ = 0;
};

long stride_for(const RunConfig& c, double first_dt) {
  if (c.record_stride > 0) return c.record_stride;
  const double est = c.t_end / first_dt;
  return std::max(1L, static_cast<long>(est / kTargetSamples));
}

/// Drives a problem through the shared time loop. Problem types provide
/// bound(), advance(dt), sample(), field() and finish(report).
template <typename Problem>
void integrate(const RunConfig& c, Problem& p, RunReport& rep) {
  const TimeGrid grid(c);
  const double first = grid.fixed() ? *c.dt : p.bound();
  const long stride = stride_for(c, first);
  std::vector<double> snaps = c.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  std::size_t next_snap = 0;
  auto take_snapshots = [&](double time, double dt) {
    while (next_snap < snaps.size() && snaps[next_snap] <= time + 0.5 * dt) {
      rep.snapshots.emplace_back(time, p.field());
      ++next_snap;
    }
  };

  const auto start = Clock::now();
  long k = 0;
  double time = 0;
  rep.series.push_back(p.sample(0, 0.0));
  take_snapshots(0.0, grid.fixed() ? *c.dt : first);
  try {
    while (!grid.done(k, time)) {
      const double dt = grid.next(k, time, grid.fixed() ? 0.0 : p.bound());
      p.advance(dt);
      ++k;
      time = grid.fixed() ? grid.time_at(k) : time + dt;
      if (k % stride == 0 || grid.done(k, time)) rep.series.push_back(p.sample(k, time));
      take_snapshots(time, dt);
    }
  } catch (...) {
    rep.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    rep.steps = k;
    rep.final_time = time;
    throw;
  }
  rep.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  rep.steps = k;
  rep.final_time = time;
  p.finish(rep);
}

struct OneD {
  const RunConfig& c;
  std::shared_ptr<const Mesh1D<double>> mesh;
  Params1D<double> params;
  State1D<double> state;
  ViscosityState<double> visc;
  ExplicitOptions explicit_opts;
  long iterations = 0;

  explicit OneD(const RunConfig& cfg)
      : c(cfg),
        mesh(std::make_shared<const Mesh1D<double>>(build_uniform_mesh_1d<double>(cfg.ns))),
        params(cfg.params_1d()),
        state(make_state(mesh, Vec(Vec::Constant(cfg.ns, cfg.t0)))),
        visc(initial_viscosity(state.T, params.k_par)),
        explicit_opts{10 * std::max(cfg.t0, 1e-300)} {}

  double bound() const { return 0.9 * monotone_dt(*mesh, state.T.cwiseAbs().maxCoeff(), params); }

  void advance(double dt) {
    switch (c.scheme) {
      case Scheme::explicit_euler:
        state = step_explicit(state, params, dt, explicit_opts);
        break;
      case Scheme::implicit: {
        NewtonReport r;
        state = step_implicit(state, params, dt, c.newton(), &r);
        iterations += r.iterations;
        break;
      }
      case Scheme::imex:
        state = step_imex(state, params, dt, visc);
        visc = update_viscosity(visc, state.T, params.k_par);
        break;
    }
  }

  Sample sample(long k, double t) const {
    const auto e = energy_breakdown(state, params);
    return Sample{k, t, l2_norm(*mesh, state.T), mass(*mesh, state.T), e.e1, e.e2, e.e3,
                  c.scheme == Scheme::imex ? visc.nu : 0.0};
  }

  Mat field() const { return state.T; }
  void finish(RunReport& rep) const {
    rep.field = state.T;
    rep.nonlinear_iterations = iterations;
  }
};

struct TwoD {
  const RunConfig& c;
  std::shared_ptr<const Mesh2D<double>> mesh;
  Params2D<double> params;
  State2D<double> state;
  ViscosityState<double> visc;
  ExplicitOptions explicit_opts;
  Mat buffer;
  long iterations = 0;

  explicit TwoD(const RunConfig& cfg)
      : c(cfg),
        mesh(std::make_shared<const Mesh2D<double>>(build_mesh_2d<double>(cfg.ns, cfg.nr))),
        params(cfg.physics),
        state(make_state(mesh, Mat(Mat::Constant(cfg.ns, cfg.nr, cfg.t0)))),
        visc(initial_viscosity(state.T, params.k_par)),
        explicit_opts{10 * std::max(cfg.t0, 1e-300)} {}

  double bound() const { return explicit_dt_2d(*mesh, state.T.cwiseAbs().maxCoeff(), params); }

  void advance(double dt) {
    NewtonReport r;
    if (c.problem == Problem::two_d_unsplit) {
      const UnsplitMode mode = c.scheme == Scheme::imex ? UnsplitMode::imex : UnsplitMode::implicit;
      state = step_unsplit(state, params, dt, mode, visc, c.unsplit(), &r);
      iterations += r.iterations;
    } else if (c.scheme == Scheme::explicit_euler) {
      explicit_update_2d(*mesh, state.T, params, dt, buffer);
      detail::check_blowup<double>(buffer, explicit_opts.blowup_ceiling, state.step + 1);
      state.T.swap(buffer);
      state.time += dt;
      ++state.step;
    } else {
      const SweepScheme s = c.scheme == Scheme::imex ? SweepScheme::imex : SweepScheme::implicit;
      state = step_split(state, params, dt, visc, s, c.newton());
    }
    if (c.scheme == Scheme::imex) visc = update_viscosity(visc, state.T, params.k_par);
  }

  Sample sample(long k, double t) const {
    const auto e = energy_breakdown(state, params);
    return Sample{k, t, l2_norm(*mesh, state.T), mass(*mesh, state.T), e.e1, e.e2, e.e3,
                  c.scheme == Scheme::imex ? visc.nu : 0.0};
  }

  Mat field() const { return state.T; }
  void finish(RunReport& rep) const {
    rep.field = state.T;
    rep.nonlinear_iterations = iterations;
  }
};

struct Coupled {
  const RunConfig& c;
  std::shared_ptr<const Mesh2D<double>> mesh;
  CoupledParams<double> params;
  CoupledState<double> state;
  ViscosityState<double> visc_i, visc_e;

  explicit Coupled(const RunConfig& cfg)
      : c(cfg),
        mesh(std::make_shared<const Mesh2D<double>>(build_mesh_2d<double>(cfg.ns, cfg.nr))),
        params(cfg.coupled),
        state{make_state(mesh, Mat(Mat::Constant(cfg.ns, cfg.nr, cfg.t0))),
              make_state(mesh, Mat(Mat::Constant(cfg.ns, cfg.nr, cfg.t0_electron)))},
        visc_i(initial_viscosity(state.ions.T, params.ions.k_par)),
        visc_e(initial_viscosity(state.electrons.T, params.electrons.k_par)) {}

  double bound() const { return 0; }

  void advance(double dt) {
    const SweepScheme s = c.scheme == Scheme::imex ? SweepScheme::imex : SweepScheme::implicit;
    state = step_coupled(state, params, dt, visc_i, visc_e, s, c.newton());
    if (s == SweepScheme::imex) {
      visc_i = update_viscosity(visc_i, state.ions.T, params.ions.k_par);
      visc_e = update_viscosity(visc_e, state.electrons.T, params.electrons.k_par);
    }
  }

  Sample sample(long k, double t) const {
    const auto ei = energy_breakdown(state.ions, params.ions);
    const auto ee = energy_breakdown(state.electrons, params.electrons);
    const double l2 = std::sqrt(l2_norm_sq(*mesh, state.ions.T) + l2_norm_sq(*mesh, state.electrons.T));
    return Sample{k,           t,           l2, mass(*mesh, state.ions.T) + mass(*mesh, state.electrons.T),
                  ei.e1 + ee.e1, ei.e2 + ee.e2, ei.e3 + ee.e3, c.scheme == Scheme::imex ? visc_e.nu : 0.0};
  }

  Mat field() const { return state.ions.T; }
  void finish(RunReport& rep) const {
    rep.field = state.ions.T;
    rep.electrons = state.electrons.T;
  }
};

std::filesystem::path output_path(const RunConfig& c, const std::string& suffix) {
  return std::filesystem::path(c.output_dir) / (c.name + suffix);
}

void write_field(const RunConfig& c, const std::filesystem::path& path, const Mat& t) {
  if (c.problem == Problem::one_d) write_field_csv(path, build_uniform_mesh_1d<double>(c.ns), Vec(t.col(0)));
  else write_field_csv(path, build_mesh_2d<double>(c.ns, c.nr), t);
}

std::string snapshot_label(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", t);
  return buf;
}

}  // namespace

RunReport run(const RunConfig& config, const RunOptions& options) {
  config.validate();
  RunReport rep;
  rep.config = config;
  const bool write = options.write_outputs && !config.output_dir.empty();
  try {
    switch (config.problem) {
      case Problem::one_d: {
        OneD p(config);
        integrate(config, p, rep);
        break;
      }
      case Problem::two_d:
      case Problem::two_d_unsplit: {
        TwoD p(config);
        integrate(config, p, rep);
        break;
      }
      case Problem::coupled: {
        Coupled p(config);
        integrate(config, p, rep);
        break;
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    if (write) write_series_csv(output_path(config, "_series.csv"), rep.series, std::string(e.what()));
    throw;
  }
  if (options.compute_error && !config.reference.empty()) {
    const FieldFile ref = config.reference == "auto" ? load_or_compute_reference(config)
                                                     : read_field_csv(config.reference);
    rep.error = relative_error_against(config, rep.field, ref);
  }
  if (write) write_outputs(rep);
  return rep;
}

void write_outputs(const RunReport& rep) {
  const RunConfig& c = rep.config;
  write_series_csv(output_path(c, "_series.csv"), rep.series);
  if (c.problem == Problem::coupled) {
    write_field(c, output_path(c, "_ions.csv"), rep.field);
    write_field(c, output_path(c, "_electrons.csv"), rep.electrons);
  } else {
    write_field(c, output_path(c, "_field.csv"), rep.field);
  }
  for (const auto& [t, f] : rep.snapshots) write_field(c, output_path(c, "_t" + snapshot_label(t) + ".csv"), f);
}

std::filesystem::path cache_dir() {
  if (const char* env = std::getenv("SOLHEAT_CACHE_DIR"); env && *env) return env;
  return ".solheat-cache";
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : canonical_form(config)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

FieldFile load_or_compute_reference(const RunConfig& config) {
  const RunConfig rc = reference_config(config);
  const auto dir = cache_dir();
  const auto path = dir / ("reference_" + to_string(rc.problem) + "_" + config_hash(rc) + ".csv");
  if (std::filesystem::exists(path)) return read_field_csv(path);
  RunOptions opts;
  opts.write_outputs = false;
  opts.compute_error = false;
  const RunReport rep = run(rc, opts);
  std::filesystem::create_directories(dir);
  // Write then rename so concurrent readers never see a partial file.
  const auto tmp = dir / (path.filename().string() + ".tmp" + std::to_string(std::rand()));
  write_field(rc, tmp, rep.field);
  std::filesystem::rename(tmp, path);
  return read_field_csv(path);
}

double relative_error_against(const RunConfig& config, const Mat& field, const FieldFile& ref) {
  if (config.problem == Problem::coupled) throw ConfigError("reference", "no reference comparison for coupled runs");
  auto check_uniform = [](const Vec& centers, const char* axis) {
    const Eigen::Index n = centers.size();
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(centers(i) - (double(i) + 0.5) / double(n)) > 1e-9)
        throw Error(std::string("reference field is not on a uniform ") + axis + "-mesh");
  };
  check_uniform(ref.s_centers, "s");
  if (config.problem == Problem::one_d) {
    if (ref.two_d()) throw Error("1D run compared against a 2D reference");
    return relative_error(build_uniform_mesh_1d<double>(config.ns), Vec(field.col(0)),
                          build_uniform_mesh_1d<double>(ref.s_centers.size()), Vec(ref.T.col(0)));
  }
  if (!ref.two_d()) throw Error("2D run compared against a 1D reference");
  check_uniform(ref.r_centers, "r");
  return relative_error(build_mesh_2d<double>(config.ns, config.nr), field,
                        build_mesh_2d<double>(ref.s_centers.size(), ref.r_centers.size()), ref.T);
}

double temperature_ratio(const RunReport& rep, double s, double r) {
  if (rep.config.problem != Problem::coupled) throw ConfigError("problem", "temperature ratio needs a coupled run");
  const auto cell = [](double x, int n) { return std::clamp(static_cast<Eigen::Index>(x * n), Eigen::Index(0), Eigen::Index(n - 1)); };
  const Eigen::Index i = cell(s, rep.config.ns), j = cell(r, rep.config.nr);
  return rep.field(i, j) / rep.electrons(i, j);
}

}  // namespace solheat
