// solheat: run, reference, compare, bench and tables front end.
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "solheat/runner.hpp"

namespace {

using namespace solheat;

int print_run(const RunReport& rep) {
  std::cout << "problem " << to_string(rep.config.problem) << ", scheme " << to_string(rep.config.scheme) << "\n"
            << "steps " << rep.steps << ", t " << format_double(rep.final_time) << ", wall " << rep.wall_seconds
            << " s\n";
  if (!rep.series.empty()) {
    const Sample& s = rep.series.back();
    std::cout << "l2 " << format_double(s.l2) << ", mass " << format_double(s.mass) << "\n";
  }
  if (rep.error) std::cout << "relative_error " << format_double(*rep.error) << "\n";
  return 0;
}

void emit(const std::string& out_path, const std::function<void(std::ostream&)>& write) {
  if (out_path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw Error("cannot write " + out_path);
  write(f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-volume solver for nonlinear anisotropic heat transport in a tokamak edge"};
  app.require_subcommand(1);

  std::string config_path, reference_path, dir, out_path, which;
  int jobs = 1;
  double t_end = 0;

  auto* run_cmd = app.add_subcommand("run", "integrate one configuration");
  run_cmd->add_option("config", config_path, "configuration file")->required();

  auto* ref_cmd = app.add_subcommand("reference", "compute (or fetch from the cache) the reference solution");
  ref_cmd->add_option("config", config_path, "configuration file")->required();

  auto* cmp_cmd = app.add_subcommand("compare", "run a configuration and measure its error against a field file");
  cmp_cmd->add_option("config", config_path, "configuration file")->required();
  cmp_cmd->add_option("--reference", reference_path, "reference field CSV")->required();

  auto* bench_cmd = app.add_subcommand("bench", "run every .cfg file of a directory");
  bench_cmd->add_option("config-dir", dir, "directory of configuration files")->required();
  bench_cmd->add_option("-j,--jobs", jobs, "concurrent runs")->check(CLI::PositiveNumber);
  bench_cmd->add_option("-o,--out", out_path, "CSV output (default stdout)");

  auto* tables_cmd = app.add_subcommand("tables", "regenerate the experiment tables (1-6 or all)");
  tables_cmd->add_option("which", which, "table number or 'all'")->required();
  tables_cmd->add_option("-j,--jobs", jobs, "concurrent runs")->check(CLI::PositiveNumber);
  tables_cmd->add_option("-o,--out", out_path, "output directory (default stdout)");
  tables_cmd->add_option("--t-end", t_end, "override the experiment end time")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) return print_run(run(load_config(config_path)));

    if (*ref_cmd) {
      const RunConfig cfg = load_config(config_path);
      const FieldFile f = load_or_compute_reference(cfg);
      std::cout << (cache_dir() / ("reference_" + to_string(reference_config(cfg).problem) + "_" +
                                   config_hash(reference_config(cfg)) + ".csv"))
                       .string()
                << "\n"
                << "cells " << f.T.size() << "\n";
      return 0;
    }

    if (*cmp_cmd) {
      RunConfig cfg = load_config(config_path);
      cfg.reference = reference_path;
      return print_run(run(cfg));
    }

    if (*bench_cmd) {
      const auto rows = bench(load_config_dir(dir), jobs);
      emit(out_path, [&](std::ostream& o) { write_bench_csv(o, rows); });
      return 0;
    }

    if (*tables_cmd) {
      std::vector<int> ids;
      if (which == "all") ids = {1, 2, 3, 4, 5, 6};
      else {
        try {
          ids = {std::stoi(which)};
        } catch (const std::exception&) {
          throw ConfigError("tables", "expected 1-6 or 'all', got '" + which + "'");
        }
      }
      TableOptions opts;
      opts.workers = jobs;
      if (t_end > 0) opts.t_end = t_end;
      for (int id : ids) {
        const auto rows = bench(table_configs(id, opts), opts.workers);
        if (out_path.empty()) {
          std::cout << "# table " << id << "\n";
          write_table_csv(std::cout, id, rows);
        } else {
          std::filesystem::create_directories(out_path);
          const auto base = std::filesystem::path(out_path) / ("table" + std::to_string(id));
          std::ofstream t(base.string() + ".csv"), r(base.string() + "_runs.csv");
          write_table_csv(t, id, rows);
          write_bench_csv(r, rows);
        }
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
