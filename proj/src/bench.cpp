#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <atomic>
#include <map>
#include <ostream>
#include <set>
#include <thread>

#include "solheat/runner.hpp"

namespace solheat {

namespace {

std::string dt_label(const RunConfig& c) { return c.dt ? format_double(*c.dt) : "auto"; }

std::string format_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", s);
  return buf;
}

RunConfig base(Problem p, Scheme s, int ns, int nr, double dt, const TableOptions& o) {
  RunConfig c;
  c.problem = p;
  c.scheme = s;
  switch (p) {
    case Problem::one_d:
      c.t0 = 5;
      c.t_end = 1;
      c.physics = {1.0, 0.0, 2.0, 0.0};
      break;
    default:
      c.t0 = 3;
      c.t_end = 2;
      c.physics = {1.0, 1e-2, 2.0, 10.0};
  }
  if (o.t_end) c.t_end = *o.t_end;
  c.ns = ns;
  c.nr = nr;
  c.dt = dt;
  c.reference = "auto";
  c.name = to_string(p) + "_" + to_string(s) + "_" + std::to_string(ns) + (p == Problem::one_d ? "" : "x" + std::to_string(nr)) +
           "_dt" + format_double(dt);
  return c;
}

struct Layout {
  std::vector<std::string> columns;
  /// (row label, column index) for a run, or nothing when it does not belong.
  std::function<std::pair<std::string, std::size_t>(const RunConfig&)> place;
  bool time = true;
};

std::size_t index_of(const std::vector<double>& v, double x) {
  for (std::size_t k = 0; k < v.size(); ++k)
    if (std::abs(v[k] - x) <= 1e-12 * std::abs(x)) return k;
  return v.size();
}

const std::vector<double> kDt1 = {1e-2, 1e-3, 1e-4, 1e-5};
const std::vector<double> kDt2 = {1e-1, 1e-2, 1e-3, 1e-4};
const std::vector<int> kMeshes5 = {50, 100, 300, 500};

Layout layout(int which) {
  Layout l;
  switch (which) {
    case 1:
    case 2:
      l.columns = {"dt=1e-2", "dt=1e-3", "dt=1e-4", "dt=1e-5"};
      l.place = [](const RunConfig& c) {
        return std::make_pair(to_string(c.scheme) + " ns=" + std::to_string(c.ns), index_of(kDt1, *c.dt));
      };
      l.time = which == 1;
      break;
    case 3:
    case 4:
      l.columns = {"dt=1e-1", "dt=1e-2", "dt=1e-3", "dt=1e-4"};
      l.place = [](const RunConfig& c) { return std::make_pair(to_string(c.scheme), index_of(kDt2, *c.dt)); };
      l.time = which == 3;
      break;
    case 5:
      l.columns = {"50x50", "100x100", "300x300", "500x500"};
      l.place = [](const RunConfig& c) {
        const auto it = std::find(kMeshes5.begin(), kMeshes5.end(), c.ns);
        return std::make_pair(std::string(c.problem == Problem::two_d_unsplit ? "imex unsplit" : "imex split"),
                              std::size_t(it - kMeshes5.begin()));
      };
      break;
    case 6:
      l.columns = {"split implicit", "split imex", "unsplit implicit", "unsplit imex"};
      l.place = [](const RunConfig& c) {
        const std::size_t k = (c.problem == Problem::two_d_unsplit ? 2 : 0) + (c.scheme == Scheme::imex ? 1 : 0);
        return std::make_pair(std::string("relative error"), k);
      };
      l.time = false;
      break;
    default:
      throw ConfigError("tables", "table number must be 1 to 6");
  }
  return l;
}

}  // namespace

std::vector<BenchRow> bench(const std::vector<RunConfig>& configs, int workers) {
  std::vector<BenchRow> rows(configs.size());
  for (std::size_t k = 0; k < configs.size(); ++k) rows[k].config = configs[k];

  // Shared references are produced once, before any timed run starts.
  std::set<std::string> seen;
  for (auto& row : rows) {
    if (row.config.reference != "auto") continue;
    try {
      const RunConfig rc = reference_config(row.config);
      if (seen.insert(config_hash(rc)).second) load_or_compute_reference(row.config);
    } catch (const Error& e) {
      row.status = std::string("reference failed: ") + e.what();
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < rows.size(); k = next++) {
      BenchRow& row = rows[k];
      if (row.status != "ok") continue;
      try {
        RunOptions opts;
        const RunReport rep = run(row.config, opts);
        row.seconds = rep.wall_seconds;
        row.steps = rep.steps;
        row.error = rep.error;
      } catch (const std::exception& e) {
        row.status = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, int(rows.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "name,problem,scheme,ns,nr,dt,t_end,seconds,steps,error,status\n";
  for (const auto& r : rows) {
    const RunConfig& c = r.config;
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    out << c.name << ',' << to_string(c.problem) << ',' << to_string(c.scheme) << ',' << c.ns << ','
        << (c.problem == Problem::one_d ? 0 : c.nr) << ',' << dt_label(c) << ',' << format_double(c.t_end) << ','
        << format_seconds(r.seconds) << ',' << r.steps << ',' << (r.error ? format_double(*r.error) : "") << ','
        << status << '\n';
  }
}

std::vector<RunConfig> load_config_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("config-dir", dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".cfg") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("config-dir", "no .cfg files in " + dir.string());
  std::vector<RunConfig> out;
  for (const auto& f : files) out.push_back(load_config(f));
  return out;
}

std::vector<RunConfig> table_configs(int which, const TableOptions& o) {
  std::vector<RunConfig> out;
  switch (which) {
    case 1:
    case 2:
      for (Scheme s : {Scheme::implicit, Scheme::imex})
        for (int ns : {50, 150})
          for (double dt : kDt1) out.push_back(base(Problem::one_d, s, ns, 0, dt, o));
      break;
    case 3:
    case 4:
      for (Scheme s : {Scheme::implicit, Scheme::imex})
        for (double dt : kDt2) out.push_back(base(Problem::two_d, s, 100, 100, dt, o));
      break;
    case 5:
      for (Problem p : {Problem::two_d_unsplit, Problem::two_d})
        for (int n : kMeshes5) out.push_back(base(p, Scheme::imex, n, n, 1e-3, o));
      break;
    case 6:
      for (Problem p : {Problem::two_d, Problem::two_d_unsplit})
        for (Scheme s : {Scheme::implicit, Scheme::imex}) out.push_back(base(p, s, 100, 100, 1e-3, o));
      break;
  }
  if (layout(which).time)
    for (auto& c : out) c.reference.clear();
  return out;
}

void write_table_csv(std::ostream& out, int which, const std::vector<BenchRow>& rows) {
  const Layout l = layout(which);
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::string>> cells;
  for (const auto& r : rows) {
    const auto [label, col] = l.place(r.config);
    if (col >= l.columns.size()) continue;
    if (!cells.count(label)) {
      order.push_back(label);
      cells[label].assign(l.columns.size(), "");
    }
    std::string v;
    if (r.status != "ok") v = "failed";
    else if (l.time) v = format_seconds(r.seconds);
    else v = r.error ? format_double(*r.error) : "";
    cells[label][col] = v;
  }
  out << (l.time ? "seconds" : "relative_error");
  for (const auto& c : l.columns) out << ',' << c;
  out << '\n';
  for (const auto& label : order) {
    out << label;
    for (const auto& v : cells[label]) out << ',' << v;
    out << '\n';
  }
}

}  // namespace solheat
