#include "solheat/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "solheat/errors.hpp"

namespace solheat {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  return f;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read " + path.string());
  return f;
}

std::vector<double> split_numbers(const std::string& line, const std::filesystem::path& path) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end == item.c_str()) throw Error("malformed number '" + item + "' in " + path.string());
    out.push_back(v);
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_field_csv(const std::filesystem::path& path, const Mesh1D<double>& mesh, const Eigen::VectorXd& t) {
  auto f = open_out(path);
  f << "s,T\n";
  for (Eigen::Index i = 0; i < t.size(); ++i) f << format_double(mesh.centers()(i)) << ',' << format_double(t(i)) << '\n';
}

void write_field_csv(const std::filesystem::path& path, const Mesh2D<double>& mesh, const Eigen::MatrixXd& t) {
  auto f = open_out(path);
  f << "s,r,T\n";
  const Eigen::VectorXd sc = mesh.s().centers(), rc = mesh.r().centers();
  for (Eigen::Index i = 0; i < t.rows(); ++i)
    for (Eigen::Index j = 0; j < t.cols(); ++j)
      f << format_double(sc(i)) << ',' << format_double(rc(j)) << ',' << format_double(t(i, j)) << '\n';
}

FieldFile read_field_csv(const std::filesystem::path& path) {
  auto f = open_in(path);
  std::string line;
  std::getline(f, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const bool two_d = line == "s,r,T";
  if (!two_d && line != "s,T") throw Error("unrecognised field header in " + path.string());
  std::vector<std::vector<double>> rows;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    rows.push_back(split_numbers(line, path));
    if (rows.back().size() != (two_d ? 3u : 2u)) throw Error("wrong column count in " + path.string());
  }
  if (rows.empty()) throw Error("empty field file " + path.string());

  FieldFile out;
  if (!two_d) {
    out.s_centers.resize(Eigen::Index(rows.size()));
    out.T.resize(Eigen::Index(rows.size()), 1);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      out.s_centers(Eigen::Index(k)) = rows[k][0];
      out.T(Eigen::Index(k), 0) = rows[k][1];
    }
    return out;
  }
  // s-major order: the r column repeats with period nr.
  std::size_t nr = 1;
  while (nr < rows.size() && rows[nr][0] == rows[0][0]) ++nr;
  if (rows.size() % nr != 0) throw Error("ragged 2D field in " + path.string());
  const std::size_t ns = rows.size() / nr;
  out.s_centers.resize(Eigen::Index(ns));
  out.r_centers.resize(Eigen::Index(nr));
  out.T.resize(Eigen::Index(ns), Eigen::Index(nr));
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < nr; ++j) {
      const auto& row = rows[i * nr + j];
      out.s_centers(Eigen::Index(i)) = row[0];
      out.r_centers(Eigen::Index(j)) = row[1];
      out.T(Eigen::Index(i), Eigen::Index(j)) = row[2];
    }
  return out;
}

void write_series_csv(const std::filesystem::path& path, const std::vector<Sample>& series,
                      const std::optional<std::string>& failure) {
  auto f = open_out(path);
  f << "step,time,l2,mass,e1,e2,e3,nu\n";
  for (const Sample& s : series)
    f << s.step << ',' << format_double(s.time) << ',' << format_double(s.l2) << ',' << format_double(s.mass) << ','
      << format_double(s.e1) << ',' << format_double(s.e2) << ',' << format_double(s.e3) << ','
      << format_double(s.nu) << '\n';
  if (failure) {
    std::string msg = *failure;
    for (char& ch : msg)
      if (ch == '\n') ch = ' ';
    f << "# error: " << msg << '\n';
  }
}

SeriesFile read_series_csv(const std::filesystem::path& path) {
  auto f = open_in(path);
  std::string line;
  std::getline(f, line);
  SeriesFile out;
  while (std::getline(f, line)) {
    if (line.rfind("# error: ", 0) == 0) {
      out.failure = line.substr(9);
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    const auto v = split_numbers(line, path);
    if (v.size() != 8) throw Error("wrong column count in " + path.string());
    out.series.push_back(Sample{long(v[0]), v[1], v[2], v[3], v[4], v[5], v[6], v[7]});
  }
  return out;
}

}  // namespace solheat
