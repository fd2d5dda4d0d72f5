#include "solheat/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace solheat {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x))
    throw ConfigError(key, "expected a finite number, got '" + v + "'");
  return x;
}

long to_long(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE)
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  const long x = to_long(key, v);
  if (x < -1000000000L || x > 1000000000L) throw ConfigError(key, "integer out of range");
  return static_cast<int>(x);
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  return out;
}

void apply_problem_defaults(RunConfig& c) {
  switch (c.problem) {
    case Problem::one_d:
      c.ns = 150;
      c.t_end = 1;
      c.t0 = 5;
      c.physics = {1.0, 0.0, 2.0, 0.0};
      break;
    case Problem::two_d:
    case Problem::two_d_unsplit:
      c.ns = c.nr = 100;
      c.t_end = 2;
      c.t0 = 3;
      c.physics = {1.0, 1e-2, 2.0, 10.0};
      break;
    case Problem::coupled:
      c.ns = c.nr = 100;
      c.t_end = 1;
      c.t0 = c.t0_electron = 3;
      break;
  }
}

void positive(const std::string& key, double v) {
  if (!(v > 0)) throw ConfigError(key, "must be positive");
}

void nonnegative(const std::string& key, double v) {
  if (!(v >= 0)) throw ConfigError(key, "must be nonnegative");
}

void check_species(const std::string& prefix, const Params2D<double>& p) {
  nonnegative(prefix + "k_par", p.k_par);
  nonnegative(prefix + "k_perp", p.k_perp);
  nonnegative(prefix + "gamma", p.gamma);
  nonnegative(prefix + "q_perp", p.q_perp);
}

}  // namespace

std::string to_string(Problem p) {
  switch (p) {
    case Problem::one_d: return "1d";
    case Problem::two_d: return "2d";
    case Problem::two_d_unsplit: return "2d-unsplit";
    case Problem::coupled: return "coupled";
  }
  return "?";
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::explicit_euler: return "explicit";
    case Scheme::implicit: return "implicit";
    case Scheme::imex: return "imex";
  }
  return "?";
}

Problem parse_problem(std::string_view text) {
  for (Problem p : {Problem::one_d, Problem::two_d, Problem::two_d_unsplit, Problem::coupled})
    if (to_string(p) == text) return p;
  throw ConfigError("problem", "unknown problem '" + std::string(text) + "' (1d, 2d, 2d-unsplit, coupled)");
}

Scheme parse_scheme(std::string_view text) {
  for (Scheme s : {Scheme::explicit_euler, Scheme::implicit, Scheme::imex})
    if (to_string(s) == text) return s;
  throw ConfigError("scheme", "unknown scheme '" + std::string(text) + "' (explicit, implicit, imex)");
}

void RunConfig::validate() const {
  if (ns < 1) throw ConfigError("ns", "must be at least 1");
  if (problem != Problem::one_d && (nr < 2 || nr % 2 != 0))
    throw ConfigError("nr", "must be a positive even number so that r = 1/2 is a face");
  if (dt) positive("dt", *dt);
  else if (scheme != Scheme::explicit_euler) throw ConfigError("dt", "required for implicit and IMEX schemes");
  positive("t_end", t_end);
  nonnegative("t0", t0);
  nonnegative("electron.t0", t0_electron);
  if (problem == Problem::coupled) {
    check_species("ion.", coupled.ions);
    check_species("electron.", coupled.electrons);
    if (!(coupled.beta <= 0)) throw ConfigError("beta", "must be nonpositive");
    if (scheme == Scheme::explicit_euler) throw ConfigError("scheme", "coupled problem supports implicit and imex");
  } else {
    check_species("", physics);
  }
  if (problem == Problem::two_d_unsplit && scheme == Scheme::explicit_euler)
    throw ConfigError("scheme", "explicit runs use problem = 2d");
  positive("newton_tol", newton_tol);
  if (newton_max_iter < 1) throw ConfigError("newton_max_iter", "must be at least 1");
  positive("solver_tol", solver_tol);
  if (solver_max_iter < 1) throw ConfigError("solver_max_iter", "must be at least 1");
  if (record_stride < 0) throw ConfigError("record_stride", "must be nonnegative");
  for (double t : snapshot_times)
    if (!(t >= 0) || t > t_end) throw ConfigError("snapshot_times", "times must lie in [0, t_end]");
}

RunConfig parse_config(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno), "empty key");
    if (!kv.emplace(key, value).second) throw ConfigError(key, "given more than once");
  }

  RunConfig c;
  for (const char* req : {"problem", "scheme"})
    if (!kv.count(req)) throw ConfigError(req, "missing required key");
  c.problem = parse_problem(kv.at("problem"));
  apply_problem_defaults(c);
  c.scheme = parse_scheme(kv.at("scheme"));

  const bool coupled = c.problem == Problem::coupled;
  auto species = [&](const std::string& key) -> Params2D<double>* {
    if (!coupled) return nullptr;
    if (key.rfind("ion.", 0) == 0) return &c.coupled.ions;
    if (key.rfind("electron.", 0) == 0) return &c.coupled.electrons;
    return nullptr;
  };

  for (const auto& [key, v] : kv) {
    if (key == "problem" || key == "scheme") continue;
    if (key == "name") c.name = v;
    else if (key == "ns") c.ns = to_int(key, v);
    else if (key == "nr") c.nr = to_int(key, v);
    else if (key == "dt") c.dt = v == "auto" ? std::optional<double>{} : std::optional<double>{to_double(key, v)};
    else if (key == "t_end") c.t_end = to_double(key, v);
    else if (key == "t0") c.t0 = c.t0_electron = to_double(key, v);
    else if (key == "newton_tol") c.newton_tol = to_double(key, v);
    else if (key == "newton_max_iter") c.newton_max_iter = to_int(key, v);
    else if (key == "solver_tol") c.solver_tol = to_double(key, v);
    else if (key == "solver_max_iter") c.solver_max_iter = to_int(key, v);
    else if (key == "output_dir") c.output_dir = v;
    else if (key == "record_stride") c.record_stride = to_long(key, v);
    else if (key == "snapshot_times") c.snapshot_times = to_list(key, v);
    else if (key == "reference") c.reference = v;
    else if (key == "beta" && coupled) c.coupled.beta = to_double(key, v);
    else if (!coupled && key == "k_par") c.physics.k_par = to_double(key, v);
    else if (!coupled && key == "gamma") c.physics.gamma = to_double(key, v);
    else if (!coupled && c.problem != Problem::one_d && key == "k_perp") c.physics.k_perp = to_double(key, v);
    else if (!coupled && c.problem != Problem::one_d && key == "q_perp") c.physics.q_perp = to_double(key, v);
    else if (Params2D<double>* p = species(key)) {
      const std::string field = key.substr(key.find('.') + 1);
      if (field == "k_par") p->k_par = to_double(key, v);
      else if (field == "k_perp") p->k_perp = to_double(key, v);
      else if (field == "gamma") p->gamma = to_double(key, v);
      else if (field == "q_perp") p->q_perp = to_double(key, v);
      else if (field == "t0") (p == &c.coupled.ions ? c.t0 : c.t0_electron) = to_double(key, v);
      else throw ConfigError(key, "unknown key");
    } else {
      throw ConfigError(key, "unknown key for problem " + to_string(c.problem));
    }
  }
  if (c.scheme != Scheme::explicit_euler && !kv.count("dt")) throw ConfigError("dt", "missing required key");
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config", "cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  RunConfig c = parse_config(ss.str());
  if (c.name == "run") c.name = path.stem().string();
  return c;
}

std::string canonical_form(const RunConfig& c) {
  std::string out;
  char buf[64];
  auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += key;
    out += '=';
    out += buf;
    out += '\n';
  };
  out += "problem=" + to_string(c.problem) + "\nscheme=" + to_string(c.scheme) + "\n";
  put("ns", c.ns);
  if (c.problem != Problem::one_d) put("nr", c.nr);
  if (c.dt) put("dt", *c.dt);
  else out += "dt=auto\n";
  put("t_end", c.t_end);
  put("t0", c.t0);
  auto species = [&](const std::string& prefix, const Params2D<double>& p) {
    put((prefix + "k_par").c_str(), p.k_par);
    put((prefix + "gamma").c_str(), p.gamma);
    if (c.problem != Problem::one_d) {
      put((prefix + "k_perp").c_str(), p.k_perp);
      put((prefix + "q_perp").c_str(), p.q_perp);
    }
  };
  if (c.problem == Problem::coupled) {
    put("electron.t0", c.t0_electron);
    species("ion.", c.coupled.ions);
    species("electron.", c.coupled.electrons);
    put("beta", c.coupled.beta);
  } else {
    species("", c.physics);
  }
  if (c.scheme == Scheme::implicit) {
    put("newton_tol", c.newton_tol);
    put("newton_max_iter", c.newton_max_iter);
  }
  if (c.problem == Problem::two_d_unsplit) {
    put("solver_tol", c.solver_tol);
    put("solver_max_iter", c.solver_max_iter);
  }
  return out;
}

RunConfig reference_config(const RunConfig& c) {
  if (c.problem == Problem::coupled) throw ConfigError("reference", "no reference solution for the coupled problem");
  RunConfig r = c;
  r.name = c.name + "_reference";
  r.scheme = Scheme::explicit_euler;
  r.dt.reset();
  r.output_dir.clear();
  r.reference.clear();
  r.snapshot_times.clear();
  r.record_stride = 0;
  if (c.problem == Problem::one_d) {
    r.ns = 450;
  } else {
    r.problem = Problem::two_d;
    r.ns = r.nr = 300;
  }
  return r;
}

}  // namespace solheat
