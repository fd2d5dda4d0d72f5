#pragma once

// Anisotropic 2D problem on (s, r) in (0,1)^2:
//   d_t T = d_s (K_par T^{5/2} d_s T) + d_r (K_perp d_r T)
// periodic in s for r < 1/2 (core), limiter outflow at s = 0, 1 for r > 1/2
// (scrape-off layer), d_r T = -Q_perp at r = 0 and d_r T = 0 at r = 1.

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cmath>
#include <memory>
#include <vector>

#include "solheat/errors.hpp"
#include "solheat/heat1d.hpp"
#include "solheat/line_ops.hpp"
#include "solheat/linsolve.hpp"
#include "solheat/mesh.hpp"

namespace solheat {

template <typename Scalar>
struct Params2D {
  Scalar k_par = 1;
  Scalar k_perp = 0;
  Scalar gamma = 0;
  Scalar q_perp = 0;

  void validate() const {
    for (Scalar v : {k_par, k_perp, gamma, q_perp})
      if (!(v >= 0) || !std::isfinite(double(v)))
        throw InvalidArgument("2D parameters must be finite and nonnegative");
  }
  Params1D<Scalar> parallel() const { return {k_par, gamma}; }
};

template <typename Scalar>
struct State2D {
  std::shared_ptr<const Mesh2D<Scalar>> mesh;
  Field2D<Scalar> T;
  Scalar time = 0;
  long step = 0;
};

template <typename Scalar>
State2D<Scalar> make_state(std::shared_ptr<const Mesh2D<Scalar>> mesh, Field2D<Scalar> t) {
  if (t.rows() != mesh->ns() || t.cols() != mesh->nr()) throw InvalidArgument("initial field does not match mesh");
  return State2D<Scalar>{std::move(mesh), std::move(t), Scalar(0), 0};
}

/// Treatment of the parallel (s) direction.
enum class SweepScheme { implicit, imex };

template <typename Scalar>
LineBoundary row_boundary(const Mesh2D<Scalar>& mesh, Eigen::Index j) {
  return mesh.is_sol_row(j) ? LineBoundary::limiter : LineBoundary::periodic;
}

/// Parallel stage of the Lie splitting: an independent 1D step on every
/// s-row, periodic in the core and with limiter outflow in the SOL.
template <typename Scalar>
Field2D<Scalar> sweep_s(const Mesh2D<Scalar>& mesh, const Field2D<Scalar>& t, const Params2D<Scalar>& params,
                        Scalar dt, const ViscosityState<Scalar>& visc, SweepScheme scheme = SweepScheme::imex,
                        const NewtonOptions& newton = {}) {
  Field2D<Scalar> out(t.rows(), t.cols());
  const auto& w = mesh.s().widths();
  for (Eigen::Index j = 0; j < mesh.nr(); ++j) {
    const LineBoundary b = row_boundary(mesh, j);
    if (scheme == SweepScheme::imex)
      line::imex_update<Scalar>(w, t.col(j), params.k_par, params.gamma, b, dt, visc.nu, out.col(j));
    else
      line::implicit_update<Scalar>(w, t.col(j), params.k_par, params.gamma, b, dt, newton, out.col(j));
  }
  return out;
}

/// Perpendicular stage: backward Euler for d_r (K_perp d_r T) on every
/// s-column, influx K_perp Q_perp through r = 0 and no flux through r = 1.
/// All columns share one matrix, so the elimination runs on whole rows of
/// the field at once.
template <typename Scalar>
Field2D<Scalar> sweep_r(const Mesh2D<Scalar>& mesh, const Field2D<Scalar>& t, const Params2D<Scalar>& params,
                        Scalar dt) {
  const auto& w = mesh.r().widths();
  const Eigen::Index nr = mesh.nr();
  const Vector<Scalar> c = line::face_coefficients<Scalar>(w, LineBoundary::limiter);
  line::LineMatrix<Scalar> m(nr);
  m.diag.setOnes();
  for (Eigen::Index f = 0; f < nr - 1; ++f) line::add_face_conductance<Scalar>(m, w, f, params.k_perp * c(f), dt);

  Field2D<Scalar> x = t;
  x.col(0).array() += dt * params.k_perp * params.q_perp / w(0);

  // Thomas elimination along r, vectorised over s.
  Vector<Scalar> scratch(nr);
  Scalar pivot = m.diag(0);
  if (pivot == Scalar(0)) throw SingularSystem("r-sweep", 0);
  x.col(0) /= pivot;
  for (Eigen::Index j = 1; j < nr; ++j) {
    scratch(j - 1) = m.super(j - 1) / pivot;
    pivot = m.diag(j) - m.sub(j - 1) * scratch(j - 1);
    if (pivot == Scalar(0)) throw SingularSystem("r-sweep", static_cast<std::size_t>(j));
    x.col(j) = (x.col(j) - m.sub(j - 1) * x.col(j - 1)) / pivot;
  }
  for (Eigen::Index j = nr - 2; j >= 0; --j) x.col(j) -= scratch(j) * x.col(j + 1);
  return x;
}

/// One Lie-split step: s-sweep then r-sweep.
template <typename Scalar>
State2D<Scalar> step_split(const State2D<Scalar>& state, const Params2D<Scalar>& params, Scalar dt,
                           const ViscosityState<Scalar>& visc, SweepScheme scheme = SweepScheme::imex,
                           const NewtonOptions& newton = {}) {
  detail::check_dt(dt);
  if (scheme == SweepScheme::imex && !(visc.nu > 0)) throw InvalidArgument("IMEX viscosity must be positive");
  const Mesh2D<Scalar>& mesh = *state.mesh;
  Field2D<Scalar> star = sweep_s(mesh, state.T, params, dt, visc, scheme, newton);
  return State2D<Scalar>{state.mesh, sweep_r(mesh, star, params, dt), state.time + dt, state.step + 1};
}

/// Explicit time-step bound for the 2D reference scheme: 0.9 / (sum of the
/// inverse monotone bounds in s and r), the r bound being xi^2 dr^2 / (2 K_perp).
template <typename Scalar>
Scalar explicit_dt_2d(const Mesh2D<Scalar>& mesh, Scalar t_max, const Params2D<Scalar>& params) {
  Scalar rate = 0;
  const Scalar ds = mesh.s().max_width();
  const Scalar dr = mesh.r().max_width();
  const Scalar xi2 = mesh.xi() * mesh.xi();
  rate += Scalar(2) * std::max(params.k_par * pow52(t_max), params.gamma * ds) / (xi2 * ds * ds);
  rate += Scalar(2) * params.k_perp / (xi2 * dr * dr);
  if (!(rate > 0)) throw DegenerateProblem("explicit 2D bound undefined: no diffusion, no outflow");
  return Scalar(0.9) / rate;
}

/// Forward five-point update of `t` into `out` with every flux at time level n.
template <typename Scalar>
void explicit_update_2d(const Mesh2D<Scalar>& mesh, const Field2D<Scalar>& t, const Params2D<Scalar>& params,
                        Scalar dt, Field2D<Scalar>& out) {
  const Eigen::Index ns = mesh.ns(), nr = mesh.nr();
  const auto& ws = mesh.s().widths();
  const auto& wr = mesh.r().widths();
  const Vector<Scalar> face =
      Scalar(2) * params.k_par / Scalar(7) * line::face_coefficients<Scalar>(ws, LineBoundary::periodic);
  const Vector<Scalar> cr = line::face_coefficients<Scalar>(wr, LineBoundary::limiter);
  const Vector<Scalar> step = dt * ws.cwiseInverse();
  out.resize(ns, nr);

  Vector<Scalar> p(ns + 1), f(ns + 1);
  for (Eigen::Index j = 0; j < nr; ++j) {
    const Scalar* tc = t.col(j).data();
    for (Eigen::Index i = 0; i < ns; ++i) p(i) = pow72(tc[i]);
    // f(i) is the flux through the face left of cell i.
    for (Eigen::Index i = 1; i < ns; ++i) f(i) = face(i - 1) * (p(i) - p(i - 1));
    if (mesh.is_sol_row(j)) {
      f(0) = params.gamma * tc[0];
      f(ns) = -params.gamma * tc[ns - 1];
    } else {
      f(0) = f(ns) = ns > 1 ? face(ns - 1) * (p(0) - p(ns - 1)) : Scalar(0);
    }

    // Perpendicular exchange with the rows below and above.
    const Scalar inv = dt / wr(j);
    const Scalar lo = j > 0 ? inv * params.k_perp * cr(j - 1) : Scalar(0);
    const Scalar hi = j + 1 < nr ? inv * params.k_perp * cr(j) : Scalar(0);
    const Scalar src = j == 0 ? inv * params.k_perp * params.q_perp : Scalar(0);
    const Scalar* tm = j > 0 ? t.col(j - 1).data() : tc;
    const Scalar* tp = j + 1 < nr ? t.col(j + 1).data() : tc;
    Scalar* oc = out.col(j).data();
    for (Eigen::Index i = 0; i < ns; ++i)
      oc[i] = tc[i] + step(i) * (f(i + 1) - f(i)) + lo * (tm[i] - tc[i]) + hi * (tp[i] - tc[i]) + src;
  }
}

/// Fully explicit five-point update with every flux at time level n.
template <typename Scalar>
State2D<Scalar> step_explicit_2d(const State2D<Scalar>& state, const Params2D<Scalar>& params, Scalar dt,
                                 const ExplicitOptions& opts = {}) {
  detail::check_dt(dt);
  State2D<Scalar> next{state.mesh, Field2D<Scalar>(), state.time + dt, state.step + 1};
  explicit_update_2d(*state.mesh, state.T, params, dt, next.T);
  detail::check_blowup<Scalar>(next.T, opts.blowup_ceiling, next.step);
  return next;
}

enum class UnsplitMode { implicit, imex };

struct UnsplitOptions {
  NewtonOptions newton{};
  double solver_tolerance = 1e-10;
  int solver_max_iterations = 20000;
};

namespace detail {

/// Assembles area-weighted symmetric systems for the unsplit five-point
/// scheme. Unknown (i, j) sits at index i + ns j, matching Field2D storage.
template <typename Scalar>
class FivePointAssembler {
 public:
  explicit FivePointAssembler(const Mesh2D<Scalar>& mesh)
      : mesh_(mesh),
        cs_(line::face_coefficients<Scalar>(mesh.s().widths(), LineBoundary::periodic)),
        cr_(line::face_coefficients<Scalar>(mesh.r().widths(), LineBoundary::limiter)) {}

  Eigen::Index index(Eigen::Index i, Eigen::Index j) const { return i + mesh_.ns() * j; }

  /// Number of s-faces in row j (periodic rows carry the wrap face).
  Eigen::Index s_faces(Eigen::Index j) const {
    return line::face_count(mesh_.ns(), row_boundary(mesh_, j));
  }

  /// Builds area*I + dt (sum of face conductances) + dt gamma dr at SOL ends.
  /// `s_conductance(i, j)` returns the conductance of s-face i in row j
  /// without the 2/(w_l+w_r) factor.
  template <typename Conductance>
  Eigen::SparseMatrix<Scalar, Eigen::RowMajor> matrix(Scalar dt, const Params2D<Scalar>& params,
                                                      Conductance&& s_conductance) const {
    const Eigen::Index ns = mesh_.ns(), nr = mesh_.nr();
    const auto& ws = mesh_.s().widths();
    const auto& wr = mesh_.r().widths();
    std::vector<Eigen::Triplet<Scalar>> trip;
    trip.reserve(static_cast<std::size_t>(5 * ns * nr));
    auto couple = [&](Eigen::Index a, Eigen::Index b, Scalar g) {
      trip.emplace_back(a, a, g);
      trip.emplace_back(b, b, g);
      trip.emplace_back(a, b, -g);
      trip.emplace_back(b, a, -g);
    };
    for (Eigen::Index j = 0; j < nr; ++j) {
      for (Eigen::Index i = 0; i < ns; ++i) trip.emplace_back(index(i, j), index(i, j), mesh_.cell_area(i, j));
      const Eigen::Index nf = s_faces(j);
      for (Eigen::Index f = 0; f < nf; ++f) {
        const Eigen::Index right = (f + 1) % ns;
        if (right == f) continue;
        couple(index(f, j), index(right, j), dt * wr(j) * cs_(f) * s_conductance(f, j));
      }
      if (mesh_.is_sol_row(j)) {
        trip.emplace_back(index(0, j), index(0, j), dt * wr(j) * params.gamma);
        trip.emplace_back(index(ns - 1, j), index(ns - 1, j), dt * wr(j) * params.gamma);
      }
      if (j + 1 < nr)
        for (Eigen::Index i = 0; i < ns; ++i)
          couple(index(i, j), index(i, j + 1), dt * ws(i) * params.k_perp * cr_(j));
    }
    Eigen::SparseMatrix<Scalar, Eigen::RowMajor> a(ns * nr, ns * nr);
    a.setFromTriplets(trip.begin(), trip.end());
    return a;
  }

  /// Area-weighted right-hand side area*T^n + dt ds K_perp Q_perp on the first r-row.
  Vector<Scalar> base_rhs(const Field2D<Scalar>& tn, Scalar dt, const Params2D<Scalar>& params) const {
    const Eigen::Index ns = mesh_.ns(), nr = mesh_.nr();
    Vector<Scalar> rhs(ns * nr);
    for (Eigen::Index j = 0; j < nr; ++j)
      for (Eigen::Index i = 0; i < ns; ++i) rhs(index(i, j)) = mesh_.cell_area(i, j) * tn(i, j);
    for (Eigen::Index i = 0; i < ns; ++i)
      rhs(index(i, 0)) += dt * mesh_.s().width(i) * params.k_perp * params.q_perp;
    return rhs;
  }

  const Vector<Scalar>& cs() const { return cs_; }

 private:
  const Mesh2D<Scalar>& mesh_;
  Vector<Scalar> cs_;
  Vector<Scalar> cr_;
};

/// Slope of P(x) = sign(x)|x|^{7/2} between a and b (its derivative when a == b).
template <typename Scalar>
Scalar p72_secant(Scalar a, Scalar b) {
  if (a == b) return Scalar(3.5) * pow52(a);
  return (pow72(b) - pow72(a)) / (b - a);
}

}  // namespace detail

/// Max-norm residual of the fully implicit five-point scheme at candidate
/// T^{n+1}, in the unscaled form T - dt/|C| div(F, G) - T^n.
template <typename Scalar>
Scalar unsplit_implicit_residual(const Mesh2D<Scalar>& mesh, const Field2D<Scalar>& tn, const Field2D<Scalar>& t,
                                 const Params2D<Scalar>& params, Scalar dt) {
  const Eigen::Index ns = mesh.ns(), nr = mesh.nr();
  Field2D<Scalar> div_s(ns, nr);
  Vector<Scalar> tmp(ns);
  for (Eigen::Index j = 0; j < nr; ++j) {
    const LineBoundary b = row_boundary(mesh, j);
    const Vector<Scalar> c = line::face_coefficients<Scalar>(mesh.s().widths(), b);
    Vector<Scalar> flux(c.size());
    for (Eigen::Index f = 0; f < c.size(); ++f)
      flux(f) = Scalar(2) * params.k_par / Scalar(7) * c(f) * (pow72(t((f + 1) % ns, j)) - pow72(t(f, j)));
    line::flux_divergence<Scalar>(flux, t.col(j), params.gamma, b, tmp);
    div_s.col(j) = tmp.cwiseQuotient(mesh.s().widths());
  }
  // Perpendicular part: the implicit r-operator applied to T.
  Field2D<Scalar> div_r = Field2D<Scalar>::Zero(ns, nr);
  const auto& wr = mesh.r().widths();
  const Vector<Scalar> cr = line::face_coefficients<Scalar>(wr, LineBoundary::limiter);
  for (Eigen::Index j = 0; j + 1 < nr; ++j) {
    const Vector<Scalar> g = params.k_perp * cr(j) * (t.col(j + 1) - t.col(j));
    div_r.col(j) += g / wr(j);
    div_r.col(j + 1) -= g / wr(j + 1);
  }
  div_r.col(0).array() += params.k_perp * params.q_perp / wr(0);
  return (t - dt * (div_s + div_r) - tn).cwiseAbs().maxCoeff();
}

/// One step of the unsplit five-point scheme.
///  - imex: nu d_ss T, K_perp d_rr T and the limiter outflow implicit (one
///    CG solve), the remaining parallel flux explicit.
///  - implicit: the fully nonlinear system, solved by a fixed-point
///    iteration whose linearisation replaces each parallel face coefficient
///    by the secant slope of P, which keeps every linear solve SPD.
template <typename Scalar>
State2D<Scalar> step_unsplit(const State2D<Scalar>& state, const Params2D<Scalar>& params, Scalar dt,
                             UnsplitMode mode, const ViscosityState<Scalar>& visc,
                             const UnsplitOptions& opts = {}, NewtonReport* report = nullptr) {
  detail::check_dt(dt);
  const Mesh2D<Scalar>& mesh = *state.mesh;
  const Eigen::Index ns = mesh.ns(), nr = mesh.nr();
  const detail::FivePointAssembler<Scalar> asmb(mesh);
  const Vector<Scalar> base = asmb.base_rhs(state.T, dt, params);
  const Field2D<Scalar>& tn = state.T;

  SparseSymmetricSystem<Scalar> sys;
  sys.tolerance = Scalar(opts.solver_tolerance);
  sys.max_iterations = opts.solver_max_iterations;
  sys.guess = tn.reshaped();

  if (mode == UnsplitMode::imex) {
    if (!(visc.nu > 0)) throw InvalidArgument("IMEX viscosity must be positive");
    sys.matrix = asmb.matrix(dt, params, [&](Eigen::Index, Eigen::Index) { return visc.nu; });
    sys.rhs = base;
    const auto& wr = mesh.r().widths();
    for (Eigen::Index j = 0; j < nr; ++j) {
      const Eigen::Index nf = asmb.s_faces(j);
      for (Eigen::Index f = 0; f < nf; ++f) {
        const Eigen::Index right = (f + 1) % ns;
        if (right == f) continue;
        const Scalar coeff = params.k_par * Scalar(0.5) * (pow52(tn(f, j)) + pow52(tn(right, j))) - visc.nu;
        const Scalar flux = asmb.cs()(f) * coeff * (tn(right, j) - tn(f, j));
        sys.rhs(asmb.index(f, j)) += dt * wr(j) * flux;
        sys.rhs(asmb.index(right, j)) -= dt * wr(j) * flux;
      }
    }
    Vector<Scalar> x = solve_sparse_spd(sys);
    return State2D<Scalar>{state.mesh, x.reshaped(ns, nr), state.time + dt, state.step + 1};
  }

  const Scalar target = Scalar(opts.newton.tolerance) * (Scalar(1) + tn.cwiseAbs().maxCoeff());
  const Scalar k = Scalar(2) * params.k_par / Scalar(7);
  Field2D<Scalar> t = tn;
  sys.tolerance = std::min(sys.tolerance, Scalar(1e-3 * opts.newton.tolerance));
  Scalar res = unsplit_implicit_residual(mesh, tn, t, params, dt);
  int it = 0;
  while (!(res <= target)) {
    if (it >= opts.newton.max_iterations) throw NonConvergence("unsplit implicit iteration", double(res), it);
    ++it;
    sys.matrix = asmb.matrix(dt, params, [&](Eigen::Index f, Eigen::Index j) {
      return k * detail::p72_secant(t(f, j), t((f + 1) % ns, j));
    });
    sys.rhs = base;
    sys.guess = t.reshaped();
    t = solve_sparse_spd(sys).reshaped(ns, nr);
    res = unsplit_implicit_residual(mesh, tn, t, params, dt);
  }
  if (report) *report = NewtonReport{it, double(res)};
  return State2D<Scalar>{state.mesh, std::move(t), state.time + dt, state.step + 1};
}

}  // namespace solheat
