#pragma once

// Nonlinear parallel heat equation on s in (0, 1):
//   d_t T = d_s (K |T|^{5/2} d_s T),  K |T|^{5/2} d_s T = +gamma T at s = 0,
//                                      K |T|^{5/2} d_s T = -gamma T at s = 1.

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <memory>

#include "solheat/errors.hpp"
#include "solheat/line_ops.hpp"
#include "solheat/mesh.hpp"

namespace solheat {

template <typename Scalar>
struct Params1D {
  Scalar k_par = 1;  ///< parallel conductivity prefactor
  Scalar gamma = 0;  ///< limiter outflow coefficient

  void validate() const {
    if (!(k_par >= 0) || !(gamma >= 0) || !std::isfinite(double(k_par)) || !std::isfinite(double(gamma)))
      throw InvalidArgument("k_par and gamma must be finite and nonnegative");
  }
};

template <typename Scalar>
struct State1D {
  std::shared_ptr<const Mesh1D<Scalar>> mesh;
  Field1D<Scalar> T;
  Scalar time = 0;
  long step = 0;
};

template <typename Scalar>
State1D<Scalar> make_state(std::shared_ptr<const Mesh1D<Scalar>> mesh, Field1D<Scalar> t) {
  if (t.size() != mesh->size()) throw InvalidArgument("initial field does not match mesh");
  return State1D<Scalar>{std::move(mesh), std::move(t), Scalar(0), 0};
}

/// IMEX viscosity. Stability of the IMEX step needs nu >= K max|T|^{5/2}.
template <typename Scalar>
struct ViscosityState {
  Scalar nu = 1;
};

enum class Side { left, right };

/// Interior-face flux (4K/7)(P(T_r) - P(T_l)) / (w_l + w_r), P(x) = sign(x)|x|^{7/2}.
template <typename Scalar>
Scalar parallel_flux(Scalar t_left, Scalar t_right, Scalar w_left, Scalar w_right, Scalar k_par) {
  return Scalar(4) * k_par / Scalar(7) * (pow72(t_right) - pow72(t_left)) / (w_left + w_right);
}

/// Limiter flux: +gamma T at s = 0, -gamma T at s = 1.
template <typename Scalar>
Scalar boundary_flux(Scalar t_cell, Scalar gamma, Side side) {
  return side == Side::left ? gamma * t_cell : -gamma * t_cell;
}

/// Largest stable explicit step: xi^2 ds^2 / max((4K/7) t0_max^{5/2}, gamma ds).
template <typename Scalar>
Scalar cfl_dt(const Mesh1D<Scalar>& mesh, Scalar t0_max, const Params1D<Scalar>& params) {
  if (!(t0_max >= 0)) throw InvalidArgument("t0_max must be nonnegative");
  const Scalar ds = mesh.max_width();
  const Scalar denom = std::max(Scalar(4) * params.k_par / Scalar(7) * pow52(t0_max), params.gamma * ds);
  if (!(denom > 0))
    throw DegenerateProblem("CFL bound undefined: no diffusion and no limiter outflow");
  return mesh.xi() * mesh.xi() * ds * ds / denom;
}

/// Step under which the explicit update is a convex combination of
/// neighbouring values: xi^2 ds^2 / (2 max(K t_max^{5/2}, gamma ds)).
/// Keeps T in [0, max T] for arbitrary nonnegative data.
template <typename Scalar>
Scalar monotone_dt(const Mesh1D<Scalar>& mesh, Scalar t_max, const Params1D<Scalar>& params) {
  if (!(t_max >= 0)) throw InvalidArgument("t_max must be nonnegative");
  const Scalar ds = mesh.max_width();
  const Scalar denom = Scalar(2) * std::max(params.k_par * pow52(t_max), params.gamma * ds);
  if (!(denom > 0)) throw DegenerateProblem("explicit bound undefined: no diffusion and no limiter outflow");
  return mesh.xi() * mesh.xi() * ds * ds / denom;
}

struct ExplicitOptions {
  /// Any |T| above this aborts the run. Drivers set it to 10 max|T0|.
  double blowup_ceiling = std::numeric_limits<double>::infinity();
};

namespace detail {

template <typename Scalar, typename Derived>
void check_blowup(const Eigen::MatrixBase<Derived>& t, double ceiling, long step) {
  const Scalar m = t.cwiseAbs().template maxCoeff<Eigen::PropagateNaN>();
  if (!std::isfinite(double(m))) throw BlowUp("explicit scheme produced a non-finite temperature", step);
  if (double(m) > ceiling) throw BlowUp("explicit scheme exceeded the blow-up ceiling (CFL violated?)", step);
}

template <typename Scalar>
void check_dt(Scalar dt) {
  if (!(dt > 0)) throw InvalidArgument("time step must be positive");
}

}  // namespace detail

/// Forward step with all fluxes at time level n.
template <typename Scalar>
State1D<Scalar> step_explicit(const State1D<Scalar>& state, const Params1D<Scalar>& params, Scalar dt,
                              const ExplicitOptions& opts = {}) {
  detail::check_dt(dt);
  State1D<Scalar> next{state.mesh, Field1D<Scalar>(state.T.size()), state.time + dt, state.step + 1};
  line::explicit_update<Scalar>(state.mesh->widths(), state.T, params.k_par, params.gamma, LineBoundary::limiter,
                                dt, next.T);
  detail::check_blowup<Scalar>(next.T, opts.blowup_ceiling, next.step);
  return next;
}

/// Backward step with all fluxes at time level n+1, solved by Newton.
template <typename Scalar>
State1D<Scalar> step_implicit(const State1D<Scalar>& state, const Params1D<Scalar>& params, Scalar dt,
                              const NewtonOptions& newton = {}, NewtonReport* report = nullptr) {
  detail::check_dt(dt);
  State1D<Scalar> next{state.mesh, Field1D<Scalar>(state.T.size()), state.time + dt, state.step + 1};
  const NewtonReport r = line::implicit_update<Scalar>(state.mesh->widths(), state.T, params.k_par,
                                                       params.gamma, LineBoundary::limiter, dt, newton, next.T);
  if (report) *report = r;
  return next;
}

/// IMEX step: nu d_ss T and the limiter outflow implicit, the rest explicit.
template <typename Scalar>
State1D<Scalar> step_imex(const State1D<Scalar>& state, const Params1D<Scalar>& params, Scalar dt,
                          const ViscosityState<Scalar>& visc) {
  detail::check_dt(dt);
  if (!(visc.nu > 0)) throw InvalidArgument("IMEX viscosity must be positive");
  State1D<Scalar> next{state.mesh, Field1D<Scalar>(state.T.size()), state.time + dt, state.step + 1};
  line::imex_update<Scalar>(state.mesh->widths(), state.T, params.k_par, params.gamma, LineBoundary::limiter, dt,
                            visc.nu, next.T);
  return next;
}

/// K max|T|^{5/2}, the smallest viscosity that keeps the IMEX step stable.
template <typename Scalar, typename Derived>
Scalar viscosity_floor(const Eigen::MatrixBase<Derived>& field, Scalar k_par) {
  // Never zero.
  return std::max(k_par * pow52(Scalar(field.cwiseAbs().maxCoeff())), std::numeric_limits<Scalar>::min());
}

/// nu := 2 K max|T0|^{5/2}
template <typename Scalar, typename Derived>
ViscosityState<Scalar> initial_viscosity(const Eigen::MatrixBase<Derived>& field, Scalar k_par) {
  return ViscosityState<Scalar>{Scalar(2) * viscosity_floor(field, k_par)};
}

/// Dead-band viscosity update: reset to twice the bound when nu drops to
/// 5/4 of it, halve the bound when nu exceeds 4 times it, then clamp to
/// the stability floor.
template <typename Scalar, typename Derived>
ViscosityState<Scalar> update_viscosity(ViscosityState<Scalar> visc, const Eigen::MatrixBase<Derived>& field,
                                        Scalar k_par) {
  const Scalar bound = viscosity_floor(field, k_par);
  if (visc.nu <= Scalar(1.25) * bound) visc.nu = Scalar(2) * bound;
  if (visc.nu >= Scalar(4) * bound) visc.nu = bound / Scalar(2);
  visc.nu = std::max(visc.nu, bound);
  return visc;
}

}  // namespace solheat
