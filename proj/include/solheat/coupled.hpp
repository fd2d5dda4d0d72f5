#pragma once

// Ion/electron system: each species diffuses as in heat2d and the two
// exchange heat through +beta (T_i - T_e) / -beta (T_i - T_e), beta < 0.

#include <Eigen/Core>
#include <cmath>
#include <utility>

#include "solheat/errors.hpp"
#include "solheat/heat2d.hpp"

namespace solheat {

template <typename Scalar>
struct CoupledParams {
  Params2D<Scalar> ions;
  Params2D<Scalar> electrons;
  Scalar beta = Scalar(-0.02);

  /// beta = 0 is accepted to allow decoupled test runs.
  void validate() const {
    ions.validate();
    electrons.validate();
    if (!(beta <= 0) || !std::isfinite(double(beta))) throw InvalidArgument("beta must be finite and negative");
  }
};

template <typename Scalar>
struct CoupledState {
  State2D<Scalar> ions;
  State2D<Scalar> electrons;
  Scalar time = 0;
  long step = 0;
};

/// Backward Euler on the exchange term. The sum T_i + T_e is kept and the
/// difference is damped by 1 / (1 - 2 beta dt), so for beta < 0 both
/// outputs are convex combinations of the inputs.
template <typename Scalar>
std::pair<Field2D<Scalar>, Field2D<Scalar>> source_step(const Field2D<Scalar>& ti, const Field2D<Scalar>& te,
                                                        Scalar beta, Scalar dt) {
  if (ti.rows() != te.rows() || ti.cols() != te.cols()) throw InvalidArgument("species fields differ in shape");
  const Scalar denom = Scalar(1) - Scalar(2) * beta * dt;
  if (denom == Scalar(0)) throw InvalidArgument("source step undefined: 1 - 2 beta dt = 0");
  // Each species moves by half the removed gap; exact identity at beta = 0.
  const Scalar shrink = Scalar(0.5) * (Scalar(1) - Scalar(1) / denom);
  const Field2D<Scalar> move = shrink * (ti - te);
  return {ti - move, te + move};
}

/// Source step, then the s-sweep and r-sweep of each species with its own
/// coefficients and viscosity.
template <typename Scalar>
CoupledState<Scalar> step_coupled(const CoupledState<Scalar>& state, const CoupledParams<Scalar>& params, Scalar dt,
                                  const ViscosityState<Scalar>& visc_i, const ViscosityState<Scalar>& visc_e,
                                  SweepScheme scheme = SweepScheme::imex, const NewtonOptions& newton = {}) {
  detail::check_dt(dt);
  const Mesh2D<Scalar>& mesh = *state.ions.mesh;
  auto [ti, te] = source_step(state.ions.T, state.electrons.T, params.beta, dt);
  ti = sweep_s(mesh, ti, params.ions, dt, visc_i, scheme, newton);
  te = sweep_s(mesh, te, params.electrons, dt, visc_e, scheme, newton);
  ti = sweep_r(mesh, ti, params.ions, dt);
  te = sweep_r(mesh, te, params.electrons, dt);
  const Scalar t = state.time + dt;
  const long n = state.step + 1;
  return CoupledState<Scalar>{State2D<Scalar>{state.ions.mesh, std::move(ti), t, n},
                              State2D<Scalar>{state.electrons.mesh, std::move(te), t, n}, t, n};
}

}  // namespace solheat
