#pragma once

#include <Eigen/Core>
#include <cmath>
#include <utility>
#include <vector>

#include "solheat/errors.hpp"
#include "solheat/heat1d.hpp"
#include "solheat/heat2d.hpp"
#include "solheat/line_ops.hpp"
#include "solheat/mesh.hpp"

namespace solheat {

// Discrete integrals. Cell sums are weighted by the cell measure; face sums
// use the half-span (w_l + w_r) / 2 between neighbouring centres.

template <typename Scalar>
Scalar mass(const Mesh1D<Scalar>& mesh, const Field1D<Scalar>& t) {
  return mesh.widths().dot(t);
}

template <typename Scalar>
Scalar mass(const Mesh2D<Scalar>& mesh, const Field2D<Scalar>& t) {
  return (mesh.s().widths().transpose() * t * mesh.r().widths()).value();
}

template <typename Scalar>
Scalar l2_norm_sq(const Mesh1D<Scalar>& mesh, const Field1D<Scalar>& t) {
  return mesh.widths().dot(t.cwiseAbs2());
}

template <typename Scalar>
Scalar l2_norm_sq(const Mesh2D<Scalar>& mesh, const Field2D<Scalar>& t) {
  return (mesh.s().widths().transpose() * t.cwiseAbs2() * mesh.r().widths()).value();
}

template <typename MeshT, typename FieldT>
auto l2_norm(const MeshT& mesh, const FieldT& t) {
  return std::sqrt(l2_norm_sq(mesh, t));
}

/// sum over faces of (T_r - T_l)^2 / ((w_l + w_r) / 2) on one line.
template <typename Scalar>
Scalar line_gradient_sq(const line::ConstRef<Scalar>& w, const line::ConstRef<Scalar>& t, LineBoundary b) {
  const Eigen::Index n = t.size();
  const Vector<Scalar> c = line::face_coefficients<Scalar>(w, b);
  Scalar sum = 0;
  for (Eigen::Index f = 0; f < c.size(); ++f) {
    const Scalar d = t((f + 1) % n) - t(f);
    sum += c(f) * d * d;
  }
  return sum;
}

template <typename Scalar>
Scalar gradient_sq(const Mesh1D<Scalar>& mesh, const Field1D<Scalar>& t) {
  return line_gradient_sq<Scalar>(mesh.widths(), t, LineBoundary::limiter);
}

/// Discrete integral of |d_s T|^2 over the 2D domain, wrap faces included in the core.
template <typename Scalar>
Scalar s_gradient_sq(const Mesh2D<Scalar>& mesh, const Field2D<Scalar>& t) {
  Scalar sum = 0;
  for (Eigen::Index j = 0; j < mesh.nr(); ++j)
    sum += mesh.r().width(j) * line_gradient_sq<Scalar>(mesh.s().widths(), t.col(j), row_boundary(mesh, j));
  return sum;
}

template <typename Scalar>
Scalar r_gradient_sq(const Mesh2D<Scalar>& mesh, const Field2D<Scalar>& t) {
  Scalar sum = 0;
  const Vector<Scalar> c = line::face_coefficients<Scalar>(mesh.r().widths(), LineBoundary::limiter);
  for (Eigen::Index j = 0; j + 1 < mesh.nr(); ++j)
    sum += c(j) * mesh.s().widths().dot((t.col(j + 1) - t.col(j)).cwiseAbs2());
  return sum;
}

/// 1/2 ||T||^2 + (nu dt / 2) |T|_{H1}^2, the quantity the IMEX step cannot increase.
template <typename Scalar>
Scalar imex_energy(const Mesh1D<Scalar>& mesh, const Field1D<Scalar>& t, Scalar nu, Scalar dt) {
  return Scalar(0.5) * l2_norm_sq(mesh, t) + Scalar(0.5) * nu * dt * gradient_sq(mesh, t);
}

template <typename Scalar>
Scalar imex_energy(const Mesh2D<Scalar>& mesh, const Field2D<Scalar>& t, Scalar nu, Scalar dt) {
  return Scalar(0.5) * l2_norm_sq(mesh, t) + Scalar(0.5) * nu * dt * s_gradient_sq(mesh, t);
}

/// dt * sum over faces of (P(T_{i+1}) - P(T_i))^2 / (w_i + w_{i+1}): one time
/// slice of the semi-norm that stays bounded for the implicit scheme.
template <typename Scalar>
Scalar flux_seminorm_increment(const Mesh1D<Scalar>& mesh, const Field1D<Scalar>& t, Scalar dt) {
  const auto& w = mesh.widths();
  Scalar sum = 0;
  for (Eigen::Index i = 0; i + 1 < t.size(); ++i) {
    const Scalar d = pow72(t(i + 1)) - pow72(t(i));
    sum += d * d / (w(i) + w(i + 1));
  }
  return dt * sum;
}

template <typename Scalar>
struct EnergyBreakdown {
  Scalar e1 = 0;  ///< volumetric dissipation, <= 0
  Scalar e2 = 0;  ///< limiter outflow, <= 0
  Scalar e3 = 0;  ///< core-edge influx, >= 0
};

/// E1 = -int(K_par T^{5/2}|d_s T|^2 + K_perp |d_r T|^2), E2 = -gamma int_SOL
/// T(0,r)^2 + T(1,r)^2 dr, E3 = Q_perp K_perp int T(s,0) ds. The face value of
/// T^{5/2} is the mean of the two adjacent cells.
template <typename Scalar>
EnergyBreakdown<Scalar> energy_breakdown(const State2D<Scalar>& state, const Params2D<Scalar>& params) {
  const Mesh2D<Scalar>& mesh = *state.mesh;
  const Field2D<Scalar>& t = state.T;
  const Eigen::Index ns = mesh.ns();
  EnergyBreakdown<Scalar> e;
  for (Eigen::Index j = 0; j < mesh.nr(); ++j) {
    const LineBoundary b = row_boundary(mesh, j);
    const Vector<Scalar> c = line::face_coefficients<Scalar>(mesh.s().widths(), b);
    Scalar row = 0;
    for (Eigen::Index f = 0; f < c.size(); ++f) {
      const Eigen::Index right = (f + 1) % ns;
      const Scalar d = t(right, j) - t(f, j);
      row += c(f) * Scalar(0.5) * (pow52(t(f, j)) + pow52(t(right, j))) * d * d;
    }
    e.e1 -= params.k_par * mesh.r().width(j) * row;
    if (b == LineBoundary::limiter)
      e.e2 -= params.gamma * mesh.r().width(j) * (t(0, j) * t(0, j) + t(ns - 1, j) * t(ns - 1, j));
  }
  e.e1 -= params.k_perp * r_gradient_sq(mesh, t);
  e.e3 = params.q_perp * params.k_perp * mesh.s().widths().dot(t.col(0));
  return e;
}

/// 1D analogue: E1 parallel dissipation, E2 limiter outflow, E3 = 0.
template <typename Scalar>
EnergyBreakdown<Scalar> energy_breakdown(const State1D<Scalar>& state, const Params1D<Scalar>& params) {
  const auto& w = state.mesh->widths();
  const Field1D<Scalar>& t = state.T;
  const Eigen::Index n = t.size();
  const Vector<Scalar> c = line::face_coefficients<Scalar>(w, LineBoundary::limiter);
  EnergyBreakdown<Scalar> e;
  for (Eigen::Index f = 0; f + 1 < n; ++f) {
    const Scalar d = t(f + 1) - t(f);
    e.e1 -= params.k_par * c(f) * Scalar(0.5) * (pow52(t(f)) + pow52(t(f + 1))) * d * d;
  }
  e.e2 = -params.gamma * (t(0) * t(0) + t(n - 1) * t(n - 1));
  return e;
}

namespace detail {

template <typename Scalar>
Scalar relative_l2(Scalar diff_sq, Scalar ref_sq) {
  if (!(ref_sq > 0)) throw InvalidArgument("relative error undefined: reference norm is zero");
  return std::sqrt(diff_sq / ref_sq);
}

}  // namespace detail

/// ||cand - R(ref)|| / ||R(ref)|| in the discrete L2 norm of the candidate
/// mesh, R being exact cell averaging of the finer reference.
template <typename Scalar>
Scalar relative_error(const Mesh1D<Scalar>& mesh, const Field1D<Scalar>& candidate, const Mesh1D<Scalar>& ref_mesh,
                      const Field1D<Scalar>& reference) {
  const Field1D<Scalar> r = restrict_cell_averages(ref_mesh, reference, mesh);
  return detail::relative_l2(l2_norm_sq(mesh, Field1D<Scalar>(candidate - r)), l2_norm_sq(mesh, r));
}

template <typename Scalar>
Scalar relative_error(const Mesh2D<Scalar>& mesh, const Field2D<Scalar>& candidate, const Mesh2D<Scalar>& ref_mesh,
                      const Field2D<Scalar>& reference) {
  const Field2D<Scalar> r = restrict_cell_averages(ref_mesh, reference, mesh);
  return detail::relative_l2(l2_norm_sq(mesh, Field2D<Scalar>(candidate - r)), l2_norm_sq(mesh, r));
}

/// Least-squares slope of log(error) against log(h).
inline double convergence_order(const std::vector<std::pair<double, double>>& samples) {
  if (samples.size() < 2) throw InvalidArgument("convergence order needs at least two samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [h, err] : samples) {
    if (!(h > 0) || !(err > 0)) throw InvalidArgument("convergence samples must be positive");
    const double x = std::log(h), y = std::log(err);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = double(samples.size());
  const double den = n * sxx - sx * sx;
  if (den == 0) throw InvalidArgument("convergence samples need distinct h");
  return (n * sxy - sx * sy) / den;
}

}  // namespace solheat
