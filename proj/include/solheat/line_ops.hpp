#pragma once

// Kernels acting on one mesh line (a 1D problem or one row/column of a 2D
// sweep). Face f of a line sits between cell f and cell f+1; on a periodic
// line face n-1 wraps from the last cell to the first.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "solheat/errors.hpp"
#include "solheat/linsolve.hpp"
#include "solheat/mesh.hpp"

namespace solheat {

enum class LineBoundary { limiter, periodic };

/// |x|^{5/2}
template <typename Scalar>
inline Scalar pow52(Scalar x) {
  const Scalar a = std::abs(x);
  return a * a * std::sqrt(a);
}

/// sign(x) |x|^{7/2}, the primitive of (7/2)|x|^{5/2}.
template <typename Scalar>
inline Scalar pow72(Scalar x) {
  const Scalar a = std::abs(x);
  return std::copysign(a * a * a * std::sqrt(a), x);
}

struct NewtonOptions {
  double tolerance = 1e-10;
  int max_iterations = 50;
};

struct NewtonReport {
  int iterations = 0;
  double residual = 0.0;
};

namespace line {

template <typename Scalar>
using ConstRef = Eigen::Ref<const Vector<Scalar>>;

/// Interior-face and (for periodic lines) wrap-face count.
inline Eigen::Index face_count(Eigen::Index n, LineBoundary b) {
  return b == LineBoundary::periodic ? n : n - 1;
}

/// 2 / (w_left + w_right) for every face on the line.
template <typename Scalar>
Vector<Scalar> face_coefficients(const ConstRef<Scalar>& w, LineBoundary b) {
  const Eigen::Index n = w.size();
  Vector<Scalar> c(face_count(n, b));
  for (Eigen::Index f = 0; f < n - 1; ++f) c(f) = Scalar(2) / (w(f) + w(f + 1));
  if (b == LineBoundary::periodic) c(n - 1) = Scalar(2) / (w(n - 1) + w(0));
  return c;
}

/// Banded matrix of a line operator. On periodic lines the wrap coupling is
/// kept in the corners.
template <typename Scalar>
struct LineMatrix {
  Vector<Scalar> sub, diag, super;
  Scalar lower_corner{}, upper_corner{};

  explicit LineMatrix(Eigen::Index n)
      : sub(Vector<Scalar>::Zero(std::max<Eigen::Index>(n - 1, 0))),
        diag(Vector<Scalar>::Zero(n)),
        super(Vector<Scalar>::Zero(std::max<Eigen::Index>(n - 1, 0))) {}

  /// Adds a coupling a(row, col) += value for neighbouring cells on the line.
  void add(Eigen::Index row, Eigen::Index col, Scalar value) {
    const Eigen::Index n = diag.size();
    if (row == col) {
      diag(row) += value;
    } else if (col == row + 1) {
      super(row) += value;
    } else if (col == row - 1) {
      sub(col) += value;
    } else if (row == 0 && col == n - 1) {
      upper_corner += value;
    } else if (row == n - 1 && col == 0) {
      lower_corner += value;
    }
  }

  Vector<Scalar> solve(const ConstRef<Scalar>& rhs) const {
    if (lower_corner == Scalar(0) && upper_corner == Scalar(0)) {
      Vector<Scalar> x(rhs.size()), scratch;
      thomas_solve<Scalar>(sub, diag, super, rhs, scratch, x);
      return x;
    }
    return solve_cyclic_tridiagonal(
        CyclicTridiagonalSystem<Scalar>{sub, diag, super, rhs, lower_corner, upper_corner});
  }
};

/// Adds the coupling of face f with conductance g (flux = g (T_right - T_left))
/// to the matrix of T - dt/w div(flux), scaled per row by dt / w.
template <typename Scalar>
void add_face_conductance(LineMatrix<Scalar>& m, const ConstRef<Scalar>& w, Eigen::Index f, Scalar g,
                          Scalar dt) {
  const Eigen::Index n = w.size();
  const Eigen::Index left = f, right = (f + 1) % n;
  if (left == right) return;
  m.add(left, left, dt / w(left) * g);
  m.add(left, right, -dt / w(left) * g);
  m.add(right, right, dt / w(right) * g);
  m.add(right, left, -dt / w(right) * g);
}

/// Divergence (F_{i+1/2} - F_{i-1/2}) of face fluxes, including the limiter
/// outflow +gamma T_0 / -gamma T_{n-1} when the line is not periodic.
template <typename Scalar>
void flux_divergence(const ConstRef<Scalar>& face_flux, const ConstRef<Scalar>& t, Scalar gamma,
                     LineBoundary b, Eigen::Ref<Vector<Scalar>> out) {
  const Eigen::Index n = t.size();
  out.setZero();
  const Eigen::Index nf = face_flux.size();
  for (Eigen::Index f = 0; f < nf; ++f) {
    const Eigen::Index left = f, right = (f + 1) % n;
    out(left) += face_flux(f);
    out(right) -= face_flux(f);
  }
  if (b == LineBoundary::limiter) {
    out(0) -= gamma * t(0);
    out(n - 1) -= gamma * t(n - 1);
  }
}

/// Explicit update T + dt/w (F_{i+1/2} - F_{i-1/2}) with the nonlinear
/// parallel flux (4K/7)(P(T_{i+1}) - P(T_i)) 2 / (w_i + w_{i+1}).
template <typename Scalar>
void explicit_update(const ConstRef<Scalar>& w, const ConstRef<Scalar>& t, Scalar k_par, Scalar gamma,
                     LineBoundary b, Scalar dt, Eigen::Ref<Vector<Scalar>> out) {
  const Eigen::Index n = t.size();
  const Vector<Scalar> c = face_coefficients<Scalar>(w, b);
  const Scalar k = Scalar(2) * k_par / Scalar(7);  // c already carries the factor 2
  Vector<Scalar> p = t.unaryExpr([](Scalar x) { return pow72(x); });
  Vector<Scalar> flux(c.size());
  for (Eigen::Index f = 0; f < c.size(); ++f) flux(f) = k * c(f) * (p((f + 1) % n) - p(f));
  Vector<Scalar> div(n);
  flux_divergence<Scalar>(flux, t, gamma, b, div);
  out = t + dt * div.cwiseQuotient(w);
}

/// One IMEX step: viscous part nu d_ss T implicit, remainder explicit,
/// limiter outflow implicit. Produces one banded linear solve.
template <typename Scalar>
void imex_update(const ConstRef<Scalar>& w, const ConstRef<Scalar>& t, Scalar k_par, Scalar gamma,
                 LineBoundary b, Scalar dt, Scalar nu, Eigen::Ref<Vector<Scalar>> out) {
  const Eigen::Index n = t.size();
  const Vector<Scalar> c = face_coefficients<Scalar>(w, b);
  const Vector<Scalar> q = t.unaryExpr([](Scalar x) { return pow52(x); });

  Vector<Scalar> flux(c.size());
  LineMatrix<Scalar> m(n);
  m.diag.setOnes();
  for (Eigen::Index f = 0; f < c.size(); ++f) {
    const Eigen::Index right = (f + 1) % n;
    const Scalar coeff = k_par * Scalar(0.5) * (q(f) + q(right)) - nu;
    flux(f) = c(f) * coeff * (t(right) - t(f));
    add_face_conductance<Scalar>(m, w, f, nu * c(f), dt);
  }
  if (b == LineBoundary::limiter) {
    m.diag(0) += dt / w(0) * gamma;
    m.diag(n - 1) += dt / w(n - 1) * gamma;
  }
  Vector<Scalar> div(n);
  flux_divergence<Scalar>(flux, t, Scalar(0), b, div);  // limiter outflow is in the matrix
  const Vector<Scalar> rhs = t + dt * div.cwiseQuotient(w);
  out = m.solve(rhs);
}

/// Residual T - dt/w (F(T)_{i+1/2} - F(T)_{i-1/2}) - T^n of the fully implicit step.
template <typename Scalar>
void implicit_residual(const ConstRef<Scalar>& w, const Vector<Scalar>& c, const ConstRef<Scalar>& tn,
                       const Vector<Scalar>& t, Scalar k_par, Scalar gamma, LineBoundary b, Scalar dt,
                       Vector<Scalar>& res) {
  const Eigen::Index n = t.size();
  const Scalar k = Scalar(2) * k_par / Scalar(7);
  const Vector<Scalar> p = t.unaryExpr([](Scalar x) { return pow72(x); });
  Vector<Scalar> flux(c.size());
  for (Eigen::Index f = 0; f < c.size(); ++f) flux(f) = k * c(f) * (p((f + 1) % n) - p(f));
  Vector<Scalar> div(n);
  flux_divergence<Scalar>(flux, t, gamma, b, div);
  res = t - dt * div.cwiseQuotient(w) - tn;
}

/// Fully implicit step solved by Newton's method with a banded Jacobian and
/// residual-decrease backtracking.
template <typename Scalar>
NewtonReport implicit_update(const ConstRef<Scalar>& w, const ConstRef<Scalar>& tn, Scalar k_par, Scalar gamma,
                             LineBoundary b, Scalar dt, const NewtonOptions& opts,
                             Eigen::Ref<Vector<Scalar>> out) {
  const Eigen::Index n = tn.size();
  const Vector<Scalar> c = face_coefficients<Scalar>(w, b);
  const Scalar target = Scalar(opts.tolerance) * (Scalar(1) + tn.cwiseAbs().maxCoeff());

  Vector<Scalar> t = tn;
  Vector<Scalar> res(n), trial(n), trial_res(n);
  implicit_residual<Scalar>(w, c, tn, t, k_par, gamma, b, dt, res);
  Scalar norm = res.cwiseAbs().maxCoeff();

  NewtonReport report;
  while (!(norm <= target)) {
    if (report.iterations >= opts.max_iterations)
      throw NonConvergence("implicit Newton iteration", double(norm), report.iterations);
    ++report.iterations;

    // d/dT of (2K/7) P(T) is K |T|^{5/2}.
    LineMatrix<Scalar> jac(n);
    jac.diag.setOnes();
    for (Eigen::Index f = 0; f < c.size(); ++f) {
      const Eigen::Index left = f, right = (f + 1) % n;
      if (left == right) continue;
      const Scalar gl = k_par * c(f) * pow52(t(left));
      const Scalar gr = k_par * c(f) * pow52(t(right));
      jac.add(left, left, dt / w(left) * gl);
      jac.add(left, right, -dt / w(left) * gr);
      jac.add(right, right, dt / w(right) * gr);
      jac.add(right, left, -dt / w(right) * gl);
    }
    if (b == LineBoundary::limiter) {
      jac.diag(0) += dt / w(0) * gamma;
      jac.diag(n - 1) += dt / w(n - 1) * gamma;
    }
    const Vector<Scalar> delta = jac.solve(-res);

    Scalar step = 1;
    for (int halvings = 0;; ++halvings) {
      trial = t + step * delta;
      implicit_residual<Scalar>(w, c, tn, trial, k_par, gamma, b, dt, trial_res);
      const Scalar trial_norm = trial_res.cwiseAbs().maxCoeff();
      if (trial_norm < norm || halvings == 20 || !(trial_norm == trial_norm)) {
        if (!(trial_norm == trial_norm))
          throw NonConvergence("implicit Newton iteration (non-finite residual)", double(norm),
                               report.iterations);
        t.swap(trial);
        res.swap(trial_res);
        norm = trial_norm;
        break;
      }
      step *= Scalar(0.5);
    }
  }
  report.residual = double(norm);
  out = t;
  return report;
}

}  // namespace line
}  // namespace solheat
