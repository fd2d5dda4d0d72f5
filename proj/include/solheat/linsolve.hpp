#pragma once

#include <Eigen/Core>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <cmath>

#include "solheat/errors.hpp"
#include "solheat/mesh.hpp"

namespace solheat {

/// Row i reads sub(i-1) x(i-1) + diag(i) x(i) + super(i) x(i+1) = rhs(i).
template <typename Scalar>
struct TridiagonalSystem {
  Vector<Scalar> sub;
  Vector<Scalar> diag;
  Vector<Scalar> super;
  Vector<Scalar> rhs;
};

/// Tridiagonal system with periodic wrap: lower_corner couples row n-1 to
/// x(0) and upper_corner couples row 0 to x(n-1).
template <typename Scalar>
struct CyclicTridiagonalSystem {
  Vector<Scalar> sub;
  Vector<Scalar> diag;
  Vector<Scalar> super;
  Vector<Scalar> rhs;
  Scalar lower_corner{};
  Scalar upper_corner{};
};

template <typename Scalar>
struct SparseSymmetricSystem {
  Eigen::SparseMatrix<Scalar, Eigen::RowMajor> matrix;
  Vector<Scalar> rhs;
  Scalar tolerance = Scalar(1e-10);
  int max_iterations = 10000;
  /// Optional starting iterate; empty means zero.
  Vector<Scalar> guess;
};

namespace detail {

inline void check_band(Eigen::Index n, Eigen::Index sub, Eigen::Index super, Eigen::Index rhs) {
  if (n < 1) throw InvalidArgument("tridiagonal system needs n >= 1");
  if (sub != n - 1 || super != n - 1 || rhs != n)
    throw InvalidArgument("tridiagonal band sizes do not match the diagonal");
}

}  // namespace detail

/// Thomas algorithm on raw bands. `x` may alias `rhs`.
template <typename Scalar, typename Out>
void thomas_solve(const Eigen::Ref<const Vector<Scalar>>& sub, const Eigen::Ref<const Vector<Scalar>>& diag,
                  const Eigen::Ref<const Vector<Scalar>>& super, const Eigen::Ref<const Vector<Scalar>>& rhs,
                  Vector<Scalar>& scratch, Out&& x) {
  const Eigen::Index n = diag.size();
  scratch.resize(n);
  Scalar pivot = diag(0);
  if (pivot == Scalar(0)) throw SingularSystem("tridiagonal solve", 0);
  x(0) = rhs(0) / pivot;
  for (Eigen::Index i = 1; i < n; ++i) {
    scratch(i - 1) = super(i - 1) / pivot;
    pivot = diag(i) - sub(i - 1) * scratch(i - 1);
    if (pivot == Scalar(0) || !std::isfinite(double(pivot)))
      throw SingularSystem("tridiagonal solve", static_cast<std::size_t>(i));
    x(i) = (rhs(i) - sub(i - 1) * x(i - 1)) / pivot;
  }
  for (Eigen::Index i = n - 2; i >= 0; --i) x(i) -= scratch(i) * x(i + 1);
}

template <typename Scalar>
Vector<Scalar> solve_tridiagonal(const TridiagonalSystem<Scalar>& sys) {
  const Eigen::Index n = sys.diag.size();
  detail::check_band(n, sys.sub.size(), sys.super.size(), sys.rhs.size());
  Vector<Scalar> x(n), scratch;
  thomas_solve<Scalar>(sys.sub, sys.diag, sys.super, sys.rhs, scratch, x);
  return x;
}

/// Periodic tridiagonal solve by a rank-one (Sherman-Morrison) correction of
/// two Thomas solves. Zero corners fall through to the plain tridiagonal path.
template <typename Scalar>
Vector<Scalar> solve_cyclic_tridiagonal(const CyclicTridiagonalSystem<Scalar>& sys) {
  const Eigen::Index n = sys.diag.size();
  detail::check_band(n, sys.sub.size(), sys.super.size(), sys.rhs.size());
  if (sys.lower_corner == Scalar(0) && sys.upper_corner == Scalar(0))
    return solve_tridiagonal(TridiagonalSystem<Scalar>{sys.sub, sys.diag, sys.super, sys.rhs});
  if (n < 3) throw InvalidArgument("cyclic tridiagonal system needs n >= 3");

  // A = B + u v^T with u = (g, 0, .., 0, lower), v = (1, 0, .., 0, upper / g).
  const Scalar gamma = sys.diag(0) != Scalar(0) ? -sys.diag(0) : Scalar(-1);
  Vector<Scalar> diag = sys.diag;
  diag(0) -= gamma;
  diag(n - 1) -= sys.lower_corner * sys.upper_corner / gamma;

  Vector<Scalar> u = Vector<Scalar>::Zero(n);
  u(0) = gamma;
  u(n - 1) = sys.lower_corner;

  Vector<Scalar> y(n), z(n), scratch;
  thomas_solve<Scalar>(sys.sub, diag, sys.super, sys.rhs, scratch, y);
  thomas_solve<Scalar>(sys.sub, diag, sys.super, u, scratch, z);

  const Scalar vy = y(0) + sys.upper_corner / gamma * y(n - 1);
  const Scalar vz = z(0) + sys.upper_corner / gamma * z(n - 1);
  if (Scalar(1) + vz == Scalar(0)) throw SingularSystem("cyclic tridiagonal solve", 0);
  return y - (vy / (Scalar(1) + vz)) * z;
}

/// Jacobi-preconditioned conjugate gradient. Throws NonConvergence when the
/// relative residual stays above the tolerance.
template <typename Scalar>
Vector<Scalar> solve_sparse_spd(const SparseSymmetricSystem<Scalar>& sys) {
  using Matrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;
  if (sys.matrix.rows() != sys.matrix.cols() || sys.matrix.rows() != sys.rhs.size())
    throw InvalidArgument("sparse system dimensions do not match");
  Eigen::ConjugateGradient<Matrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<Scalar>> cg;
  cg.setTolerance(sys.tolerance);
  cg.setMaxIterations(sys.max_iterations);
  cg.compute(sys.matrix);
  Vector<Scalar> x = sys.guess.size() == sys.rhs.size() ? Vector<Scalar>(cg.solveWithGuess(sys.rhs, sys.guess))
                                                        : Vector<Scalar>(cg.solve(sys.rhs));
  if (cg.info() != Eigen::Success)
    throw NonConvergence("conjugate gradient", double(cg.error()), static_cast<int>(cg.iterations()));
  return x;
}

}  // namespace solheat
