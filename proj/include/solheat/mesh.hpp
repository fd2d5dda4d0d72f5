#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "solheat/errors.hpp"

namespace solheat {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Cell averages on a 1D mesh.
template <typename Scalar>
using Field1D = Vector<Scalar>;

/// Cell averages on a tensor-product mesh, indexed (i, j) = (s-cell, r-cell).
/// Column j is the s-line at fixed r and is contiguous in memory.
template <typename Scalar>
using Field2D = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Finite-volume partition of [0, 1] into cells C_i = (faces[i], faces[i+1]).
template <typename Scalar>
class Mesh1D {
 public:
  explicit Mesh1D(Vector<Scalar> faces) : faces_(std::move(faces)) {
    const Eigen::Index n = faces_.size() - 1;
    if (n < 1) throw InvalidArgument("mesh needs at least two faces");
    if (faces_(0) != Scalar(0) || faces_(n) != Scalar(1))
      throw InvalidArgument("mesh faces must start at 0 and end at 1");
    widths_.resize(n);
    centers_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      widths_(i) = faces_(i + 1) - faces_(i);
      if (!(widths_(i) > Scalar(0)))
        throw InvalidArgument("mesh faces must be strictly increasing (cell " +
                              std::to_string(i) + ")");
      centers_(i) = Scalar(0.5) * (faces_(i) + faces_(i + 1));
    }
    max_width_ = widths_.maxCoeff();
    xi_ = widths_.minCoeff() / max_width_;
  }

  Eigen::Index size() const { return widths_.size(); }
  const Vector<Scalar>& faces() const { return faces_; }
  const Vector<Scalar>& widths() const { return widths_; }
  const Vector<Scalar>& centers() const { return centers_; }
  Scalar width(Eigen::Index i) const { return widths_(i); }
  Scalar max_width() const { return max_width_; }
  /// Quasi-uniformity ratio: min width over max width, in (0, 1].
  Scalar xi() const { return xi_; }

 private:
  Vector<Scalar> faces_;
  Vector<Scalar> widths_;
  Vector<Scalar> centers_;
  Scalar max_width_{};
  Scalar xi_{};
};

template <typename Scalar = double>
Mesh1D<Scalar> build_uniform_mesh_1d(Eigen::Index n) {
  if (n < 1) throw InvalidArgument("uniform mesh needs n >= 1 cells");
  Vector<Scalar> faces(n + 1);
  for (Eigen::Index i = 0; i <= n; ++i) faces(i) = Scalar(i) / Scalar(n);
  return Mesh1D<Scalar>(std::move(faces));
}

/// Tensor-product mesh on (s, r) in [0,1]^2. Rows j < sol_start() lie in the
/// periodic core (r < 1/2), the others in the scrape-off layer.
template <typename Scalar>
class Mesh2D {
 public:
  Mesh2D(Mesh1D<Scalar> s_mesh, Mesh1D<Scalar> r_mesh)
      : s_(std::move(s_mesh)), r_(std::move(r_mesh)) {
    const auto& f = r_.faces();
    auto it = std::find(f.data(), f.data() + f.size(), Scalar(0.5));
    if (it == f.data() + f.size())
      throw InvalidArgument(
          "r = 1/2 must be a cell face: the core/SOL interface cannot lie inside a cell");
    sol_start_ = static_cast<Eigen::Index>(it - f.data());
    h_ = std::max(s_.max_width(), r_.max_width());
    xi_ = std::min(s_.widths().minCoeff(), r_.widths().minCoeff()) / h_;
  }

  const Mesh1D<Scalar>& s() const { return s_; }
  const Mesh1D<Scalar>& r() const { return r_; }
  Eigen::Index ns() const { return s_.size(); }
  Eigen::Index nr() const { return r_.size(); }
  /// Index of the first r-cell whose lower face is at or above r = 1/2.
  Eigen::Index sol_start() const { return sol_start_; }
  bool is_sol_row(Eigen::Index j) const { return j >= sol_start_; }
  Scalar h() const { return h_; }
  Scalar xi() const { return xi_; }
  Scalar cell_area(Eigen::Index i, Eigen::Index j) const { return s_.width(i) * r_.width(j); }

 private:
  Mesh1D<Scalar> s_;
  Mesh1D<Scalar> r_;
  Eigen::Index sol_start_{};
  Scalar h_{};
  Scalar xi_{};
};

template <typename Scalar = double>
Mesh2D<Scalar> build_mesh_2d(Eigen::Index ns, Eigen::Index nr) {
  if (ns < 1 || nr < 1) throw InvalidArgument("2D mesh needs ns, nr >= 1");
  if (nr % 2 != 0)
    throw InvalidArgument("nr must be even so that the core/SOL interface r = 1/2 is a cell face (got nr = " +
                          std::to_string(nr) + ")");
  return Mesh2D<Scalar>(build_uniform_mesh_1d<Scalar>(ns), build_uniform_mesh_1d<Scalar>(nr));
}

namespace detail {

/// For each coarse cell, the half-open range of fine cells it covers.
template <typename Scalar>
std::vector<Eigen::Index> nesting_offsets(const Mesh1D<Scalar>& fine, const Mesh1D<Scalar>& coarse) {
  const auto& ff = fine.faces();
  const auto& cf = coarse.faces();
  const Scalar tol = Scalar(1e-12);
  std::vector<Eigen::Index> offsets(static_cast<std::size_t>(cf.size()));
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < cf.size(); ++c) {
    while (k < ff.size() && ff(k) < cf(c) - tol) ++k;
    if (k == ff.size() || std::abs(ff(k) - cf(c)) > tol)
      throw InvalidArgument("meshes are not nested: coarse face " + std::to_string(double(cf(c))) +
                            " is not a fine face");
    offsets[static_cast<std::size_t>(c)] = k;
  }
  return offsets;
}

}  // namespace detail

/// Width-weighted average of fine cells onto a nested coarse mesh.
template <typename Scalar>
Field1D<Scalar> restrict_cell_averages(const Mesh1D<Scalar>& fine_mesh, const Field1D<Scalar>& fine,
                                       const Mesh1D<Scalar>& coarse_mesh) {
  if (fine.size() != fine_mesh.size()) throw InvalidArgument("field size does not match fine mesh");
  const auto off = detail::nesting_offsets(fine_mesh, coarse_mesh);
  Field1D<Scalar> out(coarse_mesh.size());
  for (Eigen::Index c = 0; c < coarse_mesh.size(); ++c) {
    const Eigen::Index b = off[c], e = off[c + 1];
    const auto w = fine_mesh.widths().segment(b, e - b);
    out(c) = w.dot(fine.segment(b, e - b)) / w.sum();
  }
  return out;
}

template <typename Scalar>
Field2D<Scalar> restrict_cell_averages(const Mesh2D<Scalar>& fine_mesh, const Field2D<Scalar>& fine,
                                       const Mesh2D<Scalar>& coarse_mesh) {
  if (fine.rows() != fine_mesh.ns() || fine.cols() != fine_mesh.nr())
    throw InvalidArgument("field shape does not match fine mesh");
  const auto so = detail::nesting_offsets(fine_mesh.s(), coarse_mesh.s());
  const auto ro = detail::nesting_offsets(fine_mesh.r(), coarse_mesh.r());
  Field2D<Scalar> out(coarse_mesh.ns(), coarse_mesh.nr());
  for (Eigen::Index cj = 0; cj < coarse_mesh.nr(); ++cj) {
    const Eigen::Index jb = ro[cj], je = ro[cj + 1];
    const auto wr = fine_mesh.r().widths().segment(jb, je - jb);
    for (Eigen::Index ci = 0; ci < coarse_mesh.ns(); ++ci) {
      const Eigen::Index ib = so[ci], ie = so[ci + 1];
      const auto ws = fine_mesh.s().widths().segment(ib, ie - ib);
      const auto block = fine.block(ib, jb, ie - ib, je - jb);
      out(ci, cj) = (ws.transpose() * block * wr).value() / (ws.sum() * wr.sum());
    }
  }
  return out;
}

}  // namespace solheat
