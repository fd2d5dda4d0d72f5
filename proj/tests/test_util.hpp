#pragma once

#include <Eigen/Core>
#include <memory>
#include <random>

#include "solheat/mesh.hpp"

namespace solheat::test {

inline Eigen::VectorXd random_field(std::mt19937& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

inline Eigen::MatrixXd random_field(std::mt19937& rng, Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = u(rng);
  return m;
}

inline std::shared_ptr<const Mesh1D<double>> mesh1d(Eigen::Index n) {
  return std::make_shared<const Mesh1D<double>>(build_uniform_mesh_1d<double>(n));
}

inline std::shared_ptr<const Mesh2D<double>> mesh2d(Eigen::Index ns, Eigen::Index nr) {
  return std::make_shared<const Mesh2D<double>>(build_mesh_2d<double>(ns, nr));
}

}  // namespace solheat::test
