#include "doctest.h"
#include "solheat/mesh.hpp"
#include "test_util.hpp"

using namespace solheat;

TEST_CASE("uniform 1D meshes") {
  SUBCASE("single cell") {
    const auto m = build_uniform_mesh_1d(1);
    CHECK(m.size() == 1);
    CHECK(m.faces()(0) == 0.0);
    CHECK(m.faces()(1) == 1.0);
    CHECK(m.width(0) == 1.0);
    CHECK(m.xi() == 1.0);
  }
  SUBCASE("four cells") {
    const auto m = build_uniform_mesh_1d(4);
    Eigen::VectorXd expected(5);
    expected << 0, 0.25, 0.5, 0.75, 1;
    CHECK(m.faces() == expected);
    CHECK(m.centers()(1) == doctest::Approx(0.375));
  }
  SUBCASE("n = 450") {
    const auto m = build_uniform_mesh_1d(450);
    CHECK(m.size() == 450);
    CHECK(m.max_width() == doctest::Approx(1.0 / 450).epsilon(1e-14));
    CHECK(m.xi() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("n = 0 rejected") { CHECK_THROWS_AS(build_uniform_mesh_1d(0), InvalidArgument); }
}

TEST_CASE("widths sum to one") {
  for (int n : {1, 3, 7, 50, 150, 450, 1000}) {
    const auto m = build_uniform_mesh_1d(n);
    CHECK(std::abs(m.widths().sum() - 1.0) <= 1e-14);
  }
  const auto m2 = build_mesh_2d(30, 50);
  double area = 0;
  for (Eigen::Index j = 0; j < m2.nr(); ++j)
    for (Eigen::Index i = 0; i < m2.ns(); ++i) area += m2.cell_area(i, j);
  CHECK(std::abs(area - 1.0) <= 1e-13);
}

TEST_CASE("non-uniform mesh validation") {
  Eigen::VectorXd faces(4);
  faces << 0, 0.2, 0.6, 1.0;
  const Mesh1D<double> m(faces);
  CHECK(m.xi() == doctest::Approx(0.5));
  CHECK(m.max_width() == doctest::Approx(0.4));

  faces << 0, 0.6, 0.2, 1.0;
  CHECK_THROWS_AS(Mesh1D<double>{faces}, InvalidArgument);
  faces << 0.1, 0.2, 0.6, 1.0;
  CHECK_THROWS_AS(Mesh1D<double>{faces}, InvalidArgument);
}

TEST_CASE("2D meshes align the core/SOL interface with a face") {
  SUBCASE("minimal") {
    const auto m = build_mesh_2d(2, 2);
    CHECK(m.sol_start() == 1);
    Eigen::VectorXd expected(3);
    expected << 0, 0.5, 1;
    CHECK(m.r().faces() == expected);
  }
  SUBCASE("experiment size") { CHECK(build_mesh_2d(100, 100).sol_start() == 50); }
  SUBCASE("odd nr rejected") { CHECK_THROWS_AS(build_mesh_2d(3, 5), InvalidArgument); }
  SUBCASE("non-uniform r-mesh must contain r = 1/2") {
    Eigen::VectorXd r(4);
    r << 0, 0.3, 0.7, 1;
    CHECK_THROWS_AS(Mesh2D<double>(build_uniform_mesh_1d(4), Mesh1D<double>(r)), InvalidArgument);
    r << 0, 0.2, 0.5, 1;
    const Mesh2D<double> m(build_uniform_mesh_1d(4), Mesh1D<double>(r));
    CHECK(m.sol_start() == 2);
    CHECK(m.h() == doctest::Approx(0.5));
    CHECK(m.xi() == doctest::Approx(0.4));
  }
}

TEST_CASE("restriction of cell averages") {
  std::mt19937 rng(7);
  const auto fine = build_uniform_mesh_1d(450);
  const auto coarse = build_uniform_mesh_1d(150);

  SUBCASE("constants are preserved") {
    const Eigen::VectorXd c = Eigen::VectorXd::Constant(450, 3.25);
    const Eigen::VectorXd r = restrict_cell_averages(fine, c, coarse);
    CHECK((r.array() - 3.25).abs().maxCoeff() <= 1e-14);
  }
  SUBCASE("two cells onto one") {
    Eigen::VectorXd f(2);
    f << 1, 3;
    const Eigen::VectorXd r = restrict_cell_averages(build_uniform_mesh_1d(2), f, build_uniform_mesh_1d(1));
    CHECK(r(0) == doctest::Approx(2.0));
  }
  SUBCASE("mass is preserved for random fields") {
    for (int k = 0; k < 20; ++k) {
      const Eigen::VectorXd f = test::random_field(rng, 450, 0, 10);
      const Eigen::VectorXd r = restrict_cell_averages(fine, f, coarse);
      CHECK(coarse.widths().dot(r) == doctest::Approx(fine.widths().dot(f)).epsilon(1e-13));
    }
  }
  SUBCASE("identity when fine equals coarse") {
    const Eigen::VectorXd f = test::random_field(rng, 150, 0, 10);
    CHECK((restrict_cell_averages(coarse, f, coarse) - f).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("commutes with scaling") {
    const Eigen::VectorXd f = test::random_field(rng, 450, 0, 10);
    const Eigen::VectorXd a = restrict_cell_averages(fine, Eigen::VectorXd(2.5 * f), coarse);
    const Eigen::VectorXd b = 2.5 * restrict_cell_averages(fine, f, coarse);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-13);
  }
  SUBCASE("non-nested meshes rejected") {
    const Eigen::VectorXd f = Eigen::VectorXd::Ones(450);
    CHECK_THROWS_AS(restrict_cell_averages(fine, f, build_uniform_mesh_1d(200)), InvalidArgument);
  }
}

TEST_CASE("2D restriction") {
  std::mt19937 rng(11);
  const auto fine = build_mesh_2d(300, 300);
  const auto coarse = build_mesh_2d(100, 100);
  const Eigen::MatrixXd f = test::random_field(rng, 300, 300, 0, 5);
  const Eigen::MatrixXd r = restrict_cell_averages(fine, f, coarse);
  CHECK(r.rows() == 100);
  CHECK(r.cols() == 100);
  const double fine_mass = (fine.s().widths().transpose() * f * fine.r().widths()).value();
  const double coarse_mass = (coarse.s().widths().transpose() * r * coarse.r().widths()).value();
  CHECK(coarse_mass == doctest::Approx(fine_mass).epsilon(1e-13));
  // Hand check of one coarse cell: mean of its 3x3 fine block.
  CHECK(r(4, 7) == doctest::Approx(f.block(12, 21, 3, 3).mean()).epsilon(1e-13));
  CHECK_THROWS_AS(restrict_cell_averages(fine, f, build_mesh_2d(100, 80)), InvalidArgument);
}
