#include <Eigen/Dense>
#include <random>

#include "doctest.h"
#include "solheat/diagnostics.hpp"
#include "solheat/heat2d.hpp"
#include "test_util.hpp"

using namespace solheat;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

namespace {

const Params2D<double> base{1.0, 1e-2, 2.0, 10.0};

double max_abs(const Mat& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("constant field without sources or outflow is steady") {
  const auto mesh = test::mesh2d(12, 10);
  const Params2D<double> p{1.0, 0.01, 0.0, 0.0};
  auto s = make_state(mesh, Mat(Mat::Constant(12, 10, 2.0)));
  const ViscosityState<double> visc{20.0};
  const double dt = 1e-2;
  CHECK(max_abs(step_split(s, p, dt, visc).T.array() - 2.0) <= 1e-14);
  CHECK(max_abs(step_split(s, p, dt, visc, SweepScheme::implicit).T.array() - 2.0) <= 1e-14);
  CHECK(max_abs(step_explicit_2d(s, p, 1e-5).T.array() - 2.0) <= 1e-14);
  CHECK(max_abs(step_unsplit(s, p, dt, UnsplitMode::imex, visc).T.array() - 2.0) <= 1e-9);
  CHECK(max_abs(step_unsplit(s, p, dt, UnsplitMode::implicit, visc).T.array() - 2.0) <= 1e-9);
}

TEST_CASE("core-edge influx adds dt K_perp Q_perp of mass") {
  const auto mesh = test::mesh2d(10, 10);
  const Params2D<double> p{1.0, 0.01, 0.0, 10.0};
  auto s = make_state(mesh, Mat(Mat::Constant(10, 10, 3.0)));
  const double m0 = mass(*mesh, s.T);
  const double dt = 1e-3;
  const ViscosityState<double> visc{2 * std::pow(3.0, 2.5)};
  CHECK(mass(*mesh, step_split(s, p, dt, visc).T) - m0 == doctest::Approx(1e-4).epsilon(1e-10));
  CHECK(mass(*mesh, step_explicit_2d(s, p, dt).T) - m0 == doctest::Approx(1e-4).epsilon(1e-10));
  UnsplitOptions tight;
  tight.solver_tolerance = 1e-14;
  CHECK(mass(*mesh, step_unsplit(s, p, dt, UnsplitMode::imex, visc, tight).T) - m0 ==
        doctest::Approx(1e-4).epsilon(1e-8));
}

TEST_CASE("r-sweep matches a dense backward Euler solve") {
  std::mt19937 rng(21);
  Vec rf(7);
  rf << 0, 0.1, 0.25, 0.5, 0.6, 0.85, 1.0;
  auto mesh = Mesh2D<double>(build_uniform_mesh_1d(5), Mesh1D<double>(rf));
  const Mat t = test::random_field(rng, 5, 6, 0, 4);
  const double dt = 0.3;
  const Mat got = sweep_r(mesh, t, base, dt);

  const Vec w = mesh.r().widths();
  Mat a = Mat::Identity(6, 6);
  for (int j = 0; j + 1 < 6; ++j) {
    const double g = 2 * base.k_perp / (w(j) + w(j + 1));
    a(j, j) += dt * g / w(j);
    a(j, j + 1) -= dt * g / w(j);
    a(j + 1, j + 1) += dt * g / w(j + 1);
    a(j + 1, j) -= dt * g / w(j + 1);
  }
  for (int i = 0; i < 5; ++i) {
    Vec rhs = t.row(i).transpose();
    rhs(0) += dt * base.k_perp * base.q_perp / w(0);
    const Vec oracle = a.fullPivLu().solve(rhs);
    CHECK((got.row(i).transpose() - oracle).cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("SOL rows of the s-sweep are the 1D steps") {
  std::mt19937 rng(22);
  const auto mesh = test::mesh2d(20, 8);
  const Mat t = test::random_field(rng, 20, 8, 0.5, 3);
  const auto m1 = std::make_shared<const Mesh1D<double>>(mesh->s());
  const ViscosityState<double> visc{40.0};
  const Mat imex = sweep_s(*mesh, t, base, 1e-3, visc);
  const Mat impl = sweep_s(*mesh, t, base, 1e-3, visc, SweepScheme::implicit);
  for (Eigen::Index j = mesh->sol_start(); j < 8; ++j) {
    const auto row = make_state(m1, Vec(t.col(j)));
    CHECK(imex.col(j) == step_imex(row, base.parallel(), 1e-3, visc).T);
    CHECK(impl.col(j) == step_implicit(row, base.parallel(), 1e-3).T);
  }
}

TEST_CASE("symmetries") {
  std::mt19937 rng(23);
  const auto mesh = test::mesh2d(16, 12);
  const ViscosityState<double> visc{30.0};

  SUBCASE("s-independent data stay s-independent without outflow") {
    const Params2D<double> p{1.0, 0.01, 0.0, 10.0};
    const Vec prof = test::random_field(rng, 12, 1, 3);
    auto s = make_state(mesh, Mat(Vec::Ones(16) * prof.transpose()));
    for (int k = 0; k < 5; ++k) s = step_split(s, p, 1e-2, visc);
    for (Eigen::Index j = 0; j < 12; ++j)
      CHECK(s.T.col(j).maxCoeff() - s.T.col(j).minCoeff() <= 1e-12);
  }
  SUBCASE("core rows commute with periodic shifts") {
    const Params2D<double> p{1.0, 0.0, 2.0, 0.0};
    const Mat t = test::random_field(rng, 16, 12, 0.5, 3);
    Mat shifted(16, 12);
    for (Eigen::Index i = 0; i < 16; ++i) shifted.row((i + 5) % 16) = t.row(i);
    for (auto scheme : {SweepScheme::imex, SweepScheme::implicit}) {
      const Mat a = sweep_s(*mesh, t, p, 1e-2, visc, scheme);
      const Mat b = sweep_s(*mesh, shifted, p, 1e-2, visc, scheme);
      for (Eigen::Index j = 0; j < mesh->sol_start(); ++j)
        for (Eigen::Index i = 0; i < 16; ++i) CHECK(b((i + 5) % 16, j) == doctest::Approx(a(i, j)).epsilon(1e-11));
    }
  }
}

TEST_CASE("split step mass budget") {
  std::mt19937 rng(24);
  const auto mesh = test::mesh2d(20, 20);
  auto s = make_state(mesh, test::random_field(rng, 20, 20, 0.5, 3));
  const double dt = 1e-3;
  auto visc = initial_viscosity(s.T, base.k_par);
  const auto& wr = mesh->r().widths();
  for (auto scheme : {SweepScheme::imex, SweepScheme::implicit}) {
    const Mat star = sweep_s(*mesh, s.T, base, dt, visc, scheme);
    double outflow = 0;
    for (Eigen::Index j = mesh->sol_start(); j < 20; ++j) outflow += base.gamma * wr(j) * (star(0, j) + star(19, j));
    const double expected = dt * (base.k_perp * base.q_perp - outflow);
    const double got = mass(*mesh, step_split(s, base, dt, visc, scheme).T) - mass(*mesh, s.T);
    CHECK(std::abs(got - expected) <= 1e-12);
  }
}

TEST_CASE("explicit bound") {
  const auto mesh = build_mesh_2d(10, 10);
  const double expected = 0.9 / (2 * std::pow(3.0, 2.5) / 0.01 + 2 * 0.01 / 0.01);
  CHECK(explicit_dt_2d(mesh, 3.0, base) == doctest::Approx(expected).epsilon(1e-13));
  CHECK_THROWS_AS(explicit_dt_2d(mesh, 0.0, Params2D<double>{1.0, 0.0, 0.0, 0.0}), DegenerateProblem);
}

TEST_CASE("explicit step keeps the range under its bound") {
  std::mt19937 rng(25);
  const auto mesh = test::mesh2d(20, 20);
  const Params2D<double> p{1.0, 0.01, 2.0, 0.0};
  auto s = make_state(mesh, test::random_field(rng, 20, 20, 0, 3));
  const double top = s.T.maxCoeff();
  for (int k = 0; k < 500; ++k) {
    s = step_explicit_2d(s, p, explicit_dt_2d(*mesh, s.T.maxCoeff(), p));
    REQUIRE(s.T.minCoeff() >= 0.0);
    REQUIRE(s.T.maxCoeff() <= top);
  }
  ExplicitOptions opts{30.0};
  auto b = make_state(mesh, Mat(Mat::Constant(20, 20, 3.0)));
  CHECK_THROWS_AS(
      [&] {
        for (int k = 0; k < 200; ++k) b = step_explicit_2d(b, base, 50 * explicit_dt_2d(*mesh, 3.0, base), opts);
      }(),
      BlowUp);
}

TEST_CASE("unsplit implicit solves its nonlinear system") {
  std::mt19937 rng(26);
  const auto mesh = test::mesh2d(12, 12);
  auto s = make_state(mesh, test::random_field(rng, 12, 12, 0.5, 3));
  UnsplitOptions opts;
  opts.solver_tolerance = 1e-14;
  NewtonReport r;
  const auto n = step_unsplit(s, base, 1e-2, UnsplitMode::implicit, ViscosityState<double>{1.0}, opts, &r);
  CHECK(r.iterations >= 1);
  CHECK(r.residual <= 1e-10 * 4);
  CHECK(n.T.minCoeff() >= 0.0);
}

TEST_CASE("time-stepping variants agree to first order") {
  const auto mesh = test::mesh2d(12, 12);
  const double t_end = 0.04;
  UnsplitOptions opts;
  opts.solver_tolerance = 1e-13;
  auto run = [&](double dt, int variant) {
    auto s = make_state(mesh, Mat(Mat::Constant(12, 12, 3.0)));
    auto visc = initial_viscosity(s.T, base.k_par);
    const int steps = static_cast<int>(std::lround(t_end / dt));
    for (int k = 0; k < steps; ++k) {
      if (variant == 0) s = step_unsplit(s, base, dt, UnsplitMode::implicit, visc, opts);
      if (variant == 1) s = step_unsplit(s, base, dt, UnsplitMode::imex, visc, opts);
      if (variant == 2) s = step_split(s, base, dt, visc);
      visc = update_viscosity(visc, s.T, base.k_par);
    }
    return s.T;
  };
  auto gap = [&](double dt, int a, int b) {
    const Mat x = run(dt, a), y = run(dt, b);
    return relative_error(*mesh, x, *mesh, y);
  };
  const double g1 = gap(4e-3, 0, 1), g2 = gap(2e-3, 0, 1);
  const double h1 = gap(4e-3, 0, 2), h2 = gap(2e-3, 0, 2);
  MESSAGE("unsplit imex gap " << g1 << " " << g2 << ", split gap " << h1 << " " << h2);
  CHECK(g1 / g2 >= 1.6);
  CHECK(h1 / h2 >= 1.6);

  // Explicit with a tiny step against the implicit unsplit run.
  auto e = make_state(mesh, Mat(Mat::Constant(12, 12, 3.0)));
  while (e.time < t_end - 1e-15) {
    const double dt = std::min(explicit_dt_2d(*mesh, e.T.maxCoeff(), base), t_end - e.time);
    e = step_explicit_2d(e, base, dt);
  }
  const double x1 = relative_error(*mesh, run(4e-3, 0), *mesh, e.T);
  const double x2 = relative_error(*mesh, run(2e-3, 0), *mesh, e.T);
  MESSAGE("implicit vs explicit " << x1 << " " << x2);
  CHECK(x2 < x1);
  CHECK(x1 / x2 >= 1.6);
}
