#include <cmath>
#include <random>

#include "doctest.h"
#include "solheat/diagnostics.hpp"
#include "solheat/heat1d.hpp"
#include "test_util.hpp"

using namespace solheat;
using Vec = Eigen::VectorXd;

TEST_CASE("parallel flux") {
  CHECK(parallel_flux(1.0, 1.0, 0.1, 0.1, 1.0) == 0.0);
  CHECK(parallel_flux(0.0, 1.0, 0.1, 0.1, 1.0) == doctest::Approx(20.0 / 7.0).epsilon(1e-14));
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-3, 6), w(0.01, 0.5);
  for (int k = 0; k < 100; ++k) {
    const double a = u(rng), b = u(rng), wl = w(rng), wr = w(rng);
    CHECK(parallel_flux(a, b, wl, wr, 1.3) == -parallel_flux(b, a, wl, wr, 1.3));
  }
}

TEST_CASE("limiter boundary flux") {
  CHECK(boundary_flux(5.0, 2.0, Side::left) == 10.0);
  CHECK(boundary_flux(5.0, 2.0, Side::right) == -10.0);
  CHECK(boundary_flux(5.0, 0.0, Side::left) == 0.0);
}

TEST_CASE("CFL bound") {
  const Params1D<double> p{1.0, 2.0};
  SUBCASE("reference grid") {
    const auto m = build_uniform_mesh_1d(450);
    const double ds = 1.0 / 450;
    const double oracle = ds * ds / std::max(4.0 / 7.0 * std::pow(5.0, 2.5), 2.0 * ds);
    CHECK(cfl_dt(m, 5.0, p) == doctest::Approx(oracle).epsilon(1e-13));
    CHECK(cfl_dt(m, 5.0, p) == doctest::Approx(1.546e-7).epsilon(1e-3));
  }
  SUBCASE("limiter-dominated") {
    CHECK(cfl_dt(build_uniform_mesh_1d(10), 5.0, Params1D<double>{0.0, 2.0}) == doctest::Approx(0.05));
    CHECK(cfl_dt(build_uniform_mesh_1d(10), 0.0, p) == doctest::Approx(0.05));
  }
  SUBCASE("non-uniform mesh uses xi") {
    Vec faces(4);
    faces << 0, 0.2, 0.6, 1.0;
    const Mesh1D<double> m(faces);
    CHECK(cfl_dt(m, 1.0, Params1D<double>{1.0, 0.0}) == doctest::Approx(0.25 * 0.16 / (4.0 / 7.0)));
  }
  SUBCASE("monotone bound") {
    CHECK(monotone_dt(build_uniform_mesh_1d(10), 0.0, p) == doctest::Approx(0.025));
    CHECK(monotone_dt(build_uniform_mesh_1d(10), 1.0, p) == doctest::Approx(0.005));
    CHECK_THROWS_AS(monotone_dt(build_uniform_mesh_1d(10), 0.0, Params1D<double>{1.0, 0.0}), DegenerateProblem);
  }
  SUBCASE("degenerate") {
    CHECK_THROWS_AS(cfl_dt(build_uniform_mesh_1d(10), 5.0, Params1D<double>{0.0, 0.0}), DegenerateProblem);
  }
}

TEST_CASE("explicit step") {
  const Params1D<double> p{1.0, 2.0};
  SUBCASE("constant field without outflow is steady") {
    auto s = make_state(test::mesh1d(20), Vec(Vec::Constant(20, 2.5)));
    const auto n = step_explicit(s, Params1D<double>{1.0, 0.0}, 1e-4);
    CHECK(n.T == s.T);
    CHECK(n.time == doctest::Approx(1e-4));
    CHECK(n.step == 1);
  }
  SUBCASE("single cell closed form") {
    auto s = make_state(test::mesh1d(1), Vec(Vec::Constant(1, 5.0)));
    CHECK(step_explicit(s, p, 0.1).T(0) == doctest::Approx(3.0).epsilon(1e-14));
  }
  SUBCASE("stays in [0, 5] under the monotone bound from constant data") {
    const auto mesh = test::mesh1d(50);
    auto s = make_state(mesh, Vec(Vec::Constant(50, 5.0)));
    const double dt = monotone_dt(*mesh, 5.0, p);
    CHECK(dt == doctest::Approx(2.0 / 7.0 * cfl_dt(*mesh, 5.0, p)).epsilon(1e-13));
    for (int k = 0; k < 2000; ++k) {
      s = step_explicit(s, p, dt);
      REQUIRE(s.T.minCoeff() >= 0.0);
      REQUIRE(s.T.maxCoeff() <= 5.0);
    }
  }
  SUBCASE("rough data stays in range under the monotone bound") {
    std::mt19937 rng(3);
    const auto mesh = test::mesh1d(50);
    auto s = make_state(mesh, test::random_field(rng, 50, 0, 5));
    const double top = s.T.maxCoeff();
    const double dt = monotone_dt(*mesh, top, p);
    for (int k = 0; k < 2000; ++k) {
      s = step_explicit(s, p, dt);
      REQUIRE(s.T.minCoeff() >= 0.0);
      REQUIRE(s.T.maxCoeff() <= top);
    }
  }
  SUBCASE("blow-up detection reports the step") {
    const auto mesh = test::mesh1d(50);
    auto s = make_state(mesh, Vec(Vec::Constant(50, 5.0)));
    const double dt = 50 * cfl_dt(*mesh, 5.0, p);
    ExplicitOptions opts{50.0};
    bool caught = false;
    try {
      for (int k = 0; k < 1000; ++k) s = step_explicit(s, p, dt, opts);
    } catch (const BlowUp& e) {
      caught = true;
      CHECK(e.step() >= 1);
    }
    CHECK(caught);
  }
  SUBCASE("NaN counts as blow-up") {
    Vec t = Vec::Constant(5, 1.0);
    t(2) = std::numeric_limits<double>::quiet_NaN();
    auto s = make_state(test::mesh1d(5), t);
    CHECK_THROWS_AS(step_explicit(s, p, 1e-6), BlowUp);
  }
  SUBCASE("rejects non-positive dt") {
    auto s = make_state(test::mesh1d(4), Vec(Vec::Ones(4)));
    CHECK_THROWS_AS(step_explicit(s, p, 0.0), InvalidArgument);
  }
}

TEST_CASE("implicit step") {
  const Params1D<double> p{1.0, 2.0};
  SUBCASE("constant field is steady after zero Newton iterations") {
    auto s = make_state(test::mesh1d(30), Vec(Vec::Constant(30, 4.0)));
    NewtonReport r;
    const auto n = step_implicit(s, Params1D<double>{1.0, 0.0}, 1e-2, {}, &r);
    CHECK(n.T == s.T);
    CHECK(r.iterations <= 1);
  }
  SUBCASE("single cell closed form") {
    auto s = make_state(test::mesh1d(1), Vec(Vec::Constant(1, 5.0)));
    CHECK(step_implicit(s, p, 0.1).T(0) == doctest::Approx(5.0 / 1.4).epsilon(1e-10));
  }
  SUBCASE("max principle and L2 decay for random data") {
    std::mt19937 rng(4);
    const auto mesh = test::mesh1d(40);
    for (int run = 0; run < 10; ++run) {
      auto s = make_state(mesh, test::random_field(rng, 40, 0, 3));
      const double top = s.T.maxCoeff();
      for (int k = 0; k < 20; ++k) {
        const double before = l2_norm_sq(*mesh, s.T);
        s = step_implicit(s, p, 1e-2);
        REQUIRE(s.T.minCoeff() >= 0.0);
        REQUIRE(s.T.maxCoeff() <= top);
        REQUIRE(l2_norm_sq(*mesh, s.T) <= before * (1 + 1e-12));
      }
    }
  }
  SUBCASE("residual meets the Newton tolerance") {
    const auto mesh = test::mesh1d(50);
    auto s = make_state(mesh, Vec(Vec::Constant(50, 5.0)));
    NewtonReport r;
    const auto n = step_implicit(s, p, 1e-2, {}, &r);
    CHECK(r.iterations >= 1);
    CHECK(r.residual <= 1e-10 * 6);
    // Independent residual evaluation through the public flux functions.
    double worst = 0;
    for (int i = 0; i < 50; ++i) {
      const double fr = i + 1 < 50 ? parallel_flux(n.T(i), n.T(i + 1), 0.02, 0.02, 1.0) : boundary_flux(n.T(i), 2.0, Side::right);
      const double fl = i > 0 ? parallel_flux(n.T(i - 1), n.T(i), 0.02, 0.02, 1.0) : boundary_flux(n.T(i), 2.0, Side::left);
      worst = std::max(worst, std::abs(n.T(i) - 1e-2 / 0.02 * (fr - fl) - 5.0));
    }
    CHECK(worst <= 1e-9);
  }
  SUBCASE("iteration cap") {
    auto s = make_state(test::mesh1d(50), Vec(Vec::Constant(50, 5.0)));
    CHECK_THROWS_AS(step_implicit(s, p, 1e-2, NewtonOptions{1e-10, 1}), NonConvergence);
  }
}

TEST_CASE("IMEX step") {
  const Params1D<double> p{1.0, 2.0};
  SUBCASE("constant field is steady") {
    auto s = make_state(test::mesh1d(25), Vec(Vec::Constant(25, 3.0)));
    const auto n = step_imex(s, Params1D<double>{1.0, 0.0}, 1e-3, initial_viscosity(s.T, 1.0));
    CHECK((n.T.array() - 3.0).abs().maxCoeff() <= 1e-14);
  }
  SUBCASE("single cell matches the implicit closed form for any nu") {
    auto s = make_state(test::mesh1d(1), Vec(Vec::Constant(1, 5.0)));
    for (double nu : {1e-3, 1.0, 111.8})
      CHECK(step_imex(s, p, 0.1, ViscosityState<double>{nu}).T(0) == doctest::Approx(5.0 / 1.4).epsilon(1e-14));
  }
  SUBCASE("energy inequality with the viscosity floor") {
    std::mt19937 rng(5);
    const auto mesh = test::mesh1d(60);
    for (int run = 0; run < 10; ++run) {
      auto s = make_state(mesh, test::random_field(rng, 60, 0, 4));
      auto visc = initial_viscosity(s.T, p.k_par);
      const double dt = 1e-3;
      for (int k = 0; k < 50; ++k) {
        const double before = imex_energy(*mesh, s.T, visc.nu, dt);
        s = step_imex(s, p, dt, visc);
        REQUIRE(imex_energy(*mesh, s.T, visc.nu, dt) <= before * (1 + 1e-10));
        visc = update_viscosity(visc, s.T, p.k_par);
        REQUIRE(visc.nu >= (1 - 1e-12) * p.k_par * std::pow(s.T.cwiseAbs().maxCoeff(), 2.5));
      }
    }
  }
  SUBCASE("rejects non-positive viscosity") {
    auto s = make_state(test::mesh1d(4), Vec(Vec::Ones(4)));
    CHECK_THROWS_AS(step_imex(s, p, 1e-3, ViscosityState<double>{0.0}), InvalidArgument);
  }
}

TEST_CASE("viscosity algorithm") {
  const Vec five = Vec::Constant(3, 5.0);
  CHECK(initial_viscosity(five, 1.0).nu == doctest::Approx(2 * std::pow(5.0, 2.5)).epsilon(1e-14));
  CHECK(initial_viscosity(five, 1.0).nu == doctest::Approx(111.8034).epsilon(1e-6));

  const Vec two = Vec::Constant(3, 2.0);
  const double bound = std::pow(2.0, 2.5);
  CHECK(update_viscosity(ViscosityState<double>{100.0}, two, 1.0).nu == doctest::Approx(bound).epsilon(1e-14));
  CHECK(bound == doctest::Approx(5.6569).epsilon(1e-4));

  SUBCASE("dead band") {
    for (double nu : {1.3 * bound, 2.0 * bound, 3.9 * bound})
      CHECK(update_viscosity(ViscosityState<double>{nu}, two, 1.0).nu == nu);
  }
  SUBCASE("low viscosity is reset to twice the bound") {
    CHECK(update_viscosity(ViscosityState<double>{1.0}, two, 1.0).nu == doctest::Approx(2 * bound));
  }
  SUBCASE("zero field keeps nu positive") {
    CHECK(update_viscosity(ViscosityState<double>{1.0}, Vec::Zero(3), 1.0).nu > 0.0);
  }
}

TEST_CASE("mass balance") {
  std::mt19937 rng(6);
  const auto mesh = test::mesh1d(40);
  const double dt = 1e-3;

  SUBCASE("no outflow conserves mass") {
    const Params1D<double> p{1.0, 0.0};
    auto s = make_state(mesh, test::random_field(rng, 40, 0, 3));
    auto visc = initial_viscosity(s.T, 1.0);
    const double m0 = mass(*mesh, s.T);
    const double dt_e = monotone_dt(*mesh, s.T.maxCoeff(), p);
    CHECK(std::abs(mass(*mesh, step_explicit(s, p, dt_e).T) - m0) <= 1e-12);
    CHECK(std::abs(mass(*mesh, step_implicit(s, p, dt).T) - m0) <= 1e-12);
    CHECK(std::abs(mass(*mesh, step_imex(s, p, dt, visc).T) - m0) <= 1e-12);
  }
  SUBCASE("outflow matches the boundary fluxes") {
    const Params1D<double> p{1.0, 2.0};
    auto s = make_state(mesh, test::random_field(rng, 40, 0, 3));
    const double m0 = mass(*mesh, s.T);
    const double dt_e = monotone_dt(*mesh, s.T.maxCoeff(), p);
    auto outflow = [&](const Vec& t) { return -p.gamma * (t(0) + t(39)); };

    const auto e = step_explicit(s, p, dt_e);
    CHECK(mass(*mesh, e.T) - m0 == doctest::Approx(dt_e * outflow(s.T)).epsilon(1e-9));
    const auto i = step_implicit(s, p, dt);
    CHECK(mass(*mesh, i.T) - m0 == doctest::Approx(dt * outflow(i.T)).epsilon(1e-9));
    const auto x = step_imex(s, p, dt, initial_viscosity(s.T, 1.0));
    CHECK(mass(*mesh, x.T) - m0 == doctest::Approx(dt * outflow(x.T)).epsilon(1e-9));
  }
}

TEST_CASE("implicit and IMEX converge to each other as dt shrinks") {
  const auto mesh = test::mesh1d(50);
  const Params1D<double> p{1.0, 2.0};
  const double t_end = 0.05;
  auto run_pair = [&](double dt) {
    auto a = make_state(mesh, Vec(Vec::Constant(50, 5.0)));
    auto b = a;
    auto visc = initial_viscosity(b.T, p.k_par);
    const int steps = static_cast<int>(std::lround(t_end / dt));
    for (int k = 0; k < steps; ++k) {
      a = step_implicit(a, p, dt);
      b = step_imex(b, p, dt, visc);
      visc = update_viscosity(visc, b.T, p.k_par);
    }
    return std::sqrt(l2_norm_sq(*mesh, Vec(a.T - b.T)) / l2_norm_sq(*mesh, a.T));
  };
  const double g1 = run_pair(1e-3), g2 = run_pair(5e-4), g3 = run_pair(2.5e-4);
  MESSAGE("gaps: " << g1 << " " << g2 << " " << g3);
  CHECK(g2 < g1);
  CHECK(g3 < g2);
  // At least linear: halving dt must shrink the gap by a factor near 2.
  CHECK(g1 / g2 >= 1.7);
  CHECK(g2 / g3 >= 1.7);
}
