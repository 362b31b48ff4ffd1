#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <wavelab/energetics.hpp>
#include <wavelab/solver.hpp>

using namespace wavelab;

namespace {

CoefficientField constant_field() {
  return make_power_law(PowerLawEnvelope{}, ProfileKind::PurePower);
}

ArrayX sample(const Grid& g, const RadialFn& f) {
  ArrayX out(g.m);
  for (Index i = 0; i < g.m; ++i) out[i] = f(g.r(i));
  return out;
}

}  // namespace

TEST_CASE("stable step follows the slowest wave speed") {
  const Grid g = Grid::radial(3, 2.0, 201);  // dx = 0.01
  const DiscreteField d(g, constant_field());
  CHECK(stable_dt(g, d, 0.8) == doctest::Approx(0.008).epsilon(1e-13));
  CHECK_THROWS_AS(stable_dt(g, d, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(stable_dt(g, d, 1.5), std::invalid_argument);
  PowerLawEnvelope env;
  env.beta = 1;  // wave speed sqrt(b/c) grows with r; min sqrt(c/b) at r_max
  const DiscreteField dv(g, make_power_law(env, ProfileKind::PurePower));
  CHECK(stable_dt(g, dv, 1.0) == doctest::Approx(0.01 / std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("unit-CFL transport on the line reproduces the closed-form solution") {
  // 1-d undamped wave with symmetric origin: the leapfrog recursion at CFL = 1
  // propagates lattice samples exactly, so the error is pure rounding.
  const Grid g = Grid::cartesian1d(10.0, 1001);  // dx = 0.01
  CoefficientField f = constant_field();
  f.a = [](Scalar) { return Scalar(0); };
  const DiscreteField d(g, f);
  const Scalar center = 5, width = 1.5, t_end = 2;
  const ArrayX u0 = sample(g, [&](Scalar x) { return smooth_bump((x - center) / width); });
  const ArrayX u1 = ArrayX::Zero(g.m);
  const Trajectory traj = run(g, d, SourceField::zero(), u0, u1, t_end, 1.0,
                              Cadence::geometric(8));
  const Snapshot& last = traj.snaps.back();
  REQUIRE(last.t == doctest::Approx(t_end).epsilon(1e-14));
  Scalar worst = 0;
  for (Index i = 0; i < g.m; ++i) {
    const Scalar x = g.r(i);
    const Scalar exact = 0.5 * (smooth_bump((x - t_end - center) / width) +
                                smooth_bump((x + t_end - center) / width));
    worst = std::max(worst, std::abs(last.u[i] - exact));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("manufactured forcing converges at second order") {
  const Scalar R = 4;
  ManufacturedSolution ms;
  ms.phi = [R](Scalar r) {
    const Scalar s = r / R;
    return s >= 1 ? Scalar(0) : std::pow(1 - s * s, 4);
  };
  ms.phi_r = [R](Scalar r) {
    const Scalar s = r / R;
    return s >= 1 ? Scalar(0) : -8 * s * std::pow(1 - s * s, 3) / R;
  };
  ms.phi_rr = [R](Scalar r) {
    const Scalar s = r / R;
    if (s >= 1) return Scalar(0);
    return -8 * std::pow(1 - s * s, 2) * (1 - 7 * s * s) / (R * R);
  };
  ms.time_factor = [](Scalar t, int k) { return std::cos(t + k * M_PI / 2); };
  ms.support_radius = R;

  const CoefficientField f = constant_field();
  const SourceField src = manufactured_source(ms, f, 3);
  const Scalar t_end = 1.0;
  auto sup_error = [&](Index m) {
    const Grid g = Grid::radial(3, 8.0, m);
    const DiscreteField d(g, f);
    const ArrayX u0 = sample(g, [&](Scalar r) { return ms.eval(r, 0); });
    const ArrayX u1 = sample(g, [&](Scalar r) { return ms.eval_t(r, 0); });
    const Trajectory traj =
        run(g, d, SourceField(src), u0, u1, t_end, 0.45, Cadence::geometric(8));
    const Snapshot& last = traj.snaps.back();
    Scalar worst = 0;
    for (Index i = 0; i < g.m; ++i)
      worst = std::max(worst, std::abs(last.u[i] - ms.eval(g.r(i), last.t)));
    return worst;
  };
  const Scalar e_coarse = sup_error(128), e_fine = sup_error(255);  // dx halves exactly
  CHECK(e_coarse > 0);
  CHECK(e_coarse / e_fine >= 3.0);
}

TEST_CASE("undamped evolution conserves energy to second order in the step") {
  CoefficientField f = constant_field();
  f.a = [](Scalar) { return Scalar(0); };
  const InitialData data = make_gaussian_bump(1.0, 2.0);
  auto drift_at = [&](Index m) {
    const Grid g = Grid::radial(3, 20.0, m);
    const DiscreteField d(g, f);
    const ArrayX u0 = sample(g, data.u0), u1 = ArrayX::Zero(g.m);
    const Trajectory traj =
        run(g, d, SourceField::zero(), u0, u1, 5.0, 0.5, Cadence::geometric(16));
    const Scalar E0 = energy(g, d, traj.snaps.front().u, traj.snaps.front().ut);
    REQUIRE(E0 > 0);
    Scalar worst = 0;
    for (const Snapshot& s : traj.snaps)
      worst = std::max(worst, std::abs(energy(g, d, s.u, s.ut) - E0) / E0);
    return worst;
  };
  const Scalar coarse = drift_at(512), fine = drift_at(1024);
  // the sampled energy oscillates at O(dt^2); no secular growth
  CHECK(coarse <= 4e-3);
  CHECK(fine <= coarse / 3.0);
}

TEST_CASE("cascade runs evolve the time derivative consistently") {
  const Grid g = Grid::radial(3, 20.0, 512);
  const DiscreteField d(g, constant_field());
  const InitialData data = make_gaussian_bump(1.0, 2.0);
  const ArrayX u0 = sample(g, data.u0), u1 = ArrayX::Zero(g.m);
  const auto trajs =
      run_cascade(g, d, SourceField::zero(), u0, u1, 1, 5.0, 0.45, Cadence::geometric(16));
  REQUIRE(trajs.size() == 2);
  REQUIRE(trajs[0].snaps.size() == trajs[1].snaps.size());
  CHECK(trajs[1].cascade_index == 1);
  // compare the evolved derivative field against the base run's centered
  // difference at a mid-to-late snapshot
  const size_t j = trajs[0].snaps.size() - 1;
  const ArrayX& v = trajs[1].snaps[j].u;
  const ArrayX& ut = trajs[0].snaps[j].ut;
  const Scalar num = integrate(d, (v - ut).square());
  const Scalar den = integrate(d, ut.square());
  REQUIRE(den > 0);
  CHECK(std::sqrt(num / den) <= 5e-3);
}

TEST_CASE("cascade initial data solves the evolution identity at t = 0") {
  const Grid g = Grid::radial(3, 10.0, 256);
  const DiscreteField d(g, constant_field());
  const InitialData data = make_gaussian_bump(1.0, 2.0);
  const ArrayX u0 = sample(g, data.u0), u1 = ArrayX::Zero(g.m);
  const auto pairs = cascade_initial_data(g, d, SourceField::zero(), u0, u1, 2);
  REQUIRE(pairs.size() == 3);
  // w2 = c^{-1}(L w0 - a w1); check directly
  const ArrayX w2 = (apply_div_b_grad(g, d, u0) - d.a * u1) / d.c;
  for (Index i = 0; i + 1 < g.m; ++i)
    CHECK(pairs[1].second[i] == doctest::Approx(w2[i]).epsilon(1e-13));
  // chaining: pairs[j].second == pairs[j+1].first
  for (Index i = 0; i < g.m; ++i) CHECK(pairs[0].second[i] == pairs[1].first[i]);
}

TEST_CASE("sources of finite differentiability reject deep cascades") {
  const Grid g = Grid::radial(3, 10.0, 256);
  const DiscreteField d(g, constant_field());
  SourceField src;
  src.time_derivative_order = 0;
  src.eval = [](Scalar, Scalar, int) { return Scalar(1); };
  const ArrayX u0 = ArrayX::Zero(g.m), u1 = ArrayX::Zero(g.m);
  CHECK_THROWS_AS(run(g, d, src, u0, u1, 1.0, 0.5, Cadence::geometric(8), 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(cascade_initial_data(g, d, src, u0, u1, 2), std::invalid_argument);
  CHECK_NOTHROW(cascade_initial_data(g, d, src, u0, u1, 1));
  CHECK_NOTHROW(run_cascade(g, d, SourceField::zero(), u0, u1, 2, 1.0, 0.5,
                            Cadence::geometric(8)));
}

TEST_CASE("linear cadence lands snapshots on the requested stride") {
  const Grid g = Grid::radial(3, 10.0, 256);
  const DiscreteField d(g, constant_field());
  const InitialData data = make_gaussian_bump(1.0, 2.0);
  const ArrayX u0 = sample(g, data.u0), u1 = ArrayX::Zero(g.m);
  const Scalar dt = stable_dt(g, d, 0.5);
  const Trajectory traj =
      run(g, d, SourceField::zero(), u0, u1, 1.0, 0.5, Cadence::linear(8 * dt));
  REQUIRE(traj.snaps.size() >= 3);
  const Scalar gap = traj.snaps[1].t - traj.snaps[0].t;
  for (size_t j = 2; j + 1 < traj.snaps.size(); ++j)
    CHECK(traj.snaps[j].t - traj.snaps[j - 1].t == doctest::Approx(gap).epsilon(1e-12));
  CHECK(traj.snaps.front().t == 0.0);
  CHECK(traj.snaps.back().t == doctest::Approx(1.0));
}

TEST_CASE("support overflow flag trips when the field reaches the grid edge") {
  const Grid g = Grid::radial(3, 6.0, 256);
  CoefficientField f = constant_field();
  const DiscreteField d(g, f);
  const InitialData data = make_gaussian_bump(1.0, 2.0);
  const ArrayX u0 = sample(g, data.u0), u1 = ArrayX::Zero(g.m);
  const Trajectory short_run =
      run(g, d, SourceField::zero(), u0, u1, 1.0, 0.45, Cadence::geometric(8));
  CHECK_FALSE(short_run.support_overflow);
  const Trajectory long_run =
      run(g, d, SourceField::zero(), u0, u1, 8.0, 0.45, Cadence::geometric(8));
  CHECK(long_run.support_overflow);
}
