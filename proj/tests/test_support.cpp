#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <wavelab/support.hpp>

using namespace wavelab;

namespace {
ArrayX sample(const Grid& g, const RadialFn& f) {
  ArrayX out(g.m);
  for (Index i = 0; i < g.m; ++i) out[i] = f(g.r(i));
  return out;
}
}  // namespace

TEST_CASE("phase function for constant coefficients is 1 + r") {
  const SupportSpec s = build_q(PowerLawEnvelope{}, 2.0);
  CHECK(s.K == doctest::Approx(1.0));
  CHECK(s.p == doctest::Approx(1.0));
  CHECK(s.q(0) == doctest::Approx(1.0));
  CHECK(s.q(4) == doctest::Approx(5.0));
  CHECK(s.qR == doctest::Approx(3.0));
  CHECK(s.q0 <= 1.0 + 1e-3);
  CHECK(s.q0 >= 1.0);
  // cone radius grows linearly: rho(t) ~ t + q(R)
  CHECK(predicted_radius(s, 10) == doctest::Approx(13.0).epsilon(2e-4));
}

TEST_CASE("phase function for growing stiffness slows to a square root") {
  PowerLawEnvelope env;
  env.beta = 1;
  const SupportSpec s = build_q(env, 0.0);
  CHECK(s.p == doctest::Approx(0.5));
  CHECK(s.K == doctest::Approx(2.0));
  CHECK(s.q(3) == doctest::Approx(4.0));  // 2*(1+3)^{1/2}
}

TEST_CASE("phase derivative never exceeds the inverse wave speed") {
  for (Scalar beta : {0.0, 0.5, 1.0}) {
    for (Scalar gamma : {0.0, 0.3}) {
      PowerLawEnvelope env;
      env.beta = beta;
      env.gamma = gamma;
      const CoefficientField f = make_power_law(env, ProfileKind::PurePower);
      const SupportSpec s = build_q(env, 1.0);
      for (Scalar r : {0.0, 0.5, 2.0, 10.0, 100.0, 5000.0})
        CHECK(s.qprime(r) <= std::sqrt(f.c(r) / f.b(r)) * (1 + 1e-12));
    }
  }
  PowerLawEnvelope bad;
  bad.beta = 1.5;
  bad.gamma = 0.6;  // beta+gamma >= 2: no finite-propagation phase
  CHECK_THROWS_AS(build_q(bad, 1.0), std::invalid_argument);
}

TEST_CASE("support radius finds the outermost significant node") {
  const Grid g = Grid::radial(3, 10.0, 1001);  // dx = 0.01
  const ArrayX u = sample(g, [](Scalar r) { return r <= 2 ? std::exp(-r * r) : Scalar(0); });
  const Scalar rad = support_radius(g, u, 1e-8);
  CHECK(rad >= 2.0 - 0.011);
  CHECK(rad <= 2.0 + 1e-12);
  // eps = 1 keeps only the maximum itself (attained at r = 0)
  CHECK(support_radius(g, u, 1.0) == 0.0);
  CHECK(support_radius(g, ArrayX::Zero(g.m)) == 0.0);
  CHECK_THROWS_AS(support_radius(g, u, 0.0), std::invalid_argument);
}

TEST_CASE("cone verification accepts a contained pulse and flags a widened one") {
  const Grid g = Grid::radial(3, 12.0, 512);
  const CoefficientField f = make_power_law(PowerLawEnvelope{}, ProfileKind::PurePower);
  const DiscreteField d(g, f);

  // single synthetic snapshot at t = 0, data radius 3
  Trajectory traj;
  Snapshot s;
  s.t = 0;
  s.u = sample(g, [](Scalar r) { return smooth_bump(r / 3.0); });
  s.ut = ArrayX::Zero(g.m);
  traj.snaps.push_back(s);

  const SupportSpec honest = build_q(PowerLawEnvelope{}, 3.0);
  const ConeReport ok = verify_cone(traj, honest, g, d);
  CHECK(ok.pass);
  CHECK_FALSE(ok.inconclusive);
  CHECK(ok.checks[0].contained);

  // a spec built for much smaller data must report energy outside its cone
  const SupportSpec narrow = build_q(PowerLawEnvelope{}, 0.5);
  const ConeReport bad = verify_cone(traj, narrow, g, d);
  CHECK_FALSE(bad.pass);
  CHECK(bad.checks[0].outside_fraction > 1e-3);
}

TEST_CASE("cone checks beyond the grid are inconclusive, not failures") {
  const Grid g = Grid::radial(3, 5.0, 256);
  const CoefficientField f = make_power_law(PowerLawEnvelope{}, ProfileKind::PurePower);
  const DiscreteField d(g, f);
  Trajectory traj;
  Snapshot s;
  s.t = 100;  // predicted radius ~ 103 >> r_max
  s.u = sample(g, [](Scalar r) { return smooth_bump(r / 3.0); });
  s.ut = ArrayX::Zero(g.m);
  traj.snaps.push_back(s);
  const ConeReport rep = verify_cone(traj, build_q(PowerLawEnvelope{}, 3.0), g, d);
  CHECK(rep.inconclusive);
  CHECK(rep.checks[0].inconclusive);
  CHECK(rep.pass);  // nothing measurable failed
}
