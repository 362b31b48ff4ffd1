#pragma once

#include <wavelab/solver.hpp>

#include <cmath>
#include <vector>

namespace wavelab {

/// Finite-propagation certificate: an increasing phase q with 0 < q' <= sqrt(c/b)
/// built from the envelope constants,
///   q(r) = K (1+r)^p,  K = sqrt(c0/b1) * 2/(2-beta-gamma),  p = 1-(beta+gamma)/2,
/// so q' = sqrt(c0/b1) (1+r)^{-(beta+gamma)/2} exactly. q0 is the largest constant
/// with q(r) >= q0 r^p on the internal sample ladder (attained at its far end).
struct SupportSpec {
  Scalar K = 0, p = 0;
  Scalar q0 = 0;
  Scalar R = 0, qR = 0;  // data support radius and q(R)
  Scalar beta = 0, gamma = 0;
  Scalar sample_r_hi = 0;

  Scalar q(Scalar r) const { return K * std::pow(1 + r, p); }
  Scalar qprime(Scalar r) const { return K * p * std::pow(1 + r, p - 1); }
};

inline SupportSpec build_q(const PowerLawEnvelope& env, Scalar data_radius, Scalar r_hi = 1e4,
                           Index n_samples = 4096) {
  const Scalar bg = env.beta + env.gamma;
  if (!(bg < 2)) throw std::invalid_argument("build_q: beta+gamma < 2 required");
  if (!(bg >= 0)) throw std::invalid_argument("build_q: beta+gamma >= 0 required");
  if (!(data_radius >= 0)) throw std::invalid_argument("build_q: data radius must be >= 0");
  SupportSpec s;
  s.beta = env.beta;
  s.gamma = env.gamma;
  s.p = 1 - bg / 2;
  s.K = std::sqrt(env.c0 / env.b1) * 2 / (2 - bg);
  s.R = data_radius;
  s.qR = s.q(data_radius);
  s.sample_r_hi = r_hi;
  // q(r)/r^p = K((1+r)/r)^p decreases in r; the sampled infimum sits at r_hi
  Scalar q0 = std::numeric_limits<Scalar>::infinity();
  for (Index i = 1; i <= n_samples; ++i) {
    const Scalar r = r_hi * std::pow(1e-6, 1 - Scalar(i) / Scalar(n_samples));
    q0 = std::min(q0, s.q(r) / std::pow(r, s.p));
  }
  s.q0 = q0;
  return s;
}

/// Radius the data cone can have reached by time t: solves q0 rho^p = t + q(R).
inline Scalar predicted_radius(const SupportSpec& s, Scalar t) {
  if (!(t >= 0)) throw std::invalid_argument("predicted_radius: t >= 0 required");
  return std::pow((t + s.qR) / s.q0, 1 / s.p);
}

/// Outermost radius where |u| reaches eps times its maximum; 0 for the zero field.
inline Scalar support_radius(const Grid& g, CRef<ArrayX> u, Scalar eps = 1e-8) {
  if (!(eps > 0 && eps <= 1)) throw std::invalid_argument("support_radius: eps in (0,1]");
  const Scalar umax = u.abs().maxCoeff();
  if (umax <= 0) return 0;
  const Scalar thresh = eps * umax;
  for (Index i = g.m - 1; i >= 0; --i)
    if (std::abs(u[i]) >= thresh) return g.r(i);
  return 0;
}

struct ConeCheck {
  Scalar t = 0;
  Scalar predicted = 0, measured = 0;
  Scalar outside_fraction = 0;  // energy beyond the predicted radius / total energy
  bool contained = false;       // measured <= predicted (informational)
  bool pass = false;            // energy criterion
  bool inconclusive = false;    // predicted radius beyond the grid
};

struct ConeReport {
  std::vector<ConeCheck> checks;
  bool pass = false;
  bool inconclusive = false;
};

/// Verifies finite propagation speed along a trajectory: at every snapshot the
/// energy fraction beyond the predicted cone radius must stay below `tol`.
inline ConeReport verify_cone(const Trajectory& traj, const SupportSpec& spec, const Grid& g,
                              const DiscreteField& d, Scalar tol = 1e-6, Scalar eps = 1e-8) {
  ConeReport rep;
  rep.pass = true;
  rep.inconclusive = false;
  for (const Snapshot& s : traj.snaps) {
    ConeCheck c;
    c.t = s.t;
    c.predicted = predicted_radius(spec, s.t);
    c.measured = support_radius(g, s.u, eps);
    if (c.predicted > g.r_max) {
      c.inconclusive = true;
      rep.inconclusive = true;
      rep.checks.push_back(c);
      continue;
    }
    const ArrayX grad = radial_gradient(g, s.u);
    const ArrayX density = 0.5 * (d.c * s.ut.square() + d.b_node * grad.square()) * d.quad_weight;
    Scalar total = 0, outside = 0;
    for (Index i = 0; i < g.m; ++i) {
      total += density[i];
      if (g.r(i) > c.predicted) outside += density[i];
    }
    c.outside_fraction = total > 0 ? outside / total : 0;  // zero field: vacuous pass
    c.contained = c.measured <= c.predicted;
    c.pass = c.outside_fraction <= tol;
    if (!c.pass) rep.pass = false;
    rep.checks.push_back(c);
  }
  return rep;
}

}  // namespace wavelab
