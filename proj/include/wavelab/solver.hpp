#pragma once

#include <wavelab/grid.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

namespace wavelab {

/// Largest stable leapfrog step scaled by the user factor:
/// dt = cfl * dx * min over nodes of sqrt(c/b).
inline Scalar stable_dt(const Grid& g, const DiscreteField& d, Scalar cfl) {
  if (!(cfl > 0 && cfl <= 1)) throw std::invalid_argument("stable_dt: cfl must be in (0,1]");
  const Scalar min_ratio = (d.c / d.b_node).sqrt().minCoeff();
  return cfl * g.dx * min_ratio;
}

/// Snapshot selection: either a geometric ladder with `per_decade` times per decade
/// of t (uniform density in log t, for decay fits) or a fixed linear spacing.
struct Cadence {
  enum class Kind { Geometric, Linear } kind = Kind::Geometric;
  Scalar per_decade = 64;
  Scalar t_first = 0.0625;  // geometric ladder starts at max(t_first, 4*dt)
  Scalar dt_snap = 0;

  static Cadence geometric(Scalar per_decade = 64, Scalar t_first = 0.0625) {
    Cadence c;
    c.kind = Kind::Geometric;
    c.per_decade = per_decade;
    c.t_first = t_first;
    return c;
  }
  static Cadence linear(Scalar dt_snap) {
    Cadence c;
    c.kind = Kind::Linear;
    c.dt_snap = dt_snap;
    return c;
  }
};

struct Snapshot {
  Scalar t = 0;
  ArrayX u, ut;  // ut is the centered step difference (u^{n+1}-u^{n-1})/(2dt)
};

struct Trajectory {
  std::vector<Snapshot> snaps;
  Scalar dt = 0, cfl = 0, t_end = 0;
  int cascade_index = 0;       // which time derivative of the base field this evolves
  std::uint64_t field_hash = 0;
  bool support_overflow = false;  // support reached 95% of the grid during the run
  Index m = 0;
  Scalar r_max = 0;
};

namespace detail {

inline std::set<Index> snapshot_steps(const Cadence& cad, Scalar dt, Index n_steps) {
  std::set<Index> steps{0, n_steps};
  if (cad.kind == Cadence::Kind::Linear) {
    if (!(cad.dt_snap > 0)) throw std::invalid_argument("cadence: dt_snap must be positive");
    const Index stride = std::max<Index>(1, (Index)std::llround(cad.dt_snap / dt));
    for (Index s = stride; s < n_steps; s += stride) steps.insert(s);
  } else {
    if (!(cad.per_decade > 0)) throw std::invalid_argument("cadence: per_decade must be positive");
    const Scalar t_lo = std::max(cad.t_first, 4 * dt);
    const Scalar t_hi = dt * Scalar(n_steps);
    if (t_hi > t_lo) {
      const long j_lo = (long)std::ceil(cad.per_decade * std::log10(t_lo));
      const long j_hi = (long)std::floor(cad.per_decade * std::log10(t_hi));
      for (long j = j_lo; j <= j_hi; ++j) {
        const Scalar tau = std::pow(10.0, Scalar(j) / cad.per_decade);
        const Index s = (Index)std::llround(tau / dt);
        if (s > 0 && s < n_steps) steps.insert(s);
      }
    }
  }
  return steps;
}

}  // namespace detail

/// One damped leapfrog step: solves nodewise for u_next in
///   c (u_next - 2u + u_prev)/dt^2 + a (u_next - u_prev)/(2dt) = L_b u + h(t)
/// (time-centered diagonal damping; unconditionally sign-correct dissipation).
/// The outer boundary stays homogeneous Dirichlet.
inline ArrayX leapfrog_step(const Grid& g, const DiscreteField& d, CRef<ArrayX> u_prev,
                            CRef<ArrayX> u_curr, Scalar dt, const ArrayX& forcing) {
  const ArrayX lap = apply_div_b_grad(g, d, u_curr);
  const ArrayX denom = d.c / (dt * dt) + d.a / (2 * dt);
  ArrayX u_next =
      (lap + forcing + d.c * (2 * u_curr - u_prev) / (dt * dt) + d.a * u_prev / (2 * dt)) / denom;
  u_next[g.m - 1] = 0;
  return u_next;
}

/// Evolves the field from (u0, u1) to t_end recording snapshots per the cadence.
/// `source_dt_order` selects which time derivative of h forces this run (cascade
/// runs for v = d_t^j u are forced by d_t^j h).
inline Trajectory run(const Grid& g, const DiscreteField& d, const SourceField& source,
                      CRef<ArrayX> u0, CRef<ArrayX> u1, Scalar t_end, Scalar cfl,
                      const Cadence& cadence, int source_dt_order = 0, int cascade_index = 0) {
  if (!(t_end > 0)) throw std::invalid_argument("run: t_end must be positive");
  if (u0.size() != g.m || u1.size() != g.m)
    throw std::invalid_argument("run: initial data size does not match the grid");
  if (!source.is_zero && source_dt_order > source.time_derivative_order)
    throw std::invalid_argument("run: source not differentiable to the requested order");

  const Scalar dt_max = stable_dt(g, d, cfl);
  const Index n_steps = (Index)std::ceil(t_end / dt_max - 1e-12);
  const Scalar dt = t_end / Scalar(n_steps);
  const std::set<Index> snap_steps = detail::snapshot_steps(cadence, dt, n_steps);

  Trajectory traj;
  traj.dt = dt;
  traj.cfl = cfl;
  traj.t_end = t_end;
  traj.cascade_index = cascade_index;
  traj.field_hash = field_signature(d);
  traj.m = g.m;
  traj.r_max = g.r_max;

  const ArrayX radii = g.radii();
  ArrayX forcing = ArrayX::Zero(g.m);
  auto eval_forcing = [&](Scalar t) -> const ArrayX& {
    if (!source.is_zero)
      for (Index i = 0; i < g.m; ++i) forcing[i] = source.eval(radii[i], t, source_dt_order);
    return forcing;
  };

  const Scalar overflow_r = 0.95 * g.r_max;
  auto check_overflow = [&](const ArrayX& u) {
    if (traj.support_overflow) return;
    const Scalar umax = u.abs().maxCoeff();
    if (umax <= 0) return;
    for (Index i = g.m - 1; i >= 0; --i) {
      if (std::abs(u[i]) >= 1e-8 * umax) {
        if (radii[i] >= overflow_r) traj.support_overflow = true;
        return;
      }
    }
  };

  // t = 0 snapshot reproduces the initial data exactly
  traj.snaps.push_back({0.0, u0, u1});
  check_overflow(u0);

  // second-order Taylor start: u^1 = u0 + dt u1 + dt^2/2 c^{-1}(L u0 - a u1 + h(0))
  ArrayX u_prev = u0;
  ArrayX u_curr =
      u0 + dt * u1 +
      (dt * dt / 2) * (apply_div_b_grad(g, d, u0) - d.a * u1 + eval_forcing(0)) / d.c;
  u_curr[g.m - 1] = 0;

  for (Index n = 1; n <= n_steps; ++n) {
    // levels (u_prev, u_curr) sit at steps (n-1, n); advance to n+1
    ArrayX u_next = leapfrog_step(g, d, u_prev, u_curr, dt, eval_forcing(dt * Scalar(n)));
    if (snap_steps.count(n)) {
      traj.snaps.push_back({dt * Scalar(n), u_curr, (u_next - u_prev) / (2 * dt)});
      check_overflow(u_curr);
    }
    u_prev.swap(u_curr);
    u_curr.swap(u_next);
  }
  return traj;
}

/// Initial data for the time-derivative cascade: w_0 = u0, w_1 = u1,
///   w_{j+2} = c^{-1} (L_b w_j - a w_{j+1} + d_t^j h(.,0)).
/// Returns pairs (w_j, w_{j+1}) for j = 0..k_max.
inline std::vector<std::pair<ArrayX, ArrayX>> cascade_initial_data(
    const Grid& g, const DiscreteField& d, const SourceField& source, CRef<ArrayX> u0,
    CRef<ArrayX> u1, int k_max) {
  if (k_max < 0) throw std::invalid_argument("cascade: k_max >= 0 required");
  if (!source.is_zero && k_max > 0 && k_max - 1 > source.time_derivative_order)
    throw std::invalid_argument("cascade: source differentiable only to order " +
                                std::to_string(source.time_derivative_order));
  std::vector<ArrayX> w;
  w.reserve(k_max + 2);
  w.emplace_back(u0);
  w.emplace_back(u1);
  const ArrayX radii = g.radii();
  for (int j = 0; j + 2 <= k_max + 1; ++j) {
    ArrayX h0 = ArrayX::Zero(g.m);
    if (!source.is_zero)
      for (Index i = 0; i < g.m; ++i) h0[i] = source.eval(radii[i], 0.0, j);
    ArrayX next = (apply_div_b_grad(g, d, w[j]) - d.a * w[j + 1] + h0) / d.c;
    next[g.m - 1] = 0;
    w.push_back(std::move(next));
  }
  std::vector<std::pair<ArrayX, ArrayX>> pairs;
  pairs.reserve(k_max + 1);
  for (int j = 0; j <= k_max; ++j) pairs.emplace_back(w[j], w[j + 1]);
  return pairs;
}

/// Runs the base field and its first k_max time derivatives with a shared grid,
/// step size, and cadence (snapshot times align across the returned trajectories).
inline std::vector<Trajectory> run_cascade(const Grid& g, const DiscreteField& d,
                                           const SourceField& source, CRef<ArrayX> u0,
                                           CRef<ArrayX> u1, int k_max, Scalar t_end, Scalar cfl,
                                           const Cadence& cadence) {
  auto data = cascade_initial_data(g, d, source, u0, u1, k_max);
  std::vector<Trajectory> trajs;
  trajs.reserve(k_max + 1);
  for (int j = 0; j <= k_max; ++j)
    trajs.push_back(run(g, d, source, data[j].first, data[j].second, t_end, cfl, cadence, j, j));
  return trajs;
}

}  // namespace wavelab
