#pragma once

#include <wavelab/types.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace wavelab {

struct LinearFit {
  Scalar slope = 0, intercept = 0, rms_residual = 0;
  int n_points = 0;
};

/// Ordinary least squares y ~ intercept + slope*x.
inline LinearFit linear_fit(const std::vector<Scalar>& x, const std::vector<Scalar>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("linear_fit: need >= 2 matching points");
  const Scalar n = Scalar(x.size());
  Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const Scalar det = n * sxx - sx * sx;
  if (!(std::abs(det) > 0)) throw std::invalid_argument("linear_fit: degenerate abscissae");
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / n;
  f.n_points = int(x.size());
  Scalar ss = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const Scalar e = y[i] - (f.intercept + f.slope * x[i]);
    ss += e * e;
  }
  f.rms_residual = std::sqrt(ss / n);
  return f;
}

struct DecayFit {
  Scalar rate = 0;       // fitted decay exponent (= -slope in log-log)
  Scalar slope = 0, intercept = 0, rms_residual = 0;
  Scalar t_lo = 0, t_hi = 0;
  int n_points = 0;
};

/// Log-log least squares of a positive series over the window [t_lo, t_hi].
/// Rejects nonpositive values (listing the offending times) and windows holding
/// fewer than 8 samples.
inline DecayFit fit_decay_rate(const std::vector<Scalar>& t, const std::vector<Scalar>& value,
                               Scalar t_lo, Scalar t_hi) {
  if (t.size() != value.size()) throw std::invalid_argument("fit_decay_rate: size mismatch");
  if (!(t_lo > 0 && t_hi > t_lo)) throw std::invalid_argument("fit_decay_rate: bad window");
  std::vector<Scalar> lx, ly;
  std::string bad;
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!(value[i] > 0)) {
      bad += (bad.empty() ? "" : ", ") + std::to_string(t[i]);
      continue;
    }
    lx.push_back(std::log(t[i]));
    ly.push_back(std::log(value[i]));
  }
  if (!bad.empty())
    throw std::invalid_argument("fit_decay_rate: nonpositive values at t = " + bad);
  if (lx.size() < 8)
    throw std::invalid_argument("fit_decay_rate: window holds " + std::to_string(lx.size()) +
                                " points, need >= 8");
  const LinearFit lf = linear_fit(lx, ly);
  DecayFit f;
  f.slope = lf.slope;
  f.intercept = lf.intercept;
  f.rms_residual = lf.rms_residual;
  f.rate = -lf.slope;
  f.t_lo = t_lo;
  f.t_hi = t_hi;
  f.n_points = lf.n_points;
  return f;
}

enum class Direction { AtLeastAsFast, TwoSided };

struct ComparisonVerdict {
  std::string quantity;
  Scalar fitted = 0, predicted = 0, margin = 0;
  Direction direction = Direction::AtLeastAsFast;
  bool pass = false;
  std::string note;
};

inline ComparisonVerdict compare_to_theory(const std::string& quantity, Scalar fitted_rate,
                                           Scalar predicted_rate, Direction dir, Scalar margin) {
  if (!(margin >= 0)) throw std::invalid_argument("compare_to_theory: margin >= 0 required");
  ComparisonVerdict v;
  v.quantity = quantity;
  v.fitted = fitted_rate;
  v.predicted = predicted_rate;
  v.margin = margin;
  v.direction = dir;
  v.pass = dir == Direction::AtLeastAsFast ? fitted_rate >= predicted_rate - margin
                                           : std::abs(fitted_rate - predicted_rate) <= margin;
  return v;
}

}  // namespace wavelab
