#pragma once

// Brownian paths with local time at 0, inverse local time and additive
// functionals.
//
// Local time uses the occupation-density (Tanaka) normalization:
// int_0^t f(B_s) ds = int f(a) L^a_t da, so that E exp(-lambda tau_t) =
// exp(-t sqrt(2 lambda)).  Two grid estimators are available.  `bridge`
// draws the local time of the Brownian bridge between consecutive grid
// points exactly: given B_0 = x, B_dt = y,
//   P(L_dt > l) = exp(-((|x| + |y| + l)^2 - (x - y)^2) / (2 dt)).
// `band` is the occupation estimator |{s : |B_s| <= eps}| / (2 eps) with
// eps = c sqrt(dt), evaluated by the trapezoid rule on the grid.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "kreinlab/mc.hpp"
#include "kreinlab/rng.hpp"

namespace kreinlab::pathsim {

enum class LocalTimeEstimator { bridge, band };

struct LocalTimeOptions {
  LocalTimeEstimator estimator = LocalTimeEstimator::bridge;
  double band_c = 2.0;  ///< band half-width eps = band_c sqrt(dt)
};

/// Local time at 0 picked up on one grid step from x to y.
inline double bridge_local_time(double x, double y, double dt, Rng& rng) {
  const double d = x - y;
  const double r = std::sqrt(d * d - 2.0 * dt * std::log(rng.uniform_pos()));
  return std::max(0.0, r - std::abs(x) - std::abs(y));
}

inline double band_local_time(double x, double y, double dt, double eps) {
  const double in = (std::abs(x) <= eps ? 0.5 : 0.0) + (std::abs(y) <= eps ? 0.5 : 0.0);
  return in * dt / (2.0 * eps);
}

// ---------------------------------------------------------------------------
// Stored paths on a uniform grid.

struct Path {
  double dt = 0.0;
  std::vector<double> values;      ///< B at k dt, values[0] = 0
  std::vector<double> local_time;  ///< L_0 at k dt, nondecreasing

  std::size_t steps() const { return values.empty() ? 0 : values.size() - 1; }
  double horizon() const { return dt * static_cast<double>(steps()); }
};

Path simulate_path(double horizon, double dt, Rng& rng, const LocalTimeOptions& lt = {});

/// First grid time with local_time >= level, or nullopt if the path ends
/// first.  Level 0 gives time 0.
std::optional<double> inverse_local_time(const Path& path, double level);

enum class StopKind { inverse_local_time, fixed_time };

struct FunctionalSpec {
  std::function<double(double)> integrand;
  StopKind stop = StopKind::fixed_time;
  double stop_value = 1.0;  ///< local-time level or time T
  bool use_abs = true;      ///< integrate phi(|B|) rather than phi(B)
};

/// Trapezoidal int_0^stop phi(|B_u|) du on the stored grid; nullopt when the
/// stop time lies beyond the path.
std::optional<double> additive_functional(const Path& path, const FunctionalSpec& spec);

// ---------------------------------------------------------------------------
// Streaming walks to an inverse local time.  Nothing is stored: a visitor
// sees each step and accumulates whatever functionals it needs.
//
// Steps adapt to the distance from 0: dt = max(dt0, (eta |B|)^2).  The grid
// times are stopping times, so B stays exactly Gaussian on the grid; away
// from 0 the trapezoid error of a smooth f is O(eta^4) per unit time
// relative to f.  Local time uses the bridge estimator (band with dt0 in the
// band mode).

struct WalkOptions {
  double dt = 1e-4;       ///< step near 0
  double eta = 0.05;      ///< relative step |dB| / |B| away from 0, 0 for uniform steps
  double horizon = 1e8;   ///< give up (not reached) past this time
  std::uint64_t max_steps = 200'000'000;
  LocalTimeOptions local_time;

  void validate() const;
};

struct Step {
  double x0;
  double x1;
  double dt;
  double dl;  ///< local time gained on the step
};

struct WalkResult {
  bool reached = false;
  double tau = 0.0;         ///< grid time at which local time first reaches the level
  double local_time = 0.0;  ///< local time at stop (>= level when reached)
  std::uint64_t steps = 0;
};

template <class Visitor>
WalkResult walk_to_local_time(double level, const WalkOptions& opt, Rng& rng, Visitor&& visit) {
  WalkResult r;
  if (!(level > 0.0)) {
    r.reached = true;
    return r;
  }
  const double eta2 = opt.eta * opt.eta;
  const bool bridge = opt.local_time.estimator == LocalTimeEstimator::bridge;
  const double eps = opt.local_time.band_c * std::sqrt(opt.dt);
  double x = 0.0;
  double t = 0.0;
  double l = 0.0;
  while (t < opt.horizon && r.steps < opt.max_steps) {
    const double dt = std::max(opt.dt, eta2 * x * x);
    const double y = x + std::sqrt(dt) * rng.normal();
    double dl = 0.0;
    if (bridge) {
      dl = bridge_local_time(x, y, dt, rng);
    } else {
      dl = band_local_time(x, y, dt, eps);
    }
    visit(Step{x, y, dt, dl});
    t += dt;
    l += dl;
    x = y;
    ++r.steps;
    if (l >= level) {
      r.reached = true;
      break;
    }
  }
  r.tau = t;
  r.local_time = l;
  return r;
}

/// Integrand max(|x|, floor)^p for a power p > -1.  For p < 0 the floored
/// value understates the integral over {|B| < floor}; compensation(dL) adds
/// the difference between int_{-floor}^{floor} |a|^p da dL =
/// 2 floor^{p+1} dL / (p + 1) and what the floor contributes, 2 floor^{p+1} dL.
struct PowerIntegrand {
  double p = 0.0;
  double floor = 0.0;

  double operator()(double x) const {
    if (p == 0.0) return 1.0;
    return std::pow(std::max(std::abs(x), floor), p);
  }
  double compensation(double dl) const {
    if (p >= 0.0 || floor == 0.0) return 0.0;
    return dl * 2.0 * std::pow(floor, p + 1.0) * (1.0 / (p + 1.0) - 1.0);
  }
};

/// Default singular floor dt^{0.4} / 4.  With the compensation the floor
/// bias is roughly linear in the floor; a quarter of dt^{0.4} puts it below
/// the Monte Carlo error at 1e4-1e5 paths for dt = 1e-4.
inline double default_floor(double dt) { return 0.25 * std::pow(dt, 0.4); }

/// Trapezoid integral of f(|B|) up to tau_level plus the stop outcome.
template <class F>
std::pair<WalkResult, double> functional_at_local_time(double level, const WalkOptions& opt, Rng& rng, const F& f) {
  double acc = 0.0;
  auto r = walk_to_local_time(level, opt, rng, [&](const Step& s) {
    acc += 0.5 * (f(std::abs(s.x0)) + f(std::abs(s.x1))) * s.dt;
  });
  return {r, acc};
}

// ---------------------------------------------------------------------------
// The alpha = 1/2 first-passage reduction: int_0^{tau_l} (1 + 2|B|)^{-2} dr
// is the first passage time of unit-drift BM to l (inverse Gaussian with
// mean l and shape l^2).

struct FirstPassageOptions {
  WalkOptions walk;
  double direct_dt = 1e-4;  ///< step of the direct drifted-BM simulation
  double direct_horizon = 1e4;
  unsigned threads = 0;
  std::uint64_t seed = 1;
};

struct FirstPassageReport {
  std::vector<double> functional;  ///< reached paths only
  std::vector<double> direct;
  std::uint64_t functional_not_reached = 0;
  std::uint64_t direct_not_reached = 0;
  mc::McEstimate functional_laplace;  ///< E exp(-(lambda^2/2) T) vs exp(-l(sqrt(lambda^2+1)-1))
  mc::McEstimate direct_laplace;
  mc::McEstimate direct_mean;         ///< vs l
};

/// First passage of x_t = B_t + t to level l with a Brownian-bridge crossing
/// test between grid points; returns nullopt past the horizon.
std::optional<double> drifted_first_passage(double l, double dt, double horizon, Rng& rng);

/// Inverse Gaussian cdf with mean mu and shape lambda.
double inverse_gaussian_cdf(double x, double mu, double shape);

FirstPassageReport first_passage_check(double l, double lambda, std::uint64_t n, const FirstPassageOptions& opt = {});

// ---------------------------------------------------------------------------
// Symmetric splice: phi(x) = phi1(x) for x > 0 and -phi2(-x) for x < 0.

std::function<double(double)> symmetric_splice(std::function<double(double)> phi1,
                                               std::function<double(double)> phi2);

struct SpliceSample {
  bool reached = false;
  double positive = 0.0;  ///< int phi1(B) 1{B > 0} ds
  double negative = 0.0;  ///< int phi2(-B) 1{B < 0} ds
  double clock_positive = 0.0;
  double clock_negative = 0.0;
  double value() const { return positive - negative; }
};

/// One path to tau_level with both one-sided functionals and occupation
/// clocks.  With level 2t the two sides are the independent S_1(t), S_2(t).
template <class F1, class F2>
SpliceSample splice_at_local_time(double level, const WalkOptions& opt, Rng& rng, const F1& phi1, const F2& phi2) {
  SpliceSample out;
  auto r = walk_to_local_time(level, opt, rng, [&](const Step& s) {
    const double w = 0.5 * s.dt;
    for (double x : {s.x0, s.x1}) {
      if (x > 0.0) {
        out.positive += w * phi1(x);
        out.clock_positive += w;
      } else if (x < 0.0) {
        out.negative += w * phi2(-x);
        out.clock_negative += w;
      } else {
        out.clock_positive += 0.5 * w;
        out.clock_negative += 0.5 * w;
      }
    }
  });
  out.reached = r.reached;
  return out;
}

}  // namespace kreinlab::pathsim
