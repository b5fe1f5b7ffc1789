#pragma once

// Excursions of BES(-alpha, beta down) away from 0 under the Ito measure
//   n(V in dv) = 2^alpha Gamma(alpha + 1) v^{-alpha-1} e^{-beta v} dv,
// restricted to lifetimes V >= v0 so that the restriction is a finite
// measure.  Given V, the excursion is a Bessel bridge of dimension
// 2 + 2 alpha from 0 to 0 over [0, V].
//
// Bridges are built from a BESQ process Y started at 0 by time inversion,
//   X_s = V (1 - s/V)^2 Y((s/V) / (1 - s/V)),   R = sqrt(X),
// with exact noncentral chi-square steps for Y (Poisson mixture of Gammas);
// this is exact for every dimension.  For dimensions 2 and 3 the norm of a
// Brownian bridge in R^d is available as an independent construction.

#include <cstdint>
#include <vector>

#include "kreinlab/levy.hpp"
#include "kreinlab/mc.hpp"
#include "kreinlab/rng.hpp"

namespace kreinlab::excursion {

struct TruncatedItoConfig {
  double alpha = 0.5;
  double beta = 0.5;
  double v0 = 0.01;
  double dt = 1e-4;          ///< bridge grid step
  int min_steps = 64;        ///< at least this many steps per bridge

  void validate() const;
  levy::LevySpec lifetime_spec() const { return levy::LevySpec::make(alpha, beta); }
  double dimension() const { return 2.0 + 2.0 * alpha; }
};

enum class BridgeMethod { besq, gaussian };

struct ExcursionSample {
  double lifetime = 0.0;
  double dt = 0.0;              ///< grid step, lifetime / (bridge.size() - 1)
  std::vector<double> bridge;   ///< R at the grid points, bridge[0] = bridge.back() = 0
  double maximum = 0.0;         ///< max over the grid
};

/// n(V >= v0).
double lifetime_tail_mass(const TruncatedItoConfig& cfg);

/// n(V >= v) / n(V >= v0) for v >= v0.
double lifetime_survival(const TruncatedItoConfig& cfg, double v);

/// Bessel bridge of dimension `dim` from 0 to 0 over [0, length] with n
/// steps.  BridgeMethod::gaussian needs an integer dimension.
std::vector<double> bessel_bridge(double dim, double length, int n, Rng& rng,
                                  BridgeMethod method = BridgeMethod::besq);

/// Number of grid steps used for a bridge of the given lifetime (even).
int bridge_steps(const TruncatedItoConfig& cfg, double lifetime);

ExcursionSample sample_excursion(const TruncatedItoConfig& cfg, Rng& rng,
                                 BridgeMethod method = BridgeMethod::besq);

/// P(sup of the bridge >= x) given the grid values, with the Brownian-bridge
/// crossing probability exp(-2(x - a)(x - b)/dt) between nodes below x.
double crossing_probability(const std::vector<double>& bridge, double dt, double x, int stride = 1);

/// n(M >= x) = 2 (2 beta)^alpha K_alpha(z) / I_alpha(z), z = sqrt(2 beta) x.
double ito_max_tail(double alpha, double beta, double x);

/// The beta -> 0 limit 2^{2 alpha} Gamma(alpha) Gamma(alpha + 1) x^{-2 alpha}, alpha > 0.
double ito_max_tail_limit(double alpha, double x);

/// Density of n(M in dy) = 2 (2 beta)^alpha / (y I_alpha(sqrt(2 beta) y)^2).
double ito_max_density(double alpha, double beta, double y);

/// Upper bound on n(M >= x, V < v0) from P(sup |b| >= x) <= 2d exp(-2x^2/(d v))
/// for a d-dimensional Brownian bridge of length v, d = ceil(dim).
double truncation_allowance(const TruncatedItoConfig& cfg, double x);

struct MaxLawRow {
  double x = 0.0;
  mc::McEstimate tail;           ///< n(M >= x, V >= v0) estimate vs n(M >= x)
  double coarse_shift = 0.0;     ///< estimate on every second grid point minus the full grid
  double truncation = 0.0;       ///< truncation_allowance
  double allowance = 0.0;        ///< |coarse_shift| + truncation
  double z_adjusted = 0.0;       ///< z after shrinking |value - analytic| by the allowance
};

struct MaxLawReport {
  double tail_mass = 0.0;
  std::uint64_t n = 0;
  std::vector<MaxLawRow> rows;
};

struct MaxLawOptions {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  BridgeMethod method = BridgeMethod::besq;
};

MaxLawReport verify_max_law(const TruncatedItoConfig& cfg, const std::vector<double>& x_grid, std::uint64_t n,
                            const MaxLawOptions& opt = {});

/// Chi-square goodness of fit of lifetimes against the truncated density,
/// equiprobable bins; returns the p-value.
double lifetime_chi_square_pvalue(const TruncatedItoConfig& cfg, const std::vector<double>& lifetimes, int bins = 20);

struct GigRow {
  double gamma = 0.0;
  double quadrature = 0.0;
  double analytic = 0.0;
  double rel_error = 0.0;
};

struct GigReport {
  double normalization = 0.0;
  double normalization_error = 0.0;
  std::vector<GigRow> rows;
  double max_rel_error = 0.0;
};

GigReport gig_hitting_check(double x0, double beta, const std::vector<double>& gamma_grid);

}  // namespace kreinlab::excursion
