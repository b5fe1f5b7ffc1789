#pragma once

// Scale functions, speed densities, drifts and hitting-time transforms of
// the Bessel-type diffusions BES(-alpha, beta down), and the h-functions that
// turn Brownian additive functionals into tempered stable and Gamma
// subordinators.
//
// Conventions.  theta = sqrt(2 beta).  The unscaled scale function is
//   s_alpha(z) = int_0^z dy / (y K_alpha(y)^2)
// (G when alpha = 0).  The diffusion with parameter beta > 0 uses
// s_{alpha,beta}(x) = s_alpha(theta x); for beta = 0 it is x^{2 alpha}/(2 alpha).

#include <cmath>
#include <memory>
#include <vector>

#include "kreinlab/levy.hpp"
#include "kreinlab/specialfn.hpp"

namespace kreinlab::krein {

struct DiffusionSpec {
  double alpha = 0.0;
  double beta = 1.0;
  double theta = std::sqrt(2.0);

  static DiffusionSpec make(double alpha, double beta);
  void validate() const;
};

// ---------------------------------------------------------------------------
// Scale functions.

/// d/dz s_alpha(z) = 1 / (z K_alpha(z)^2).
double scale_density(double alpha, double z);

/// s_alpha(z) by adaptive quadrature of the defining integral; s(0) = 0.
double scale_function(double alpha, double z, const specialfn::Accuracy& acc = {});

/// s_{alpha,beta}(x) for the diffusion spec (see the conventions above).
double scale_function(const DiffusionSpec& spec, double x, const specialfn::Accuracy& acc = {});

/// s'_{alpha,beta}(x) and s''_{alpha,beta}(x), both in closed form.
double scale_derivative(const DiffusionSpec& spec, double x);
double scale_second_derivative(const DiffusionSpec& spec, double x);

/// Monotone table of (z, s_alpha(z)) on a geometric grid.  Values between
/// nodes come from quadrature anchored at the nearest node below, so value()
/// and inverse() carry the quadrature accuracy rather than interpolation
/// error.  interpolate() is the cubic Hermite interpolant of ln s against
/// ln z on the same nodes.
class ScaleTable {
 public:
  /// Grid from z_min (chosen so that the power-law regime near 0 is resolved)
  /// to z_max with `per_unit` nodes per unit of ln z above z = 1e-3.
  ScaleTable(double alpha, double z_max = 40.0, int per_unit = 20,
             const specialfn::Accuracy& acc = {1e-13, 1e-300, 2000});

  double alpha() const { return alpha_; }
  double z_max() const { return z_.back(); }
  double s_max() const { return s_.back(); }
  const std::vector<double>& nodes() const { return z_; }
  const std::vector<double>& values() const { return s_; }

  double value(double z) const;
  double interpolate(double z) const;

  /// z with s_alpha(z) = s.  Throws std::out_of_range for s outside [0, s_max].
  double inverse(double s) const;

  /// ln of inverse(s); stays finite where the inverse underflows.
  double inverse_log(double s) const;

  /// max |interpolate - value| / value over interval midpoints
  double max_interpolation_error() const;

  /// Same domain with every interval halved.
  ScaleTable refined() const;

 private:
  ScaleTable(double alpha, std::vector<double> z, const specialfn::Accuracy& acc);
  void fill();
  std::size_t bracket_z(double z) const;
  double integrate(double a, double b) const;

  double alpha_;
  specialfn::Accuracy acc_;
  std::vector<double> z_;
  std::vector<double> s_;
};

/// table.inverse(s)
double scale_inverse(const ScaleTable& table, double s);

/// Process-wide cached table for alpha (built on first use, thread-safe).
std::shared_ptr<const ScaleTable> shared_scale_table(double alpha);

// ---------------------------------------------------------------------------
// h-functions.

/// h_alpha(x) = 2 z^2 K_alpha(z)^4 with z = s_alpha^{-1}(2x).  Evaluated
/// exactly (no interpolation) through the shared scale table.
double h_function(double alpha, double x);

/// d ln h / d ln x at x, in closed form given z.
double h_log_slope(double alpha, double x);

/// Law of int_0^{tau_t} h_alpha(|B_r|) dr: the subordinator with
/// alpha, beta = 1 and c = Gamma(1 + alpha), i.e.
/// psi(l) = (pi / sin(pi alpha)) ((1 + l)^alpha - 1), and ln(1 + l) at alpha = 0.
levy::LevySpec h_functional_spec(double alpha);

/// Fast evaluator of h_alpha for simulation hot loops: cubic Hermite in
/// (ln x, ln h) on a uniform ln x grid with exact slopes, log-linear
/// extrapolation outside [x_min, x_max].  For alpha = 0, h vanishes faster
/// than any power at 0 and is returned as 0 below x_min.
class HFunction {
 public:
  explicit HFunction(double alpha, double step = 0.01, double x_max = 1e12);

  double operator()(double x) const {
    if (!(x > 0.0)) return h0_;
    const double u = std::log(x);
    double r = (u - u0_) * inv_step_;
    if (r < 0.0) {
      if (alpha_ == 0.0) return 0.0;
      return std::exp(lh_.front() + slope_.front() * (u - u0_));
    }
    const auto n = lh_.size() - 1;
    if (r >= static_cast<double>(n)) {
      return std::exp(lh_.back() + slope_.back() * (u - u0_ - static_cast<double>(n) * step_));
    }
    const auto i = static_cast<std::size_t>(r);
    const double t = r - static_cast<double>(i);
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double v = (2 * t3 - 3 * t2 + 1) * lh_[i] + (t3 - 2 * t2 + t) * step_ * slope_[i] +
                     (-2 * t3 + 3 * t2) * lh_[i + 1] + (t3 - t2) * step_ * slope_[i + 1];
    return std::exp(v);
  }

  double alpha() const { return alpha_; }
  double x_min() const { return std::exp(u0_); }
  double x_max() const { return std::exp(u0_ + step_ * static_cast<double>(lh_.size() - 1)); }
  /// h(0): pi^2/2 at alpha = 1/2, 0 for alpha < 1/2, +inf for alpha > 1/2
  double at_zero() const { return h0_; }

 private:
  double alpha_;
  double step_;
  double inv_step_;
  double u0_;
  double h0_;
  std::vector<double> lh_;
  std::vector<double> slope_;
};

// ---------------------------------------------------------------------------
// Generator, speed, hitting times.

/// Drift b(x) of the generator (1/2) d^2/dx^2 + b(x) d/dx.
double drift_coefficient(const DiffusionSpec& spec, double x);

/// Speed density m'(x) = 2 / s'(x): 2 x K_alpha(theta x)^2 for beta > 0
/// (2 x K_0(theta x)^2 at alpha = 0), 2 x^{1 - 2 alpha} for beta = 0.
double speed_density(const DiffusionSpec& spec, double x);

/// E_x exp(-a T_0).
double phi_down(const DiffusionSpec& spec, double a, double x);

/// Density in t of the hitting time of 0 by BES(0, beta down) from x0,
/// exp(-(x0^2/t + 2 beta t)/2) / (2 t K_0(x0 sqrt(2 beta))).
double gig_hitting_density(double x0, double beta, double t);

/// int_0^inf e^{-gamma t} gig_hitting_density dt by quadrature.
double gig_laplace_by_quadrature(double x0, double beta, double gamma, double rel_tol = 1e-12);

// ---------------------------------------------------------------------------
// Stable representation constants.

/// c_alpha = pi / (alpha sin(pi alpha)) (alpha^alpha / Gamma(alpha))^2, for
/// E exp(-(l/2) A_alpha(tau_t)) = exp(-t c_alpha l^alpha).
double representation_constant(double alpha);

/// Gamma(alpha)^2 / alpha^{2 alpha - 1}: the local-time rescaling that turns
/// A_alpha(tau_.) into the stable subordinator with the excursion normalization.
double representation_time_scale(double alpha);

}  // namespace kreinlab::krein
