#pragma once

// Modified Bessel functions of real order, incomplete gamma functions and
// adaptive Gauss-Kronrod quadrature.  Everything here is a pure function of
// its arguments.

#include <functional>
#include <stdexcept>
#include <string>

namespace kreinlab::specialfn {

/// Thrown when an iterative method (quadrature, continued fraction, series)
/// does not reach the requested tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Accuracy {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_subdivisions = 2000;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Bessel functions.  Orders are restricted to [0, 2), which covers K_alpha,
// K_{alpha+1} and I_alpha for alpha in [0, 1).

/// K_nu(x) for 0 <= nu < 2 and x > 0.  Underflows to 0 beyond x ~ 745.
double bessel_k(double nu, double x);

/// e^x K_nu(x); finite for every x > 0.
double bessel_k_scaled(double nu, double x);

/// I_nu(x) for 0 <= nu < 2 and x >= 0.  Overflows beyond x ~ 709.
double bessel_i(double nu, double x);

/// e^{-x} I_nu(x).
double bessel_i_scaled(double nu, double x);

/// x^alpha K_alpha(x), continuous at 0 with value 2^{alpha-1} Gamma(alpha).
/// Requires 0 < alpha < 1.
double bessel_k_hat(double alpha, double x);

/// d/dx K_nu(x) from the three-term identity K'_nu = -(K_{nu-1} + K_{nu+1})/2.
/// Requires 0 <= nu < 1.
double bessel_k_derivative(double nu, double x);

// ---------------------------------------------------------------------------
// Gamma family.

/// Upper incomplete gamma Gamma(a, x) = int_x^inf t^{a-1} e^{-t} dt, x > 0.
/// Any real a is accepted; negative a is reduced by upward recurrence.
double upper_gamma(double a, double x);

/// Lower incomplete gamma gamma(a, x) for a > 0, x >= 0.
double lower_gamma(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a), a > 0.
double gamma_q(double a, double x);

/// Exponential integral E1(x) = Gamma(0, x), x > 0.
double exp_integral_e1(double x);

// ---------------------------------------------------------------------------
// Quadrature.

/// Change of variables applied before adaptive Gauss-Kronrod.
///  - none:      finite [a, b] as is; b = +inf through x = a + (1 - s)/s.
///  - log_left:  x = a + (b - a) e^{-u}; for integrands whose mass piles up
///               logarithmically at a (e.g. 1/(y ln^2 y)).  Needs finite b.
///  - log_right: x = a e^{u} on [a, inf), a > 0; for power-law tails.
enum class Transform { none, log_left, log_right };

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

using Integrand = std::function<double(double)>;

/// Adaptive G7/K15 quadrature over [a, b].  Throws ConvergenceError when the
/// error estimate does not fall under max(abs_tol, rel_tol |I|) within
/// max_subdivisions intervals.
QuadResult quad_detail(const Integrand& f, double a, double b,
                       const Accuracy& acc = {},
                       Transform transform = Transform::none);

inline double quad(const Integrand& f, double a, double b,
                   const Accuracy& acc = {},
                   Transform transform = Transform::none) {
  return quad_detail(f, a, b, acc, transform).value;
}

// ---------------------------------------------------------------------------
// Normal distribution helpers used by the statistics code.

double normal_cdf(double x);
double normal_quantile(double p);

}  // namespace kreinlab::specialfn
