#include "kreinlab/specialfn.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace kreinlab::specialfn {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kPi = std::numbers::pi;

void check_order(double nu, const char* who) {
  if (!(nu >= 0.0 && nu < 2.0)) {
    throw std::domain_error(std::string(who) + ": order must lie in [0, 2)");
  }
}

// Hankel asymptotic series sum_k a_k(nu) (sign)^k / x^k, truncated at the
// smallest term.  Used for x > 25 where the tail is far below eps.
double hankel_series(double nu, double x, bool alternate) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  double last = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (8.0 * k * x);
    const double mag = std::abs(term);
    if (mag > last) break;
    sum += alternate && (k % 2 == 1) ? -term : term;
    if (mag < 1e-17 * std::abs(sum)) break;
    last = mag;
  }
  return sum;
}

// e^x K_nu(x) = int_0^inf exp(-2x sinh^2(t/2)) cosh(nu t) dt.  The integrand
// is entire and decays double-exponentially, so the trapezoid rule converges
// geometrically in 1/h.
double k_scaled_integral(double nu, double x) {
  auto f = [nu, x](double t) {
    const double s = std::sinh(0.5 * t);
    const double e = -2.0 * x * s * s + nu * t;
    return std::exp(e) * 0.5 * (1.0 + std::exp(-2.0 * nu * t));
  };
  const double t_peak = std::asinh(nu / x);
  double h = 0.5 / std::max(1.0, std::sqrt(x));

  auto tail_sum = [&](double start, double step) {
    double sum = 0.0;
    for (int k = 0; k < 1000000; ++k) {
      const double t = start + k * step;
      const double v = f(t);
      sum += v;
      if (t > t_peak && v <= 1e-18 * sum) break;
    }
    return sum;
  };

  double total = h * (0.5 * f(0.0) + tail_sum(h, h));
  for (int level = 0; level < 12; ++level) {
    const double refined = 0.5 * total + 0.5 * h * tail_sum(0.5 * h, h);
    h *= 0.5;
    const bool done = std::abs(refined - total) <= 1e-13 * refined;
    total = refined;
    if (done) return total;
  }
  throw ConvergenceError("bessel_k: trapezoid refinement did not converge");
}

double k_scaled_any(double nu, double x) {
  if (x > 25.0) {
    return std::sqrt(kPi / (2.0 * x)) * hankel_series(nu, x, false);
  }
  return k_scaled_integral(nu, x);
}

// Power series for I_nu(x); every term positive.
double i_series(double nu, double x) {
  const double half = 0.5 * x;
  double term = std::exp(nu * std::log(half) - std::lgamma(nu + 1.0));
  double sum = term;
  const double q = half * half;
  for (int k = 0; k < 500; ++k) {
    term *= q / ((k + 1.0) * (k + 1.0 + nu));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

// Gamma(a, x) by the Legendre continued fraction (modified Lentz).
double upper_gamma_cf(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 4.0 * kEps) {
      return std::exp(-x + a * std::log(x)) * h;
    }
  }
  throw ConvergenceError("upper_gamma: continued fraction did not converge");
}

// gamma(a, x) by its power series, a > 0.
double lower_gamma_series(double a, double x) {
  if (x == 0.0) return 0.0;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) {
      return sum * std::exp(-x + a * std::log(x));
    }
  }
  throw ConvergenceError("lower_gamma: series did not converge");
}

double e1_series(double x) {
  constexpr double euler = 0.57721566490153286061;
  double sum = 0.0;
  double term = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= -x / k;
    const double add = -term / k;
    sum += add;
    if (std::abs(add) < kEps * std::abs(sum)) break;
  }
  return -euler - std::log(x) + sum;
}

}  // namespace

void Accuracy::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || max_subdivisions < 1) {
    throw std::invalid_argument(
        "Accuracy: tolerances must be positive and max_subdivisions >= 1");
  }
}

double bessel_k_scaled(double nu, double x) {
  check_order(nu, "bessel_k");
  if (!(x > 0.0)) throw std::domain_error("bessel_k: x must be positive");
  return k_scaled_any(nu, x);
}

double bessel_k(double nu, double x) {
  const double scaled = bessel_k_scaled(nu, x);
  return x > 745.0 ? 0.0 : std::exp(-x) * scaled;
}

double bessel_i_scaled(double nu, double x) {
  check_order(nu, "bessel_i");
  if (!(x >= 0.0)) throw std::domain_error("bessel_i: x must be nonnegative");
  if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  if (x > 25.0) {
    return hankel_series(nu, x, true) / std::sqrt(2.0 * kPi * x);
  }
  return std::exp(-x) * i_series(nu, x);
}

double bessel_i(double nu, double x) {
  check_order(nu, "bessel_i");
  if (!(x >= 0.0)) throw std::domain_error("bessel_i: x must be nonnegative");
  if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  if (x > 25.0) {
    if (x > 709.0) return std::numeric_limits<double>::infinity();
    return std::exp(x) * bessel_i_scaled(nu, x);
  }
  return i_series(nu, x);
}

double bessel_k_hat(double alpha, double x) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("bessel_k_hat: alpha must lie in (0, 1)");
  }
  if (!(x >= 0.0)) throw std::domain_error("bessel_k_hat: x must be >= 0");
  if (x == 0.0) return std::exp2(alpha - 1.0) * std::tgamma(alpha);
  if (x > 745.0) return 0.0;
  return std::exp(alpha * std::log(x) - x) * k_scaled_any(alpha, x);
}

double bessel_k_derivative(double nu, double x) {
  if (!(nu >= 0.0 && nu < 1.0)) {
    throw std::domain_error("bessel_k_derivative: order must lie in [0, 1)");
  }
  if (!(x > 0.0)) throw std::domain_error("bessel_k_derivative: x must be > 0");
  return -0.5 * (bessel_k(1.0 - nu, x) + bessel_k(nu + 1.0, x));
}

double upper_gamma(double a, double x) {
  if (!(x > 0.0) || !std::isfinite(x) || !std::isfinite(a)) {
    throw std::domain_error("upper_gamma: x must be positive and finite");
  }
  if (x >= 1.0 && x >= a + 1.0) return upper_gamma_cf(a, x);
  if (a > 0.0) return std::tgamma(a) - lower_gamma_series(a, x);
  if (a == 0.0) return e1_series(x);
  // Gamma(a, x) = (Gamma(a + 1, x) - x^a e^{-x}) / a
  return (upper_gamma(a + 1.0, x) - std::exp(a * std::log(x) - x)) / a;
}

double lower_gamma(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    throw std::domain_error("lower_gamma: needs a > 0 and x >= 0");
  }
  if (x < a + 1.0) return lower_gamma_series(a, x);
  return std::tgamma(a) - upper_gamma_cf(a, x);
}

double gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    throw std::domain_error("gamma_q: needs a > 0 and x >= 0");
  }
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) {
    return 1.0 - lower_gamma_series(a, x) / std::tgamma(a);
  }
  return std::exp(std::log(upper_gamma_cf(a, x)) - std::lgamma(a));
}

double exp_integral_e1(double x) {
  if (!(x > 0.0)) throw std::domain_error("exp_integral_e1: x must be > 0");
  return upper_gamma(0.0, x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("normal_quantile: p must lie in (0, 1)");
  }
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < p ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  // one Newton polish on the bisection result
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
  if (pdf > 0.0) x -= (normal_cdf(x) - p) / pdf;
  return x;
}

}  // namespace kreinlab::specialfn
