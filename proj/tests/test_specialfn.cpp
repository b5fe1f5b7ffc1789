#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "kreinlab/specialfn.hpp"

#ifdef KREINLAB_HAVE_BOOST_MATH
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#endif

using namespace kreinlab::specialfn;
using std::numbers::pi;

namespace {

// Central differences with two Richardson levels.
template <class F>
double derivative(const F& f, double x, double h = 0.05) {
  auto central = [&](double step) { return (f(x + step) - f(x - step)) / (2 * step); };
  const double d1 = central(h);
  const double d2 = central(h / 2);
  const double d3 = central(h / 4);
  const double r1 = (4 * d2 - d1) / 3;
  const double r2 = (4 * d3 - d2) / 3;
  return (16 * r2 - r1) / 15;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// K_nu from its cosh integral by adaptive quadrature (independent of the
// trapezoid rule used by the library).
double k_oracle(double nu, double x) {
  return quad([&](double t) { 
                const double c = std::cosh(t);
                if (x * c > 800) return 0.0;
                return std::exp(-x * c) * std::cosh(nu * t); },
              0.0, INFINITY, {1e-13, 1e-300, 5000});
}

}  // namespace

TEST_CASE("bessel_k half-integer closed form") {
  CHECK(bessel_k(0.5, 1.0) == doctest::Approx(std::sqrt(pi / 2) * std::exp(-1.0)).epsilon(1e-14));
  for (double x : {0.01, 0.3, 2.0, 17.0, 40.0, 300.0}) {
    CHECK(rel(bessel_k(0.5, x), std::sqrt(pi / (2 * x)) * std::exp(-x)) < 1e-13);
    // K_{3/2}(x) = sqrt(pi/(2x)) e^{-x} (1 + 1/x)
    CHECK(rel(bessel_k(1.5, x), std::sqrt(pi / (2 * x)) * std::exp(-x) * (1 + 1 / x)) < 1e-13);
  }
}

TEST_CASE("bessel_k against the cosh integral oracle") {
  const double k0 = k_oracle(0.0, 1.0);
  CHECK(std::abs(k0 - 0.4210244382407083) < 1e-12);
  CHECK(rel(bessel_k(0.0, 1.0), k0) < 1e-12);
  for (double nu : {0.0, 0.1, 0.37, 0.5, 0.9, 1.0, 1.25, 1.99}) {
    for (double x : {1e-6, 1e-3, 0.05, 0.7, 3.0, 12.0, 24.9, 25.1, 60.0}) {
      CAPTURE(nu);
      CAPTURE(x);
      CHECK(rel(bessel_k(nu, x), k_oracle(nu, x)) < 1e-11);
    }
  }
}

#ifdef KREINLAB_HAVE_BOOST_MATH
TEST_CASE("bessel functions agree with Boost.Math") {
  for (double nu : {0.0, 0.2, 0.5, 0.75, 1.0, 1.3, 1.8}) {
    for (double x : {1e-8, 1e-4, 0.01, 0.5, 1.0, 5.0, 20.0, 26.0, 100.0, 600.0}) {
      CAPTURE(nu);
      CAPTURE(x);
      CHECK(rel(bessel_k(nu, x), boost::math::cyl_bessel_k(nu, x)) < 1e-12);
      CHECK(rel(bessel_i(nu, x), boost::math::cyl_bessel_i(nu, x)) < 1e-12);
    }
  }
}
#endif

TEST_CASE("bessel_i closed forms and values at zero") {
  CHECK(bessel_i(0.5, 1.0) == doctest::Approx(std::sqrt(2 / pi) * std::sinh(1.0)).epsilon(1e-14));
  CHECK(bessel_i(0.0, 0.0) == 1.0);
  CHECK(bessel_i(0.3, 0.0) == 0.0);
  for (double x : {0.2, 4.0, 24.0, 30.0, 250.0}) {
    CHECK(rel(bessel_i(0.5, x), std::sqrt(2 / (pi * x)) * std::sinh(x)) < 1e-13);
    CHECK(rel(bessel_i_scaled(0.5, x), std::sqrt(2 / (pi * x)) * 0.5 * (1 - std::exp(-2 * x))) < 1e-13);
  }
  CHECK(bessel_i_scaled(0.5, 5000.0) > 0.0);
}

TEST_CASE("Wronskian I K' - I' K = -1/x") {
  for (double nu : {0.0, 0.3, 0.5, 0.7, 0.95}) {
    for (double x : {0.4, 1.0, 2.5, 3.0, 7.0, 15.0}) {
      auto ik = [nu](double y) { return bessel_i(nu, y); };
      auto kk = [nu](double y) { return bessel_k(nu, y); };
      const double h = std::min(0.01, 0.025 * x);
      const double w = ik(x) * derivative(kk, x, h) - derivative(ik, x, h) * kk(x);
      CAPTURE(nu);
      CAPTURE(x);
      CHECK(std::abs(w + 1 / x) < 1e-10);
    }
  }
}

TEST_CASE("recurrence K_{nu+1} - K_{nu-1} = (2 nu / x) K_nu") {
  for (double nu : {0.05, 0.3, 0.5, 0.77, 0.99}) {
    for (double x : {0.1, 0.5, 1.0, 4.0, 10.0, 20.0}) {
      const double lhs = bessel_k(nu + 1, x) - bessel_k(1 - nu, x);  // K_{nu-1} = K_{1-nu}
      const double rhs = 2 * nu / x * bessel_k(nu, x);
      CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("K_0 derivative identity and small-argument law") {
  for (double x : {0.2, 1.0, 6.0}) {
    CHECK(rel(bessel_k_derivative(0.0, x), -bessel_k(1.0, x)) < 1e-14);
    auto kk = [](double y) { return bessel_k(0.3, y); };
    CHECK(rel(bessel_k_derivative(0.3, x), derivative(kk, x, std::min(0.05, 0.05 * x))) < 1e-9);
  }
}

TEST_CASE("small-argument law K_0(y) ~ ln(2/y)") {
  // K_0(y) = ln(2/y) - gamma_E + O(y^2 ln y); the ratio approaches 1 only
  // like 1 - gamma_E / ln(2/y), which is still 5.8% short at y = 1e-4.
  constexpr double euler = 0.57721566490153286061;
  for (double y : {1e-3, 1e-4, 1e-6, 1e-9}) {
    CHECK(std::abs(bessel_k(0.0, y) - (std::log(2 / y) - euler)) < y * y * (std::log(2 / y) + 1) + 1e-13);
  }
  CHECK(std::abs(bessel_k(0.0, 1e-4) / std::log(2e4) - (1 - euler / std::log(2e4))) < 1e-8);
  CHECK(std::abs(bessel_k(0.0, 1e-9) / std::log(2e9) - 1) < 0.03);
}

TEST_CASE("monotonicity and positivity") {
  double prev_k = INFINITY;
  double prev_i = -1;
  for (double x = 0.01; x < 40; x *= 1.3) {
    const double k = bessel_k(0.6, x);
    const double i = bessel_i(0.6, x);
    CHECK(k > 0);
    CHECK(k < prev_k);
    CHECK(i > prev_i);
    prev_k = k;
    prev_i = i;
  }
}

TEST_CASE("bessel_k_hat limit at zero") {
  CHECK(bessel_k_hat(0.5, 0.0) == doctest::Approx(std::sqrt(pi / 2)).epsilon(1e-14));
  CHECK(bessel_k_hat(0.5, 2.0) == doctest::Approx(std::sqrt(pi / 2) * std::exp(-2.0)).epsilon(1e-13));
  // x^a K_a(x) = 2^{a-1} Gamma(a) - (pi / (2 sin(pi a))) 2^{-a} x^{2a} / Gamma(1 + a) + O(x^2),
  // so the gap at x = 1e-8 is below 1e-6 only for a > 3/8.
  const double x = 1e-8;
  for (int i = 1; i <= 9; ++i) {
    const double a = 0.1 * i;
    const double limit = std::exp2(a - 1) * std::tgamma(a);
    const double gap = pi / (2 * std::sin(pi * a)) * std::exp2(-a) * std::pow(x, 2 * a) / std::tgamma(1 + a);
    CAPTURE(a);
    CHECK(bessel_k_hat(a, 0.0) == limit);
    CHECK(std::abs((limit - bessel_k_hat(a, x)) - gap) < 1e-12 + 1e-6 * gap);
    if (a > 0.375) CHECK(std::abs(bessel_k_hat(a, x) - limit) < 1e-6);
  }
  // alpha = 1/4 approaches its limit from below; at x = 1e-6 the gap is x^{1/2}
  // times an O(1) constant
  const double limit = std::exp2(-0.75) * std::tgamma(0.25);
  double prev = 0.0;
  for (double y : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8, 1e-12}) {
    const double v = bessel_k_hat(0.25, y);
    CHECK(v > prev);
    CHECK(v < limit);
    prev = v;
  }
  CHECK(rel(bessel_k_hat(0.25, 1e-12), limit) < 1e-4);
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(bessel_k(0.5, 0.0), std::domain_error);
  CHECK_THROWS_AS(bessel_k(2.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(bessel_k(-0.1, 1.0), std::domain_error);
  CHECK_THROWS_AS(bessel_i(0.5, -1.0), std::domain_error);
  CHECK_THROWS_AS(bessel_i(2.5, 1.0), std::domain_error);
  CHECK_THROWS_AS(bessel_k_hat(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(bessel_k_hat(1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(upper_gamma(0.5, 0.0), std::domain_error);
  CHECK_THROWS_AS(Accuracy({0.0, 1e-14, 10}).validate(), std::invalid_argument);
}

TEST_CASE("upper_gamma") {
  CHECK(upper_gamma(1.0, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  const double neg_half = quad([](double t) { return std::pow(t, -1.5) * std::exp(-t); }, 1.0,
                               INFINITY, {1e-13, 1e-300, 2000});
  CHECK(std::abs(neg_half - 0.1781477117815607) < 1e-12);
  CHECK(rel(upper_gamma(-0.5, 1.0), neg_half) < 1e-12);
  CHECK(rel(upper_gamma(0.5, 0.25), std::sqrt(pi) * std::erfc(0.5)) < 1e-13);
  // Gamma(0, x) = E1(x)
  const double e1 = quad([](double t) { return std::exp(-t) / t; }, 1.0, INFINITY, {1e-13, 1e-300, 2000});
  CHECK(std::abs(e1 - 0.21938393439552029) < 1e-13);
  CHECK(rel(exp_integral_e1(1.0), e1) < 1e-13);
  // the recurrence path for negative a versus direct quadrature
  for (double a : {-1.9, -1.0, -0.75, -1e-3, 0.3, 2.5}) {
    for (double x : {0.01, 0.3, 0.9, 1.5, 8.0}) {
      const double direct = quad([a](double t) { return std::exp((a - 1) * std::log(t) - t); }, x,
                                 INFINITY, {1e-12, 1e-300, 4000}, Transform::log_right);
      CAPTURE(a);
      CAPTURE(x);
      CHECK(rel(upper_gamma(a, x), direct) < 1e-10);
    }
  }
#ifdef KREINLAB_HAVE_BOOST_MATH
  for (double a : {0.2, 1.0, 4.5, 9.5}) {
    for (double x : {0.05, 1.0, 3.0, 20.0}) {
      CHECK(rel(gamma_q(a, x), boost::math::gamma_q(a, x)) < 1e-12);
      CHECK(rel(lower_gamma(a, x), boost::math::tgamma_lower(a, x)) < 1e-12);
    }
  }
#endif
}

TEST_CASE("quad examples") {
  CHECK(quad([](double) { return 1.0; }, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(quad([](double t) { return std::exp(-t); }, 0.0, INFINITY) ==
        doctest::Approx(1.0).epsilon(1e-12));
  auto loglog = [](double y) { return 1.0 / (y * std::pow(std::log(2.0 / y), 2)); };
  CHECK(std::abs(quad(loglog, 0.0, 1.0, {}, Transform::log_left) - 1 / std::log(2.0)) < 1e-10);
  // without the log map the logarithmic pile-up at 0 cannot be resolved
  CHECK_THROWS_AS(quad(loglog, 0.0, 1.0, {1e-10, 1e-14, 200}), ConvergenceError);
  // integrable algebraic endpoint singularity
  CHECK(quad([](double y) { return 1 / std::sqrt(y); }, 0.0, 4.0, {1e-10, 1e-14, 5000}) ==
        doctest::Approx(4.0).epsilon(1e-9));
  // power-law tail
  CHECK(quad([](double y) { return std::pow(y, -1.5); }, 1.0, INFINITY, {}, Transform::log_right) ==
        doctest::Approx(2.0).epsilon(1e-12));
  // both rules are exact for degree <= 13, so one panel suffices
  const auto r = quad_detail([](double x) { return std::pow(x, 12) + x; }, -1.0, 1.0);
  CHECK(r.intervals == 1);
  CHECK(r.value == doctest::Approx(2.0 / 13).epsilon(1e-14));
}

TEST_CASE("normal helpers") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(normal_cdf(-3.5)) == doctest::Approx(-3.5).epsilon(1e-12));
}
