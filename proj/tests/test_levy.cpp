#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "kreinlab/levy.hpp"
#include "kreinlab/mc.hpp"
#include "kreinlab/specialfn.hpp"

using namespace kreinlab;
using namespace kreinlab::levy;
using std::numbers::pi;

namespace {

LevySpec unit(double a, double b) { return LevySpec::make(a, b, PsiNormalization::unit); }
LevySpec exc(double a, double b) { return LevySpec::make(a, b); }

// -(1/t) ln(mean e^{-lambda X}) with a delta-method SE
struct LogLaplace {
  double value;
  double se;
};
LogLaplace log_laplace(const std::vector<double>& xs, double lambda, double t) {
  const auto e = mc::empirical_laplace(xs, lambda);
  return {-std::log(e.value) / t, e.std_error / (e.value * t)};
}

}  // namespace

TEST_CASE("spec validation and normalization") {
  CHECK_THROWS_AS(LevySpec::make(0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(LevySpec::make(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(LevySpec::make(-0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(LevySpec::make(0.5, -1.0), std::invalid_argument);
  CHECK_THROWS_AS((LevySpec{0.5, 0.0, 0.0}).validate(), std::invalid_argument);
  CHECK(exc(0.5, 0).c == doctest::Approx(std::sqrt(2.0) * std::sqrt(pi) / 2).epsilon(1e-15));
  CHECK(exc(0.0, 1).c == 1.0);
  CHECK(unit(0.7, 1).c == 1.0);
}

TEST_CASE("levy_density") {
  CHECK(levy_density(unit(0.0, 1.0), 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(levy_density(unit(0.5, 0.0), 4.0) == doctest::Approx(0.125).epsilon(1e-15));
  const auto s = unit(0.3, 0.4);
  for (double y : {0.01, 1.0, 7.0}) {
    CHECK(levy_density(esscher(s, 1.3), y) / levy_density(s, y) == doctest::Approx(std::exp(-1.3 * y)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(levy_density(s, 0.0), std::domain_error);
}

TEST_CASE("laplace_exponent examples") {
  CHECK(laplace_exponent(exc(0.5, 0.0), 1.0) == doctest::Approx(std::sqrt(2.0) * pi).epsilon(1e-14));
  CHECK(laplace_exponent(exc(0.0, 1.0), 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(laplace_exponent(exc(0.3, 0.7), 0.0) == 0.0);
  // excursion normalization: 2^a (pi / sin(pi a)) [(lambda + beta)^a - beta^a]
  for (double a : {0.1, 0.5, 0.75, 0.95}) {
    for (double b : {0.0, 0.5, 2.0}) {
      for (double l : {0.01, 1.0, 30.0}) {
        const double expect = std::exp2(a) * pi / std::sin(pi * a) * (std::pow(l + b, a) - std::pow(b, a));
        CHECK(laplace_exponent(exc(a, b), l) == doctest::Approx(expect).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("Levy-Khintchine quadrature matches the closed form to 1e-8") {
  for (double a : {0.0, 0.05, 0.3, 0.5, 0.75, 0.9}) {
    for (double b : {0.0, 0.2, 1.0, 5.0}) {
      if (a == 0.0 && b == 0.0) continue;
      for (double l : {0.1, 0.5, 1.0, 2.0, 10.0}) {
        const auto s = exc(a, b);
        CAPTURE(a);
        CAPTURE(b);
        CAPTURE(l);
        CHECK(std::abs(laplace_exponent_by_quadrature(s, l) / laplace_exponent(s, l) - 1) < 1e-8);
      }
    }
  }
}

TEST_CASE("psi is increasing and concave") {
  for (const auto& s : {exc(0.0, 1.0), exc(0.5, 0.0), exc(0.75, 2.0)}) {
    double prev = 0.0;
    double prev_slope = INFINITY;
    for (double l = 0.1; l < 50; l += 0.1) {
      const double v = laplace_exponent(s, l);
      const double slope = (v - prev) / 0.1;
      CHECK(v > prev);
      CHECK(slope < prev_slope);
      prev = v;
      prev_slope = slope;
    }
  }
}

TEST_CASE("alpha -> 0 continuity") {
  for (double b : {0.5, 1.0, 3.0}) {
    for (double l : {0.5, 1.0, 4.0}) {
      const double near = laplace_exponent(exc(1e-3, b), l);
      CHECK(std::abs(near / std::log1p(l / b) - 1) < 1e-2);
    }
  }
}

TEST_CASE("esscher") {
  const auto s = exc(0.5, 0.0);
  const auto t = esscher(s, 1.0);
  CHECK(t.alpha == 0.5);
  CHECK(t.beta == 1.0);
  CHECK(t.c == s.c);
  const auto u = exc(0.3, 0.7);
  const double a = 1.1;
  const double l = 2.0;
  const double gap = laplace_exponent(esscher(u, a), l) - (laplace_exponent(u, l + a) - laplace_exponent(u, a));
  CHECK(std::abs(gap) < 1e-12);
  CHECK(esscher(esscher(u, 0.25), 0.5) == esscher(u, 0.75));
  const auto g = esscher(exc(0.0, 1.0), 1.0);
  for (double x : {0.3, 1.0, 5.0}) CHECK(laplace_exponent(g, x) == doctest::Approx(std::log1p(x / 2)).epsilon(1e-15));
  CHECK_THROWS_AS(esscher(u, 0.0), std::domain_error);
}

TEST_CASE("tail and small-jump mass against quadrature") {
  using specialfn::quad;
  using specialfn::Transform;
  CHECK(levy_tail(unit(0.0, 1.0), 1.0) == doctest::Approx(0.21938393439552029).epsilon(1e-13));
  CHECK(levy_tail(unit(0.5, 0.0), 0.04) == doctest::Approx(2 / 0.2).epsilon(1e-14));
  for (const auto& s : {unit(0.0, 2.0), unit(0.4, 0.3), exc(0.75, 1.0), exc(0.5, 0.0)}) {
    for (double eps : {1e-3, 0.1, 2.0}) {
      const double tail = quad([&](double y) { return levy_density(s, y); }, eps, INFINITY, {1e-12, 1e-300, 4000},
                               Transform::log_right);
      const double small = quad([&](double y) { return s.c * std::exp(-s.beta * y - s.alpha * std::log(y)); }, 0.0, eps, {1e-12, 1e-300, 4000},
                                Transform::log_left);
      CHECK(levy_tail(s, eps) == doctest::Approx(tail).epsilon(1e-10));
      CHECK(small_jump_mean(s, eps) == doctest::Approx(small).epsilon(1e-10));
    }
  }
}

TEST_CASE("Gamma sampler moments") {
  Rng rng(11, 1, 0);
  const auto s = exc(0.0, 1.0);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = sample_increment(s, 2.0, rng);
  const auto m = mc::mean_estimate(xs);
  CHECK(std::abs(m.value - 2.0) < 3 * m.std_error);
}

TEST_CASE("stable sampler Laplace transform") {
  Rng rng(12, 1, 0);
  const auto s = exc(0.5, 0.0);
  const double t = 0.1;
  std::vector<double> xs(100000);
  for (auto& x : xs) x = sample_increment(s, t, rng);
  auto e = mc::empirical_laplace(xs, 1.0);
  e.compare(std::exp(-t * std::sqrt(2.0) * pi));
  CHECK(std::abs(*e.z) < 3);
}

TEST_CASE("sampler/exponent agreement for every branch") {
  struct Case {
    LevySpec spec;
    double t;
  };
  const std::vector<Case> cases = {
      {exc(0.0, 1.0), 0.5}, {exc(0.0, 3.0), 2.0}, {exc(0.5, 0.0), 0.1},
      {exc(0.75, 0.0), 0.3}, {exc(0.5, 1.0), 0.1}, {exc(0.3, 2.0), 1.5}, {unit(0.8, 0.5), 4.0}};
  std::uint64_t stream = 0;
  for (const auto& c : cases) {
    Rng rng(13, ++stream, 0);
    std::vector<double> xs(50000);
    for (auto& x : xs) x = sample_increment(c.spec, c.t, rng);
    for (double l : {0.5, 1.0, 2.0}) {
      const auto ll = log_laplace(xs, l, c.t);
      CAPTURE(c.spec.alpha);
      CAPTURE(c.spec.beta);
      CAPTURE(l);
      CHECK(std::abs(ll.value - laplace_exponent(c.spec, l)) < 3 * ll.se);
    }
  }
}

TEST_CASE("tempered acceptance rate matches exp(-sigma beta^alpha)") {
  Rng rng(14, 1, 0);
  const auto s = exc(0.5, 1.0);
  const double t = 0.1;
  SamplerStats st;
  for (int i = 0; i < 100000; ++i) sample_increment(s, t, rng, &st);
  CHECK(st.slices == 100000);
  const double predicted = std::exp(-t * laplace_exponent(exc(0.5, 0.0), 1.0));
  const double p = st.acceptance_rate();
  const double se = std::sqrt(predicted * (1 - predicted) / static_cast<double>(st.proposals));
  CHECK(std::abs(p - predicted) < 3 * se);
}

TEST_CASE("tempered slicing keeps acceptance above the floor") {
  Rng rng(15, 1, 0);
  const auto s = exc(0.5, 4.0);
  SamplerStats st;
  const double t = 3.0;  // one-shot acceptance would be e^{-sigma beta^a} ~ 1e-23
  std::vector<double> xs(4000);
  for (auto& x : xs) x = sample_increment(s, t, rng, &st);
  CHECK(st.slices > 4000);
  CHECK(st.acceptance_rate() > 0.09);
  const auto m = mc::mean_estimate(xs);
  // E S_t = t psi'(0) = t c Gamma(1-a) b^{a-1}
  const double mean = t * s.c * std::tgamma(0.5) * std::pow(4.0, -0.5);
  CHECK(std::abs(m.value - mean) < 3 * m.std_error);
  SamplerOptions tight;
  tight.min_acceptance = 1e-30;
  tight.max_proposals = 10;
  CHECK_THROWS_AS(sample_increment(s, t, rng, nullptr, tight), RejectionCapExceeded);
}

TEST_CASE("jump paths") {
  const auto g = unit(0.0, 1.0);
  const int reps = 20000;
  std::vector<double> counts(reps);
  std::vector<double> sizes;
  for (int r = 0; r < reps; ++r) {
    Rng rng(16, 1, static_cast<std::uint64_t>(r));
    const auto path = sample_path_by_jumps(g, 1.0, 1.0, rng);
    counts[static_cast<std::size_t>(r)] = static_cast<double>(path.jumps.size());
    for (std::size_t i = 1; i < path.jumps.size(); ++i) {
      CHECK(path.jumps[i - 1].local_time_coordinate <= path.jumps[i].local_time_coordinate);
    }
    for (const auto& j : path.jumps) CHECK(j.jump_size > 1.0);
    CHECK(path.compensator == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-13));
  }
  auto m = mc::mean_estimate(counts);
  m.compare(specialfn::exp_integral_e1(1.0));
  CHECK(std::abs(*m.z) < 3);

  const auto st = unit(0.5, 0.0);
  for (int r = 0; r < 2000; ++r) {
    Rng rng(17, 1, static_cast<std::uint64_t>(r));
    counts[static_cast<std::size_t>(r)] = static_cast<double>(sample_path_by_jumps(st, 1.0, 0.01, rng).jumps.size());
  }
  auto m2 = mc::mean_estimate(std::span<const double>(counts.data(), 2000));
  m2.compare(2 / std::sqrt(0.01));
  CHECK(std::abs(*m2.z) < 3);
}

TEST_CASE("jump-size tail by chi-square") {
  for (const auto& s : {unit(0.0, 1.0), unit(0.5, 0.0), exc(0.5, 0.5), exc(0.9, 3.0)}) {
    const double eps = 0.05;
    Rng rng(18, 1, 0);
    std::vector<double> sizes;
    sizes.reserve(100000);
    while (sizes.size() < 100000) {
      for (const auto& j : sample_path_by_jumps(s, 100.0, eps, rng).jumps) sizes.push_back(j.jump_size);
    }
    sizes.resize(100000);
    // bins by tail quantiles
    const std::vector<double> edges = {eps, 0.07, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, INFINITY};
    const double total = levy_tail(s, eps);
    double stat = 0.0;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
      const double hi_tail = std::isinf(edges[k + 1]) ? 0.0 : levy_tail(s, edges[k + 1]);
      const double p = (levy_tail(s, edges[k]) - hi_tail) / total;
      double obs = 0.0;
      for (double y : sizes) obs += (y > edges[k] && y <= edges[k + 1]) ? 1.0 : 0.0;
      const double expect = p * static_cast<double>(sizes.size());
      stat += (obs - expect) * (obs - expect) / expect;
    }
    CAPTURE(s.alpha);
    CAPTURE(s.beta);
    CHECK(mc::chi_square_pvalue(stat, static_cast<double>(edges.size() - 2)) > 0.001);
  }
}
