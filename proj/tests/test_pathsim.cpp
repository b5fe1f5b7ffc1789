#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kreinlab/krein.hpp"
#include "kreinlab/mc.hpp"
#include "kreinlab/pathsim.hpp"
#include "kreinlab/specialfn.hpp"

using namespace kreinlab;
using namespace kreinlab::pathsim;

namespace {

double z_of(double value, double se, double ref) { return (value - ref) / se; }

}  // namespace

TEST_CASE("simulate_path is deterministic per stream") {
  auto r1 = Rng::for_replication(5, "path", 3);
  auto r2 = Rng::for_replication(5, "path", 3);
  const auto a = simulate_path(1.0, 1e-3, r1);
  const auto b = simulate_path(1.0, 1e-3, r2);
  CHECK(a.values == b.values);
  CHECK(a.local_time == b.local_time);
  CHECK(a.values.size() == 1001);
  CHECK(a.values[0] == 0.0);
  for (std::size_t k = 1; k < a.local_time.size(); ++k) CHECK(a.local_time[k] >= a.local_time[k - 1]);
  CHECK_THROWS_AS(simulate_path(1e-4, 1e-3, r1), std::invalid_argument);
}

TEST_CASE("Brownian marginal and mean local time") {
  const double T = 1.0;
  std::vector<double> b2;
  std::vector<double> lt;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    auto rng = Rng::for_replication(11, "marginal", i);
    const auto p = simulate_path(T, 1e-3, rng);
    b2.push_back(p.values.back() * p.values.back());
    lt.push_back(p.local_time.back());
  }
  const auto v = mc::mean_estimate(b2);
  CHECK(std::abs(z_of(v.value, v.std_error, T)) < 3);
  const auto l = mc::mean_estimate(lt);
  CHECK(std::abs(z_of(l.value, l.std_error, std::sqrt(2 * T / std::numbers::pi))) < 3);
}

TEST_CASE("bridge estimator is stable under halving dt") {
  const double T = 1.0;
  std::vector<double> coarse;
  std::vector<double> fine;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    auto r1 = Rng::for_replication(12, "coarse", i);
    auto r2 = Rng::for_replication(12, "fine", i);
    coarse.push_back(simulate_path(T, 1e-3, r1).local_time.back());
    fine.push_back(simulate_path(T, 5e-4, r2).local_time.back());
  }
  const auto c = mc::mean_estimate(coarse);
  const auto f = mc::mean_estimate(fine);
  CHECK(std::abs(c.value - f.value) < 3 * std::hypot(c.std_error, f.std_error));
}

TEST_CASE("band estimator carries its -eps/2 bias") {
  // E (1/2eps) |{s <= T : |B_s| <= eps}| = (1/2eps) int_0^T erf(eps/sqrt(2s)) ds
  //                                      = sqrt(2T/pi) - eps/2 + O(eps^3)
  const double T = 0.25;
  auto expected = [&](double eps) {
    return specialfn::quad([&](double s) { return std::erf(eps / std::sqrt(2 * s)); }, 0.0, T, {1e-10, 1e-14, 2000},
                           specialfn::Transform::log_left) / (2 * eps);
  };
  const double eps = 0.06;
  const double dt = 1e-4;
  std::vector<double> fine_l;
  std::vector<double> diff;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    auto rng = Rng::for_replication(12, "band", i);
    // fine path: eps/2 and dt/2; the coarse estimate uses every second point
    const auto fine = simulate_path(T, dt / 2, rng, {LocalTimeEstimator::band, 0.5 * eps / std::sqrt(dt / 2)});
    double l = 0.0;
    for (std::size_t k = 2; k < fine.values.size(); k += 2) l += band_local_time(fine.values[k - 2], fine.values[k], dt, eps);
    fine_l.push_back(fine.local_time.back());
    diff.push_back(fine.local_time.back() - l);
  }
  const auto f = mc::mean_estimate(fine_l);
  const auto d = mc::mean_estimate(diff);
  CHECK(std::abs(z_of(f.value, f.std_error, expected(eps / 2))) < 3);
  CHECK(std::abs(z_of(d.value, d.std_error, expected(eps / 2) - expected(eps))) < 3);
  CHECK(expected(eps / 2) - expected(eps) == doctest::Approx(eps / 4).epsilon(0.02));
}

TEST_CASE("bridge local time has the bridge law") {
  const double x = 0.03;
  const double y = -0.01;
  const double dt = 1e-3;
  std::vector<double> s;
  auto rng = Rng::for_replication(13, "bridge", 0);
  for (int i = 0; i < 20000; ++i) s.push_back(bridge_local_time(x, y, dt, rng));
  auto cdf = [&](double l) {
    if (l < 0) return 0.0;
    const double a = std::abs(x) + std::abs(y) + l;
    return 1.0 - std::exp(-(a * a - (x - y) * (x - y)) / (2 * dt));
  };
  // sign change: no atom at 0
  CHECK(mc::ks_pvalue(mc::ks_statistic(s, cdf), s.size()) > 0.01);
  // same-sign endpoints far from 0 never pick up local time
  const double far = 10 * std::sqrt(dt);
  for (int i = 0; i < 1000; ++i) CHECK(bridge_local_time(far, 1.3 * far, dt, rng) == 0.0);
}

TEST_CASE("inverse local time on stored paths") {
  auto rng = Rng::for_replication(14, "ilt", 0);
  const auto p = simulate_path(20.0, 1e-3, rng);
  CHECK(inverse_local_time(p, 0.0) == 0.0);
  CHECK_FALSE(inverse_local_time(p, 1e6).has_value());
  CHECK_THROWS_AS(inverse_local_time(p, -1.0), std::invalid_argument);
  double prev = 0.0;
  for (double level = 0.05; level < p.local_time.back(); level += 0.05) {
    const auto tau = inverse_local_time(p, level);
    REQUIRE(tau.has_value());
    CHECK(*tau >= prev);
    prev = *tau;
    const auto k = static_cast<std::size_t>(std::llround(*tau / p.dt));
    CHECK(p.local_time[k] >= level);
    CHECK(p.local_time[k - 1] < level);
  }
}

TEST_CASE("streaming walk with uniform steps reproduces the stored path") {
  WalkOptions opt;
  opt.dt = 1e-3;
  opt.eta = 0.0;
  opt.horizon = 20.0;
  int compared = 0;
  for (std::uint64_t i = 0; i < 50; ++i) {
    auto r1 = Rng::for_replication(15, "same", i);
    auto r2 = Rng::for_replication(15, "same", i);
    const auto p = simulate_path(20.0, opt.dt, r1);
    const auto w = walk_to_local_time(0.3, opt, r2, [](const Step&) {});
    const auto tau = inverse_local_time(p, 0.3);
    CHECK(w.reached == tau.has_value());
    if (tau) {
      CHECK(w.tau == doctest::Approx(*tau).epsilon(1e-9));
      ++compared;
    }
  }
  CHECK(compared > 30);
}

TEST_CASE("inverse local time Laplace transform") {
  // E exp(-lambda tau_t) = exp(-t sqrt(2 lambda)), t = 0.5, lambda = 1
  WalkOptions opt;
  std::vector<double> tau;
  for (std::uint64_t i = 0; i < 20000; ++i) {
    auto rng = Rng::for_replication(16, "tau", i);
    const auto w = walk_to_local_time(0.5, opt, rng, [](const Step&) {});
    tau.push_back(w.reached ? w.tau : INFINITY);
  }
  auto e = mc::empirical_laplace(tau, 1.0);
  e.compare(std::exp(-0.5 * std::sqrt(2.0)));
  CHECK(std::abs(*e.z) < 3);
}

TEST_CASE("additive_functional on stored paths") {
  auto rng = Rng::for_replication(17, "af", 0);
  const auto p = simulate_path(5.0, 1e-3, rng);
  FunctionalSpec one{[](double) { return 1.0; }, StopKind::fixed_time, 2.5};
  CHECK(*additive_functional(p, one) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK_FALSE(additive_functional(p, {one.integrand, StopKind::fixed_time, 6.0}).has_value());
  // alpha = 1/2: |B|^{1/alpha - 2} = 1 so A(tau) = tau
  const PowerIntegrand flat{0.0, default_floor(p.dt)};
  FunctionalSpec a{flat, StopKind::inverse_local_time, 0.2};
  const auto tau = inverse_local_time(p, 0.2);
  REQUIRE(tau.has_value());
  CHECK(*additive_functional(p, a) == doctest::Approx(*tau).epsilon(1e-12));
  // phi(|B|) versus phi(B) for an odd integrand
  FunctionalSpec odd{[](double x) { return x; }, StopKind::fixed_time, 5.0, false};
  FunctionalSpec even{[](double x) { return x; }, StopKind::fixed_time, 5.0, true};
  CHECK(*additive_functional(p, even) > std::abs(*additive_functional(p, odd)));
}

TEST_CASE("PowerIntegrand floor compensation is exact on the band") {
  for (double p : {-2.0 / 3.0, -0.3, 0.5}) {
    const PowerIntegrand f{p, 0.01};
    const double dl = 0.7;
    const double band = 2 * 0.01 * f(0.0) * dl + f.compensation(dl);
    const double expect = p < 0 ? 2 * std::pow(0.01, p + 1) / (p + 1) * dl : 2 * 0.01 * f(0.0) * dl;
    CHECK(band == doctest::Approx(expect).epsilon(1e-14));
  }
  CHECK(PowerIntegrand{0.0, 0.1}(0.0) == 1.0);
  CHECK(PowerIntegrand{-0.5, 0.04}(0.01) == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("Gamma representation with k = 1") {
  const krein::HFunction h(0.0);
  WalkOptions opt;
  std::vector<double> a;
  for (std::uint64_t i = 0; i < 4000; ++i) {
    auto rng = Rng::for_replication(18, "gamma", i);
    const auto [w, v] = functional_at_local_time(0.5, opt, rng, h);
    if (w.reached) a.push_back(v);
  }
  for (double lam : {0.5, 1.0, 2.0}) {
    auto e = mc::empirical_laplace(a, lam);
    e.compare(std::pow(1 + lam, -0.5));
    CHECK(std::abs(*e.z) < 3.5);
  }
  const std::vector<double> lams{0.5, 1.0, 2.0};
  const std::vector<double> cands{0.5, 1.0, 2.0};
  const auto cal = mc::calibrate_multiplier(a, lams, [](double l) { return std::pow(1 + l, -0.5); }, cands);
  CHECK(cal.k_selected == 1.0);
}

TEST_CASE("first-passage reduction") {
  CHECK(std::exp(-(std::sqrt(2.0) - 1)) == doctest::Approx(0.6608598).epsilon(1e-7));
  // inverse Gaussian cdf: limits and derivative equal to the density
  CHECK(inverse_gaussian_cdf(0.0, 1, 1) == 0.0);
  CHECK(inverse_gaussian_cdf(1e4, 1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  for (double x : {0.1, 0.5, 1.0, 3.0}) {
    const double h = 1e-5;
    const double fd = (inverse_gaussian_cdf(x + h, 1, 1) - inverse_gaussian_cdf(x - h, 1, 1)) / (2 * h);
    const double pdf = std::exp(-(x - 1) * (x - 1) / (2 * x)) / std::sqrt(2 * std::numbers::pi * x * x * x);
    CHECK(fd == doctest::Approx(pdf).epsilon(1e-6));
  }
  FirstPassageOptions opt;
  opt.direct_dt = 1e-3;
  opt.threads = 1;
  const auto rep = first_passage_check(1.0, 0.0, 200, opt);
  CHECK(rep.functional_laplace.value == 1.0);
  CHECK(rep.direct_laplace.value == 1.0);
  const auto r2 = first_passage_check(1.0, 1.0, 3000, opt);
  CHECK(*r2.functional_laplace.analytic == doctest::Approx(0.6608598).epsilon(1e-7));
  CHECK(std::abs(*r2.functional_laplace.z) < 3.5);
  CHECK(std::abs(*r2.direct_laplace.z) < 3.5);
  CHECK(std::abs(*r2.direct_mean.z) < 3);
  auto cdf = [](double x) { return inverse_gaussian_cdf(x, 1.0, 1.0); };
  CHECK(mc::ks_pvalue(mc::ks_statistic(r2.functional, cdf), r2.functional.size()) > 0.01);
  CHECK_THROWS_AS(first_passage_check(0.0, 1.0, 10, opt), std::invalid_argument);
}

TEST_CASE("symmetric splice") {
  const auto phi = symmetric_splice([](double x) { return x * x; }, [](double x) { return 2 * x; });
  CHECK(phi(3.0) == 9.0);
  CHECK(phi(-3.0) == -6.0);
  CHECK(phi(0.0) == 0.0);
  CHECK_THROWS_AS(symmetric_splice(nullptr, [](double) { return 0.0; }), std::invalid_argument);

  const krein::HFunction h(0.0);
  WalkOptions opt;
  std::vector<double> x;
  std::vector<double> pos;
  std::vector<double> neg;
  std::vector<double> clock;
  for (std::uint64_t i = 0; i < 3000; ++i) {
    auto rng = Rng::for_replication(19, "splice", i);
    const auto s = splice_at_local_time(1.0, opt, rng, h, h);
    if (!s.reached) continue;
    x.push_back(s.value());
    pos.push_back(s.positive);
    neg.push_back(s.negative);
    clock.push_back(s.clock_positive);
  }
  const auto sk = mc::skewness(x);
  CHECK(std::abs(sk.value) < 3 * sk.std_error);
  const auto co = mc::correlation(pos, neg);
  CHECK(std::abs(co.value) < 3 * co.std_error);
  // each side of tau_1 is a Gamma variable with shape 1/2, and the positive
  // occupation clock is tau_{1/2}
  auto g = mc::empirical_laplace(pos, 1.0);
  g.compare(std::pow(2.0, -0.5));
  CHECK(std::abs(*g.z) < 3.5);
  auto c = mc::empirical_laplace(clock, 1.0);
  c.compare(std::exp(-0.5 * std::sqrt(2.0)));
  CHECK(std::abs(*c.z) < 3.5);
}
