#include "kreinlab/pathsim.hpp"

#include <cmath>
#include <stdexcept>

#include "kreinlab/specialfn.hpp"

namespace kreinlab::pathsim {

Path simulate_path(double horizon, double dt, Rng& rng, const LocalTimeOptions& lt) {
  if (!(dt > 0.0) || !(horizon >= dt)) throw std::invalid_argument("simulate_path: need dt > 0 and horizon >= dt");
  const auto n = static_cast<std::size_t>(std::llround(horizon / dt));
  Path p;
  p.dt = dt;
  p.values.resize(n + 1);
  p.local_time.resize(n + 1);
  const double sd = std::sqrt(dt);
  const double eps = lt.band_c * sd;
  for (std::size_t k = 1; k <= n; ++k) {
    const double x = p.values[k - 1];
    const double y = x + sd * rng.normal();
    const double dl = lt.estimator == LocalTimeEstimator::bridge ? bridge_local_time(x, y, dt, rng)
                                                                  : band_local_time(x, y, dt, eps);
    p.values[k] = y;
    p.local_time[k] = p.local_time[k - 1] + dl;
  }
  return p;
}

std::optional<double> inverse_local_time(const Path& path, double level) {
  if (!(level >= 0.0)) throw std::invalid_argument("inverse_local_time: level must be >= 0");
  if (level == 0.0) return 0.0;
  const auto it = std::lower_bound(path.local_time.begin(), path.local_time.end(), level);
  if (it == path.local_time.end()) return std::nullopt;
  return path.dt * static_cast<double>(it - path.local_time.begin());
}

std::optional<double> additive_functional(const Path& path, const FunctionalSpec& spec) {
  if (!spec.integrand) throw std::invalid_argument("additive_functional: empty integrand");
  std::size_t stop = 0;
  if (spec.stop == StopKind::fixed_time) {
    if (!(spec.stop_value >= 0.0)) throw std::invalid_argument("additive_functional: T must be >= 0");
    const double k = spec.stop_value / path.dt;
    if (k > static_cast<double>(path.steps()) + 1e-9) return std::nullopt;
    stop = static_cast<std::size_t>(std::llround(k));
  } else {
    const auto tau = inverse_local_time(path, spec.stop_value);
    if (!tau) return std::nullopt;
    stop = static_cast<std::size_t>(std::llround(*tau / path.dt));
  }
  auto f = [&](double x) { return spec.integrand(spec.use_abs ? std::abs(x) : x); };
  double sum = 0.0;
  double prev = stop > 0 ? f(path.values[0]) : 0.0;
  for (std::size_t k = 1; k <= stop; ++k) {
    const double cur = f(path.values[k]);
    sum += 0.5 * (prev + cur);
    prev = cur;
  }
  return sum * path.dt;
}

void WalkOptions::validate() const {
  if (!(dt > 0.0) || !(eta >= 0.0) || !(horizon > dt) || max_steps == 0 || !(local_time.band_c > 0.0)) {
    throw std::invalid_argument("WalkOptions: need dt > 0, eta >= 0, horizon > dt, max_steps > 0, band_c > 0");
  }
}

std::optional<double> drifted_first_passage(double l, double dt, double horizon, Rng& rng) {
  if (!(l > 0.0) || !(dt > 0.0)) throw std::invalid_argument("drifted_first_passage: need l > 0, dt > 0");
  const double sd = std::sqrt(dt);
  double x = 0.0;
  double t = 0.0;
  while (t < horizon) {
    const double y = x + dt + sd * rng.normal();
    t += dt;
    if (y >= l) return t;
    // the bridge between x and y (drift does not change bridge law) crosses l
    // with probability exp(-2 (l - x)(l - y) / dt)
    if (rng.uniform() < std::exp(-2.0 * (l - x) * (l - y) / dt)) return t;
    x = y;
  }
  return std::nullopt;
}

double inverse_gaussian_cdf(double x, double mu, double shape) {
  if (!(x > 0.0)) return 0.0;
  const double r = std::sqrt(shape / x);
  const double a = r * (x / mu - 1.0);
  const double b = -r * (x / mu + 1.0);
  // the second term is exp(2 shape/mu) Phi(b), combined in log space
  const double second = std::exp(2.0 * shape / mu + std::log(specialfn::normal_cdf(b)));
  return specialfn::normal_cdf(a) + (std::isfinite(second) ? second : 0.0);
}

FirstPassageReport first_passage_check(double l, double lambda, std::uint64_t n, const FirstPassageOptions& opt) {
  if (!(l > 0.0) || !(lambda >= 0.0) || n < 2) {
    throw std::invalid_argument("first_passage_check: need l > 0, lambda >= 0, n >= 2");
  }
  opt.walk.validate();
  auto f = [](double x) {
    const double d = 1.0 + 2.0 * x;
    return 1.0 / (d * d);
  };
  auto fun = mc::replicate(n, opt.threads, [&](std::uint64_t i) -> std::optional<double> {
    auto rng = Rng::for_replication(opt.seed, "half_passage/functional", i);
    const auto [r, value] = functional_at_local_time(l, opt.walk, rng, f);
    if (!r.reached) return std::nullopt;
    return value;
  });
  auto dir = mc::replicate(n, opt.threads, [&](std::uint64_t i) {
    auto rng = Rng::for_replication(opt.seed, "half_passage/direct", i);
    return drifted_first_passage(l, opt.direct_dt, opt.direct_horizon, rng);
  });
  FirstPassageReport rep;
  for (const auto& v : fun) {
    if (v) rep.functional.push_back(*v); else ++rep.functional_not_reached;
  }
  for (const auto& v : dir) {
    if (v) rep.direct.push_back(*v); else ++rep.direct_not_reached;
  }
  if (rep.functional.size() < 2 || rep.direct.size() < 2) {
    throw std::runtime_error("first_passage_check: too few paths reached the stop");
  }
  const double s = 0.5 * lambda * lambda;
  const double target = std::exp(-l * (std::sqrt(lambda * lambda + 1.0) - 1.0));
  rep.functional_laplace = mc::empirical_laplace(rep.functional, s);
  rep.functional_laplace.label = "functional_laplace";
  rep.functional_laplace.param = lambda;
  rep.functional_laplace.compare(target);
  rep.direct_laplace = mc::empirical_laplace(rep.direct, s);
  rep.direct_laplace.label = "direct_laplace";
  rep.direct_laplace.param = lambda;
  rep.direct_laplace.compare(target);
  rep.direct_mean = mc::mean_estimate(rep.direct);
  rep.direct_mean.label = "direct_mean";
  rep.direct_mean.compare(l);
  return rep;
}

std::function<double(double)> symmetric_splice(std::function<double(double)> phi1,
                                               std::function<double(double)> phi2) {
  if (!phi1 || !phi2) throw std::invalid_argument("symmetric_splice: empty integrand");
  return [phi1 = std::move(phi1), phi2 = std::move(phi2)](double x) {
    if (x > 0.0) return phi1(x);
    if (x < 0.0) return -phi2(-x);
    return 0.0;
  };
}

}  // namespace kreinlab::pathsim
