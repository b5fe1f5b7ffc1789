#include "kreinlab/excursion.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "kreinlab/krein.hpp"
#include "kreinlab/specialfn.hpp"

namespace kreinlab::excursion {

namespace sf = kreinlab::specialfn;

void TruncatedItoConfig::validate() const {
  lifetime_spec().validate();
  if (!(v0 > 0.0) || !std::isfinite(v0)) throw std::invalid_argument("TruncatedItoConfig: v0 must be positive");
  if (!(dt > 0.0) || min_steps < 2) throw std::invalid_argument("TruncatedItoConfig: need dt > 0, min_steps >= 2");
}

double lifetime_tail_mass(const TruncatedItoConfig& cfg) {
  cfg.validate();
  return levy::levy_tail(cfg.lifetime_spec(), cfg.v0);
}

double lifetime_survival(const TruncatedItoConfig& cfg, double v) {
  cfg.validate();
  if (v <= cfg.v0) return 1.0;
  const auto spec = cfg.lifetime_spec();
  return levy::levy_tail(spec, v) / levy::levy_tail(spec, cfg.v0);
}

std::vector<double> bessel_bridge(double dim, double length, int n, Rng& rng, BridgeMethod method) {
  if (!(dim > 0.0) || !(length > 0.0) || n < 2) {
    throw std::invalid_argument("bessel_bridge: need dim > 0, length > 0, n >= 2");
  }
  std::vector<double> r(static_cast<std::size_t>(n) + 1, 0.0);
  if (method == BridgeMethod::gaussian) {
    const auto d = static_cast<int>(std::lround(dim));
    if (std::abs(dim - d) > 1e-12) throw std::invalid_argument("bessel_bridge: gaussian method needs integer dimension");
    std::vector<double> sq(r.size(), 0.0);
    std::vector<double> w(r.size());
    const double sd = std::sqrt(length / n);
    for (int c = 0; c < d; ++c) {
      w[0] = 0.0;
      for (int k = 1; k <= n; ++k) w[k] = w[k - 1] + sd * rng.normal();
      for (int k = 1; k < n; ++k) {
        const double b = w[k] - (static_cast<double>(k) / n) * w[n];
        sq[k] += b * b;
      }
    }
    for (int k = 1; k < n; ++k) r[k] = std::sqrt(sq[k]);
    return r;
  }
  // time inversion of BESQ^dim from 0 with exact noncentral chi-square steps
  const double shape = 0.5 * dim;
  double y = 0.0;
  double u_prev = 0.0;
  for (int k = 1; k < n; ++k) {
    const double s = static_cast<double>(k) / n;
    const double u = s / (1.0 - s);
    const double h = u - u_prev;
    const auto extra = rng.poisson(y / (2.0 * h));
    y = 2.0 * h * rng.gamma(shape + static_cast<double>(extra));
    u_prev = u;
    const double one_minus = 1.0 - s;
    r[k] = std::sqrt(length * one_minus * one_minus * y);
  }
  return r;
}

int bridge_steps(const TruncatedItoConfig& cfg, double lifetime) {
  const double want = std::ceil(lifetime / cfg.dt);
  int n = want > 1e8 ? 100'000'000 : std::max(cfg.min_steps, static_cast<int>(want));
  if (n % 2 == 1) ++n;
  return n;
}

ExcursionSample sample_excursion(const TruncatedItoConfig& cfg, Rng& rng, BridgeMethod method) {
  cfg.validate();
  ExcursionSample e;
  e.lifetime = levy::sample_power_exp_tail(cfg.alpha, cfg.beta, cfg.v0, rng);
  const int n = bridge_steps(cfg, e.lifetime);
  e.dt = e.lifetime / n;
  e.bridge = bessel_bridge(cfg.dimension(), e.lifetime, n, rng, method);
  e.maximum = *std::max_element(e.bridge.begin(), e.bridge.end());
  return e;
}

double crossing_probability(const std::vector<double>& bridge, double dt, double x, int stride) {
  if (bridge.size() < 2 || stride < 1 || (bridge.size() - 1) % static_cast<std::size_t>(stride) != 0) {
    throw std::invalid_argument("crossing_probability: grid does not divide by stride");
  }
  const double h = dt * stride;
  double log_stay = 0.0;
  for (std::size_t k = stride; k < bridge.size(); k += stride) {
    const double a = bridge[k - stride];
    const double b = bridge[k];
    if (a >= x || b >= x) return 1.0;
    log_stay += std::log1p(-std::exp(-2.0 * (x - a) * (x - b) / h));
  }
  return -std::expm1(log_stay);
}

double ito_max_tail(double alpha, double beta, double x) {
  if (!(alpha >= 0.0 && alpha < 1.0) || !(beta > 0.0) || !(x > 0.0)) {
    throw std::domain_error("ito_max_tail: need 0 <= alpha < 1, beta > 0, x > 0");
  }
  const double z = std::sqrt(2.0 * beta) * x;
  const double ratio = sf::bessel_k_scaled(alpha, z) / sf::bessel_i_scaled(alpha, z);
  return 2.0 * std::pow(2.0 * beta, alpha) * ratio * std::exp(-2.0 * z);
}

double ito_max_tail_limit(double alpha, double x) {
  if (!(alpha > 0.0 && alpha < 1.0) || !(x > 0.0)) throw std::domain_error("ito_max_tail_limit: need 0 < alpha < 1, x > 0");
  return std::exp2(2.0 * alpha) * std::tgamma(alpha) * std::tgamma(alpha + 1.0) * std::pow(x, -2.0 * alpha);
}

double ito_max_density(double alpha, double beta, double y) {
  if (!(alpha >= 0.0 && alpha < 1.0) || !(beta > 0.0) || !(y > 0.0)) {
    throw std::domain_error("ito_max_density: need 0 <= alpha < 1, beta > 0, y > 0");
  }
  const double i = sf::bessel_i(alpha, std::sqrt(2.0 * beta) * y);
  return 2.0 * std::pow(2.0 * beta, alpha) / (y * i * i);
}

double truncation_allowance(const TruncatedItoConfig& cfg, double x) {
  cfg.validate();
  const auto spec = cfg.lifetime_spec();
  const double d = std::ceil(cfg.dimension() - 1e-12);
  auto f = [&](double v) {
    if (v <= 0.0) return 0.0;
    const double p = std::min(1.0, 2.0 * d * std::exp(-2.0 * x * x / (d * v)));
    return p == 0.0 ? 0.0 : levy::levy_density(spec, v) * p;
  };
  return sf::quad(f, 0.0, cfg.v0, {1e-8, 1e-300, 4000});
}

MaxLawReport verify_max_law(const TruncatedItoConfig& cfg, const std::vector<double>& x_grid, std::uint64_t n,
                            const MaxLawOptions& opt) {
  cfg.validate();
  if (n < 2 || x_grid.empty()) throw std::invalid_argument("verify_max_law: need n >= 2 and a non-empty x grid");
  for (double x : x_grid) {
    if (!(x > 0.0)) throw std::invalid_argument("verify_max_law: x values must be positive");
  }
  if (!(cfg.beta > 0.0)) throw std::invalid_argument("verify_max_law: needs beta > 0");
  const std::size_t m = x_grid.size();
  auto per_sample = mc::replicate(n, opt.threads, [&](std::uint64_t i) {
    auto rng = Rng::for_replication(opt.seed, "excursion_max", i);
    const auto e = sample_excursion(cfg, rng, opt.method);
    std::vector<double> out(2 * m);
    for (std::size_t j = 0; j < m; ++j) {
      out[2 * j] = crossing_probability(e.bridge, e.dt, x_grid[j], 1);
      out[2 * j + 1] = crossing_probability(e.bridge, e.dt, x_grid[j], 2);
    }
    return out;
  });
  MaxLawReport rep;
  rep.tail_mass = lifetime_tail_mass(cfg);
  rep.n = n;
  std::vector<double> fine(n);
  std::vector<double> shift(n);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::uint64_t i = 0; i < n; ++i) {
      fine[i] = rep.tail_mass * per_sample[i][2 * j];
      shift[i] = rep.tail_mass * (per_sample[i][2 * j + 1] - per_sample[i][2 * j]);
    }
    MaxLawRow row;
    row.x = x_grid[j];
    row.tail = mc::mean_estimate(fine);
    row.tail.label = "max_tail";
    row.tail.param = row.x;
    const double analytic = ito_max_tail(cfg.alpha, cfg.beta, row.x);
    row.tail.compare(analytic);
    row.coarse_shift = mc::mean_estimate(shift).value;
    row.truncation = truncation_allowance(cfg, row.x);
    row.allowance = std::abs(row.coarse_shift) + row.truncation;
    const double gap = std::max(0.0, std::abs(row.tail.value - analytic) - row.allowance);
    row.z_adjusted = row.tail.std_error > 0.0 ? std::copysign(gap / row.tail.std_error, row.tail.value - analytic) : 0.0;
    rep.rows.push_back(row);
  }
  return rep;
}

double lifetime_chi_square_pvalue(const TruncatedItoConfig& cfg, const std::vector<double>& lifetimes, int bins) {
  cfg.validate();
  if (bins < 2 || lifetimes.size() < static_cast<std::size_t>(5 * bins)) {
    throw std::invalid_argument("lifetime_chi_square_pvalue: need bins >= 2 and >= 5 samples per bin");
  }
  // equiprobable edges by bisection on ln v
  std::vector<double> edges{cfg.v0};
  for (int j = 1; j < bins; ++j) {
    const double target = 1.0 - static_cast<double>(j) / bins;
    double lo = std::log(cfg.v0);
    double hi = lo + 1.0;
    while (lifetime_survival(cfg, std::exp(hi)) > target) hi += 2.0 * (hi - lo);
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
      const double mid = 0.5 * (lo + hi);
      (lifetime_survival(cfg, std::exp(mid)) > target ? lo : hi) = mid;
    }
    edges.push_back(std::exp(0.5 * (lo + hi)));
  }
  std::vector<double> counts(bins, 0.0);
  for (double v : lifetimes) {
    if (v < cfg.v0) throw std::invalid_argument("lifetime_chi_square_pvalue: lifetime below v0");
    const auto k = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin()) - 1;
    counts[k] += 1.0;
  }
  const double expect = static_cast<double>(lifetimes.size()) / bins;
  double stat = 0.0;
  for (double c : counts) stat += (c - expect) * (c - expect) / expect;
  return mc::chi_square_pvalue(stat, bins - 1);
}

GigReport gig_hitting_check(double x0, double beta, const std::vector<double>& gamma_grid) {
  if (!(x0 > 0.0) || !(beta > 0.0)) throw std::invalid_argument("gig_hitting_check: need x0 > 0, beta > 0");
  GigReport rep;
  rep.normalization = krein::gig_laplace_by_quadrature(x0, beta, 0.0);
  rep.normalization_error = std::abs(rep.normalization - 1.0);
  const double k_base = sf::bessel_k(0.0, std::sqrt(2.0 * beta) * x0);
  for (double g : gamma_grid) {
    if (!(g >= 0.0)) throw std::invalid_argument("gig_hitting_check: gamma must be >= 0");
    GigRow row;
    row.gamma = g;
    row.quadrature = krein::gig_laplace_by_quadrature(x0, beta, g);
    row.analytic = sf::bessel_k(0.0, std::sqrt(2.0 * (beta + g)) * x0) / k_base;
    row.rel_error = std::abs(row.quadrature - row.analytic) / row.analytic;
    rep.max_rel_error = std::max(rep.max_rel_error, row.rel_error);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace kreinlab::excursion
