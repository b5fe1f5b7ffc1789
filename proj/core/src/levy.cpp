#include "kreinlab/levy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "kreinlab/specialfn.hpp"

namespace kreinlab::levy {

namespace sf = kreinlab::specialfn;

namespace {

// c Gamma(1 - alpha) / alpha, the coefficient of lambda^alpha in psi.
double stable_coefficient(const LevySpec& s) {
  return s.c * std::tgamma(1.0 - s.alpha) / s.alpha;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::domain_error(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

double normalization_constant(double alpha, PsiNormalization mode) {
  switch (mode) {
    case PsiNormalization::excursion:
      return std::exp2(alpha) * std::tgamma(alpha + 1.0);
    case PsiNormalization::unit:
      return 1.0;
  }
  throw std::logic_error("unknown PsiNormalization");
}

void LevySpec::validate() const {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("LevySpec: alpha must lie in [0, 1)");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("LevySpec: beta must be >= 0");
  if (alpha == 0.0 && beta == 0.0) throw std::invalid_argument("LevySpec: alpha = 0 needs beta > 0");
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("LevySpec: c must be > 0");
}

LevySpec LevySpec::make(double alpha, double beta, PsiNormalization mode) {
  LevySpec s{alpha, beta, 0.0};
  s.c = normalization_constant(alpha, mode);
  s.validate();
  return s;
}

double JumpPath::total() const {
  double sum = compensator;
  for (const auto& j : jumps) sum += j.jump_size;
  return sum;
}

double levy_density(const LevySpec& spec, double y) {
  spec.validate();
  if (!(y > 0.0)) throw std::domain_error("levy_density: y must be > 0");
  return spec.c * std::exp(-spec.beta * y - (spec.alpha + 1.0) * std::log(y));
}

double levy_tail(const LevySpec& spec, double eps) {
  spec.validate();
  require_positive(eps, "levy_tail: eps");
  const double a = spec.alpha;
  if (spec.beta == 0.0) return spec.c * std::pow(eps, -a) / a;
  if (a == 0.0) return spec.c * sf::exp_integral_e1(spec.beta * eps);
  return spec.c * std::pow(spec.beta, a) * sf::upper_gamma(-a, spec.beta * eps);
}

double small_jump_mean(const LevySpec& spec, double eps) {
  spec.validate();
  require_positive(eps, "small_jump_mean: eps");
  const double a = spec.alpha;
  if (spec.beta == 0.0) return spec.c * std::pow(eps, 1.0 - a) / (1.0 - a);
  return spec.c * std::pow(spec.beta, a - 1.0) * sf::lower_gamma(1.0 - a, spec.beta * eps);
}

double laplace_exponent(const LevySpec& spec, double lambda) {
  spec.validate();
  if (!(lambda >= 0.0)) throw std::domain_error("laplace_exponent: lambda must be >= 0");
  if (lambda == 0.0) return 0.0;
  if (spec.alpha == 0.0) return spec.c * std::log1p(lambda / spec.beta);
  const double k = stable_coefficient(spec);
  if (spec.beta == 0.0) return k * std::pow(lambda, spec.alpha);
  return k * std::pow(spec.beta, spec.alpha) * std::expm1(spec.alpha * std::log1p(lambda / spec.beta));
}

double laplace_exponent_by_quadrature(const LevySpec& spec, double lambda, double rel_tol) {
  spec.validate();
  if (!(lambda >= 0.0)) throw std::domain_error("laplace_exponent: lambda must be >= 0");
  if (lambda == 0.0) return 0.0;
  const double a = spec.alpha;
  const double b = spec.beta;
  // (1 - e^{-lambda y}) / y stays O(lambda) as y -> 0, so the product cannot overflow
  auto f = [=](double y) {
    return -std::expm1(-lambda * y) / y * std::exp(-b * y - a * std::log(y));
  };
  const sf::Accuracy acc{rel_tol, 1e-300, 5000};
  // the split point sits near the scale where 1 - e^{-lambda y} saturates
  const double mid = 1.0 / std::max(lambda, 1e-300);
  const double near = sf::quad(f, 0.0, mid, acc, sf::Transform::log_left);
  const double far = sf::quad(f, mid, INFINITY, acc, sf::Transform::log_right);
  return spec.c * (near + far);
}

LevySpec esscher(const LevySpec& spec, double a) {
  spec.validate();
  require_positive(a, "esscher: a");
  LevySpec out = spec;
  out.beta = spec.beta + a;
  return out;
}

double sample_standard_stable(double alpha, Rng& rng) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("sample_standard_stable: alpha must lie in (0, 1)");
  }
  constexpr double pi = std::numbers::pi;
  double u;
  do {
    u = pi * rng.uniform();
  } while (u == 0.0);
  const double e = rng.exponential();
  // Zolotarev's function A(u) = [sin(a u)^a sin((1-a) u) / sin(u)]^{1/(1-a)}
  const double log_a = (alpha * std::log(std::sin(alpha * u)) +
                        (1.0 - alpha) * std::log(std::sin((1.0 - alpha) * u)) - std::log(std::sin(u))) /
                       (1.0 - alpha);
  return std::exp((1.0 - alpha) / alpha * (log_a - std::log(e)));
}

double sample_increment(const LevySpec& spec, double t, Rng& rng, SamplerStats* stats,
                        const SamplerOptions& options) {
  spec.validate();
  require_positive(t, "sample_increment: t");
  if (spec.alpha == 0.0) {
    if (stats) {
      ++stats->proposals;
      ++stats->accepted;
      ++stats->slices;
    }
    return rng.gamma(spec.c * t) / spec.beta;
  }
  const double a = spec.alpha;
  const double sigma = t * stable_coefficient(spec);
  if (spec.beta == 0.0) {
    if (stats) {
      ++stats->proposals;
      ++stats->accepted;
      ++stats->slices;
    }
    return std::pow(sigma, 1.0 / a) * sample_standard_stable(a, rng);
  }
  // Acceptance of one proposal is exp(-sigma beta^alpha); slice the time so
  // each slice accepts with probability at least min_acceptance.
  const double log_accept = sigma * std::pow(spec.beta, a);
  const double budget = -std::log(options.min_acceptance);
  const auto slices = static_cast<std::uint64_t>(std::max(1.0, std::ceil(log_accept / budget)));
  const double scale = std::pow(sigma / static_cast<double>(slices), 1.0 / a);
  double total = 0.0;
  for (std::uint64_t k = 0; k < slices; ++k) {
    std::uint64_t tries = 0;
    while (true) {
      if (tries++ >= options.max_proposals) {
        throw RejectionCapExceeded("sample_increment: tempered rejection exceeded " +
                                   std::to_string(options.max_proposals) + " proposals");
      }
      const double x = scale * sample_standard_stable(a, rng);
      if (stats) ++stats->proposals;
      if (rng.uniform() < std::exp(-spec.beta * x)) {
        if (stats) ++stats->accepted;
        total += x;
        break;
      }
    }
  }
  if (stats) stats->slices += slices;
  return total;
}

double sample_power_exp_tail(double alpha, double beta, double floor, Rng& rng, SamplerStats* stats) {
  if (!(alpha >= 0.0 && alpha < 1.0) || !(beta >= 0.0) || !(floor > 0.0)) {
    throw std::domain_error("sample_power_exp_tail: need 0 <= alpha < 1, beta >= 0, floor > 0");
  }
  if (beta == 0.0) {
    if (alpha == 0.0) throw std::domain_error("sample_power_exp_tail: alpha = beta = 0 is not normalizable");
    if (stats) {
      ++stats->proposals;
      ++stats->accepted;
    }
    return floor * std::pow(rng.uniform_pos(), -1.0 / alpha);
  }
  // Envelope: y^{-alpha-1} e^{-beta floor} on [floor, b] and b^{-alpha-1} e^{-beta y} on [b, inf).
  const double b = floor + 1.0 / beta;
  const double power_mass = alpha == 0.0 ? std::log(b / floor)
                                         : (std::pow(floor, -alpha) - std::pow(b, -alpha)) / alpha;
  const double mass_left = std::exp(-beta * floor) * power_mass;
  const double mass_right = std::exp(-beta * b - (alpha + 1.0) * std::log(b)) / beta;
  const double p_left = mass_left / (mass_left + mass_right);
  while (true) {
    if (stats) ++stats->proposals;
    double y;
    double accept;
    if (rng.uniform() < p_left) {
      const double u = rng.uniform();
      if (alpha == 0.0) {
        y = floor * std::exp(u * std::log(b / floor));
      } else {
        const double lo = std::pow(floor, -alpha);
        y = std::pow(lo - u * (lo - std::pow(b, -alpha)), -1.0 / alpha);
      }
      y = std::clamp(y, floor, b);
      accept = std::exp(-beta * (y - floor));
    } else {
      y = b + rng.exponential() / beta;
      accept = std::exp(-(alpha + 1.0) * std::log(y / b));
    }
    if (rng.uniform() < accept) {
      if (stats) ++stats->accepted;
      return y;
    }
  }
}

JumpPath sample_path_by_jumps(const LevySpec& spec, double horizon, double jump_floor, Rng& rng) {
  spec.validate();
  require_positive(horizon, "sample_path_by_jumps: horizon");
  require_positive(jump_floor, "sample_path_by_jumps: jump_floor");
  JumpPath path;
  path.horizon = horizon;
  path.jump_floor = jump_floor;
  path.compensator = horizon * small_jump_mean(spec, jump_floor);
  const std::uint64_t n = rng.poisson(horizon * levy_tail(spec, jump_floor));
  path.jumps.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    JumpRecord j;
    j.local_time_coordinate = horizon * rng.uniform();
    j.jump_size = sample_power_exp_tail(spec.alpha, spec.beta, jump_floor, rng);
    path.jumps.push_back(j);
  }
  std::sort(path.jumps.begin(), path.jumps.end(),
            [](const JumpRecord& x, const JumpRecord& y) { return x.local_time_coordinate < y.local_time_coordinate; });
  return path;
}

}  // namespace kreinlab::levy
