#include "kreinlab/mc.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "kreinlab/specialfn.hpp"

namespace kreinlab::mc {

namespace {

void require_samples(std::size_t n, const char* who) {
  if (n < 2) throw std::invalid_argument(std::string(who) + ": need at least two samples");
}

McEstimate from_values(std::span<const double> v) {
  const auto n = v.size();
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  McEstimate e;
  e.value = mean;
  e.std_error = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  e.n = n;
  return e;
}

}  // namespace

McEstimate& McEstimate::compare(double reference) {
  analytic = reference;
  const double diff = value - reference;
  if (std_error > 0.0) {
    z = diff / std_error;
  } else {
    z = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
  return *this;
}

McEstimate mean_estimate(std::span<const double> samples) {
  require_samples(samples.size(), "mean_estimate");
  return from_values(samples);
}

McEstimate empirical_laplace(std::span<const double> samples, double lambda) {
  require_samples(samples.size(), "empirical_laplace");
  if (!(lambda >= 0.0)) throw std::domain_error("empirical_laplace: lambda must be >= 0");
  std::vector<double> w(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) w[i] = std::exp(-lambda * samples[i]);
  McEstimate e = from_values(w);
  if (lambda == 0.0) {
    e.value = 1.0;
    e.std_error = 0.0;
  }
  e.param = lambda;
  return e;
}

McEstimate skewness(std::span<const double> samples) {
  require_samples(samples.size(), "skewness");
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  double m2 = 0.0;
  double m3 = 0.0;
  for (double x : samples) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  McEstimate e;
  e.n = samples.size();
  if (m2 == 0.0) return e;
  const double sd = std::sqrt(m2);
  const double g = m3 / (m2 * sd);
  // influence function of the skewness functional
  std::vector<double> inf(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double u = (samples[i] - mean) / sd;
    inf[i] = u * u * u - 3.0 * u - 1.5 * g * (u * u - 1.0);
  }
  const McEstimate spread = from_values(inf);
  e.value = g;
  e.std_error = spread.std_error;
  return e;
}

McEstimate correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("correlation: size mismatch");
  require_samples(x.size(), "correlation");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  McEstimate e;
  e.n = x.size();
  if (sxx == 0.0 || syy == 0.0) return e;
  const double r = sxy / std::sqrt(sxx * syy);
  const double sx = std::sqrt(sxx / n);
  const double sy = std::sqrt(syy / n);
  std::vector<double> inf(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = (x[i] - mx) / sx;
    const double b = (y[i] - my) / sy;
    inf[i] = a * b - 0.5 * r * (a * a + b * b);
  }
  e.value = r;
  e.std_error = from_values(inf).std_error;
  return e;
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return d;
}

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  constexpr double pi = std::numbers::pi;
  if (x < 1.0) {
    // P(K <= x) = sqrt(2 pi)/x sum_k exp(-(2k-1)^2 pi^2 / (8 x^2))
    double sum = 0.0;
    for (int k = 1; k < 50; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(-odd * odd * pi * pi / (8.0 * x * x));
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return 1.0 - std::sqrt(2.0 * pi) / x * sum;
  }
  double sum = 0.0;
  for (int k = 1; k < 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_pvalue(double d, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("ks_pvalue: n must be positive");
  const double rn = std::sqrt(static_cast<double>(n));
  return kolmogorov_survival((rn + 0.12 + 0.11 / rn) * d);
}

double ks_two_sample_pvalue(double d, std::uint64_t n, std::uint64_t m) {
  if (n == 0 || m == 0) throw std::invalid_argument("ks_two_sample_pvalue: sizes must be positive");
  const double ne = static_cast<double>(n) * static_cast<double>(m) / static_cast<double>(n + m);
  const double rn = std::sqrt(ne);
  return kolmogorov_survival((rn + 0.12 + 0.11 / rn) * d);
}

double chi_square_pvalue(double statistic, double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("chi_square_pvalue: dof must be positive");
  if (statistic <= 0.0) return 1.0;
  return specialfn::gamma_q(0.5 * dof, 0.5 * statistic);
}

double effective_z_max(double z_max, std::size_t m) {
  if (!(z_max > 0.0)) throw std::invalid_argument("effective_z_max: z_max must be positive");
  if (m <= 5) return z_max;
  const double per_test = 2.0 * specialfn::normal_cdf(-z_max);
  const double family = 5.0 * per_test;
  return -specialfn::normal_quantile(family / (2.0 * static_cast<double>(m)));
}

unsigned default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

Calibration calibrate_multiplier(std::span<const double> samples, std::span<const double> lambdas,
                                 const std::function<double(double)>& target,
                                 std::span<const double> candidates, double lo, double hi) {
  if (samples.empty() || lambdas.empty()) throw std::invalid_argument("calibrate_multiplier: empty input");
  std::vector<double> goal(lambdas.size());
  for (std::size_t j = 0; j < lambdas.size(); ++j) goal[j] = target(lambdas[j]);
  auto loss = [&](double k) {
    double sum = 0.0;
    for (std::size_t j = 0; j < lambdas.size(); ++j) {
      double acc = 0.0;
      for (double a : samples) acc += std::exp(-lambdas[j] * k * a);
      const double r = acc / static_cast<double>(samples.size()) - goal[j];
      sum += r * r;
    }
    return sum;
  };
  // golden-section search in log k
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = std::log(lo);
  double b = std::log(hi);
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = loss(std::exp(c));
  double fd = loss(std::exp(d));
  for (int it = 0; it < 80 && b - a > 1e-10; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = loss(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = loss(std::exp(d));
    }
  }
  Calibration out;
  out.k_continuous = std::exp(0.5 * (a + b));
  out.residual = std::numeric_limits<double>::infinity();
  for (double k : candidates) {
    const double r = loss(k);
    if (r < out.residual) {
      out.residual = r;
      out.k_selected = k;
    }
  }
  return out;
}

}  // namespace kreinlab::mc
