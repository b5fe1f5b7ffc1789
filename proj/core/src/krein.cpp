#include "kreinlab/krein.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace kreinlab::krein {

namespace sf = kreinlab::specialfn;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEuler = 0.57721566490153286061;
constexpr double kLn2 = std::numbers::ln2;
// Below this argument K is replaced by its two-term small-argument form,
// whose neglected terms are O(y^2) relative.
constexpr double kTinyLog = -230.0;  // ln(1e-100)

void check_alpha(double alpha, const char* who) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::domain_error(std::string(who) + ": alpha must lie in [0, 1)");
  }
}

// Coefficients of x^a K_a(x) = A - B x^{2a} + O(x^2), 0 < a < 1.
double khat_a(double a) { return std::exp2(a - 1.0) * std::tgamma(a); }
double khat_b(double a) {
  return kPi / (2.0 * std::sin(kPi * a)) * std::exp2(-a) / std::tgamma(1.0 + a);
}

// ln K_alpha(e^v), valid for every real v (e^v may underflow).
double log_k(double alpha, double v) {
  if (v < kTinyLog) {
    if (alpha == 0.0) return std::log(kLn2 - kEuler - v);
    const double w = std::exp(2.0 * alpha * v);
    return std::log(khat_a(alpha) - khat_b(alpha) * w) - alpha * v;
  }
  const double y = std::exp(v);
  return std::log(sf::bessel_k_scaled(alpha, y)) - y;
}

// z K_{alpha+1}(z) / K_alpha(z) at z = e^v.
double z_k_ratio(double alpha, double v) {
  if (v < kTinyLog) {
    if (alpha == 0.0) return 1.0 / (kLn2 - kEuler - v);
    return 2.0 * alpha;
  }
  const double y = std::exp(v);
  return y * sf::bessel_k_scaled(alpha + 1.0, y) / sf::bessel_k_scaled(alpha, y);
}

// y s'(y) = 1 / K_alpha(y)^2 as a function of v = ln y.
double log_scale_integrand(double alpha, double v) { return std::exp(-2.0 * log_k(alpha, v)); }

double table_z_min(double alpha) {
  if (alpha == 0.0) return 1e-300;
  return std::max(1e-300, std::pow(10.0, -12.0 / (2.0 * alpha)));
}

// Inverse of the small-argument expansion
//   s_alpha(e^v) = w/(2 alpha A^2) + B w^2/(2 alpha A^3),  w = e^{2 alpha v}
// (1/(ln 2 - gamma_E - v) at alpha = 0), used below the first table node.
double asymptotic_scale_inverse_log(double alpha, double s) {
  if (alpha == 0.0) return kLn2 - kEuler - 1.0 / s;
  const double a = khat_a(alpha);
  const double b = khat_b(alpha);
  const double p = b / (2.0 * alpha * a * a * a);
  const double q = 1.0 / (2.0 * alpha * a * a);
  // p w^2 + q w - s = 0, positive root without cancellation
  const double w = 2.0 * s / (q + std::sqrt(q * q + 4.0 * p * s));
  return std::log(w) / (2.0 * alpha);
}

}  // namespace

DiffusionSpec DiffusionSpec::make(double alpha, double beta) {
  DiffusionSpec s{alpha, beta, std::sqrt(2.0 * beta)};
  s.validate();
  return s;
}

void DiffusionSpec::validate() const {
  check_alpha(alpha, "DiffusionSpec");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("DiffusionSpec: beta must be >= 0");
  if (alpha == 0.0 && beta == 0.0) throw std::invalid_argument("DiffusionSpec: alpha = 0 needs beta > 0");
  if (std::abs(theta * theta - 2.0 * beta) > 8.0 * std::numeric_limits<double>::epsilon() * 2.0 * beta) {
    throw std::invalid_argument("DiffusionSpec: theta must equal sqrt(2 beta)");
  }
}

// ---------------------------------------------------------------------------

double scale_density(double alpha, double z) {
  check_alpha(alpha, "scale_density");
  if (!(z > 0.0)) throw std::domain_error("scale_density: z must be > 0");
  return log_scale_integrand(alpha, std::log(z)) / z;
}

double scale_function(double alpha, double z, const sf::Accuracy& acc) {
  check_alpha(alpha, "scale_function");
  if (!(z >= 0.0)) throw std::domain_error("scale_function: z must be >= 0");
  if (z == 0.0) return 0.0;
  const double v = std::log(z);
  return sf::quad([alpha, v](double u) { return log_scale_integrand(alpha, v - u); }, 0.0, INFINITY, acc);
}

double scale_function(const DiffusionSpec& spec, double x, const sf::Accuracy& acc) {
  spec.validate();
  if (!(x >= 0.0)) throw std::domain_error("scale_function: x must be >= 0");
  if (spec.beta == 0.0) return std::pow(x, 2.0 * spec.alpha) / (2.0 * spec.alpha);
  return scale_function(spec.alpha, spec.theta * x, acc);
}

double scale_derivative(const DiffusionSpec& spec, double x) {
  spec.validate();
  if (!(x > 0.0)) throw std::domain_error("scale_derivative: x must be > 0");
  if (spec.beta == 0.0) return std::pow(x, 2.0 * spec.alpha - 1.0);
  return std::exp(-2.0 * log_k(spec.alpha, std::log(spec.theta * x))) / x;
}

double scale_second_derivative(const DiffusionSpec& spec, double x) {
  spec.validate();
  if (!(x > 0.0)) throw std::domain_error("scale_second_derivative: x must be > 0");
  const double a = spec.alpha;
  if (spec.beta == 0.0) return (2.0 * a - 1.0) * std::pow(x, 2.0 * a - 2.0);
  // differentiate 1/(x K(theta x)^2) with K' = -(K_{a-1} + K_{a+1})/2, K_{a-1} = K_{1-a}
  const double z = spec.theta * x;
  const double ka = sf::bessel_k_scaled(a, z);
  const double sum = sf::bessel_k_scaled(1.0 - a, z) + sf::bessel_k_scaled(a + 1.0, z);
  return scale_derivative(spec, x) * (-1.0 / x + spec.theta * sum / ka);
}

// ---------------------------------------------------------------------------

ScaleTable::ScaleTable(double alpha, double z_max, int per_unit, const sf::Accuracy& acc)
    : alpha_(alpha), acc_(acc) {
  check_alpha(alpha, "ScaleTable");
  if (!(z_max > 1e-3) || per_unit < 1) throw std::invalid_argument("ScaleTable: need z_max > 1e-3, per_unit >= 1");
  acc.validate();
  const double v_min = std::log(table_z_min(alpha));
  const double v_mid = std::log(1e-3);
  const double v_max = std::log(z_max);
  // coarse in ln z where the integrand is a slowly varying power or log
  const int coarse = std::max(1, static_cast<int>(std::ceil((v_mid - v_min) / 2.0)));
  for (int i = 0; i < coarse; ++i) z_.push_back(std::exp(v_min + (v_mid - v_min) * i / coarse));
  const int fine = std::max(1, static_cast<int>(std::ceil((v_max - v_mid) * per_unit)));
  for (int i = 0; i <= fine; ++i) z_.push_back(std::exp(v_mid + (v_max - v_mid) * i / fine));
  fill();
}

ScaleTable::ScaleTable(double alpha, std::vector<double> z, const sf::Accuracy& acc)
    : alpha_(alpha), acc_(acc), z_(std::move(z)) {
  fill();
}

void ScaleTable::fill() {
  s_.resize(z_.size());
  s_[0] = scale_function(alpha_, z_[0], acc_);
  for (std::size_t i = 1; i < z_.size(); ++i) s_[i] = s_[i - 1] + integrate(z_[i - 1], z_[i]);
  for (std::size_t i = 1; i < z_.size(); ++i) {
    if (!(s_[i] > s_[i - 1])) throw sf::ConvergenceError("ScaleTable: values not strictly increasing");
  }
}

double ScaleTable::integrate(double a, double b) const {
  const double alpha = alpha_;
  return sf::quad([alpha](double v) { return log_scale_integrand(alpha, v); }, std::log(a), std::log(b), acc_);
}

std::size_t ScaleTable::bracket_z(double z) const {
  const auto it = std::upper_bound(z_.begin(), z_.end(), z);
  return static_cast<std::size_t>(it - z_.begin()) - 1;
}

double ScaleTable::value(double z) const {
  if (!(z >= 0.0)) throw std::domain_error("ScaleTable::value: z must be >= 0");
  if (z == 0.0) return 0.0;
  if (z < z_.front()) return scale_function(alpha_, z, acc_);
  const std::size_t k = bracket_z(z);
  if (z == z_[k]) return s_[k];
  return s_[k] + integrate(z_[k], z);
}

double ScaleTable::interpolate(double z) const {
  if (z <= z_.front() || z >= z_.back()) return value(z);
  const std::size_t k = bracket_z(z);
  // cubic Hermite in (ln z, ln s) with slopes d ln s / d ln z = 1/(s K^2)
  const double v0 = std::log(z_[k]);
  const double v1 = std::log(z_[k + 1]);
  const double h = v1 - v0;
  const double t = (std::log(z) - v0) / h;
  const double d0 = log_scale_integrand(alpha_, v0) / s_[k];
  const double d1 = log_scale_integrand(alpha_, v1) / s_[k + 1];
  const double t2 = t * t;
  const double t3 = t2 * t;
  return std::exp((2 * t3 - 3 * t2 + 1) * std::log(s_[k]) + (t3 - 2 * t2 + t) * h * d0 +
                  (-2 * t3 + 3 * t2) * std::log(s_[k + 1]) + (t3 - t2) * h * d1);
}

double ScaleTable::max_interpolation_error() const {
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < z_.size(); ++k) {
    const double mid = std::exp(0.5 * (std::log(z_[k]) + std::log(z_[k + 1])));
    const double exact = value(mid);
    worst = std::max(worst, std::abs(interpolate(mid) - exact) / exact);
  }
  return worst;
}

ScaleTable ScaleTable::refined() const {
  std::vector<double> z;
  z.reserve(2 * z_.size());
  for (std::size_t k = 0; k + 1 < z_.size(); ++k) {
    z.push_back(z_[k]);
    z.push_back(std::exp(0.5 * (std::log(z_[k]) + std::log(z_[k + 1]))));
  }
  z.push_back(z_.back());
  return ScaleTable(alpha_, std::move(z), acc_);
}

double ScaleTable::inverse(double s) const { return std::exp(inverse_log(s)); }

double ScaleTable::inverse_log(double s) const {
  if (!(s >= 0.0) || s > s_.back()) throw std::out_of_range("scale_inverse: s outside [0, s_max]");
  if (s == 0.0) return -std::numeric_limits<double>::infinity();
  if (s < s_.front()) return asymptotic_scale_inverse_log(alpha_, s);
  const auto it = std::upper_bound(s_.begin(), s_.end(), s);
  std::size_t k = static_cast<std::size_t>(it - s_.begin()) - 1;
  if (k + 1 == s_.size()) return std::log(z_.back());
  const double alpha = alpha_;
  double lo = std::log(z_[k]);
  double hi = std::log(z_[k + 1]);
  const double base = s_[k];
  double v = lo + (hi - lo) * (s - s_[k]) / (s_[k + 1] - s_[k]);
  const double v_anchor = lo;
  for (int iter = 0; iter < 100; ++iter) {
    const double f = base + (v == v_anchor ? 0.0
                                           : sf::quad([alpha](double w) { return log_scale_integrand(alpha, w); },
                                                      v_anchor, v, acc_)) -
                     s;
    if (f > 0.0) {
      hi = v;
    } else {
      lo = v;
    }
    if (std::abs(f) <= 4.0 * std::numeric_limits<double>::epsilon() * s) return v;
    double next = v - f / log_scale_integrand(alpha, v);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - v) <= 1e-15 * std::max(1.0, std::abs(v))) return next;
    v = next;
  }
  throw sf::ConvergenceError("scale_inverse: Newton iteration did not converge");
}

double scale_inverse(const ScaleTable& table, double s) { return table.inverse(s); }

std::shared_ptr<const ScaleTable> shared_scale_table(double alpha) {
  check_alpha(alpha, "shared_scale_table");
  static std::mutex mutex;
  static std::map<double, std::shared_ptr<const ScaleTable>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[alpha];
  if (!slot) slot = std::make_shared<const ScaleTable>(alpha);
  return slot;
}

// ---------------------------------------------------------------------------

namespace {

double h_at_zero(double alpha) {
  if (alpha < 0.5) return 0.0;
  if (alpha == 0.5) return kPi * kPi / 2.0;
  return std::numeric_limits<double>::infinity();
}

// ln h and d ln h / d ln x at x, from v = ln z.
struct LogH {
  double value;
  double slope;
};

LogH log_h(double alpha, double x, double v) {
  const double lk = log_k(alpha, v);
  const double value = kLn2 + 2.0 * v + 4.0 * lk;
  // d ln h/d ln x = x K^2 (4 + 8 z K'/K),  z K'/K = alpha - z K_{a+1}/K_a
  const double xk2 = std::exp(std::log(x) + 2.0 * lk);
  const double slope = xk2 * (4.0 + 8.0 * (alpha - z_k_ratio(alpha, v)));
  return {value, slope};
}

}  // namespace

double h_function(double alpha, double x) {
  check_alpha(alpha, "h_function");
  if (!(x >= 0.0)) throw std::domain_error("h_function: x must be >= 0");
  if (x == 0.0) return h_at_zero(alpha);
  const auto table = shared_scale_table(alpha);
  return std::exp(log_h(alpha, x, table->inverse_log(2.0 * x)).value);
}

double h_log_slope(double alpha, double x) {
  check_alpha(alpha, "h_log_slope");
  if (!(x > 0.0)) throw std::domain_error("h_log_slope: x must be > 0");
  const auto table = shared_scale_table(alpha);
  return log_h(alpha, x, table->inverse_log(2.0 * x)).slope;
}

levy::LevySpec h_functional_spec(double alpha) {
  check_alpha(alpha, "h_functional_spec");
  levy::LevySpec s{alpha, 1.0, std::tgamma(1.0 + alpha)};
  s.validate();
  return s;
}

HFunction::HFunction(double alpha, double step, double x_max) : alpha_(alpha), step_(step) {
  check_alpha(alpha, "HFunction");
  if (!(step > 0.0 && step <= 0.1)) throw std::invalid_argument("HFunction: step must lie in (0, 0.1]");
  const auto table = shared_scale_table(alpha);
  if (!(2.0 * x_max < table->s_max())) throw std::invalid_argument("HFunction: x_max beyond scale table");
  inv_step_ = 1.0 / step;
  h0_ = h_at_zero(alpha);
  // alpha = 0: below z = 1e-30 the function is below 1e-50 and treated as 0
  const double z_lo = alpha == 0.0 ? 1e-30 : table->nodes().front();
  const double x_lo = 0.5 * table->value(z_lo);
  u0_ = std::log(x_lo);
  const auto n = static_cast<std::size_t>(std::ceil((std::log(x_max) - u0_) / step));
  lh_.resize(n + 1);
  slope_.resize(n + 1);
  // Sweep upward in x.  Each node solves s(e^v) = 2x by Newton from the
  // previous node, integrating the scale density over the short gap only.
  const sf::Accuracy acc{1e-13, 1e-300, 200};
  double v = table->inverse_log(2.0 * x_lo);
  double s_anchor = 2.0 * x_lo;
  double v_anchor = v;
  for (std::size_t j = 0; j <= n; ++j) {
    const double x = std::exp(u0_ + step * static_cast<double>(j));
    if (j > 0) {
      const double target = 2.0 * x;
      v += step * 2.0 * std::exp(std::log(x) + 2.0 * log_k(alpha, v));  // dv/d ln x = 2 x K^2
      for (int iter = 0; iter < 20; ++iter) {
        const double f = s_anchor +
                         sf::quad([alpha](double w) { return log_scale_integrand(alpha, w); }, v_anchor, v, acc) -
                         target;
        const double dv = f / log_scale_integrand(alpha, v);
        v -= dv;
        if (std::abs(dv) <= 1e-14 * std::max(1.0, std::abs(v))) break;
      }
      v_anchor = v;
      s_anchor = target;
    }
    const LogH r = log_h(alpha, x, v);
    lh_[j] = r.value;
    slope_[j] = r.slope;
  }
}

// ---------------------------------------------------------------------------

double drift_coefficient(const DiffusionSpec& spec, double x) {
  spec.validate();
  if (!(x > 0.0)) throw std::domain_error("drift_coefficient: x must be > 0");
  const double a = spec.alpha;
  if (spec.beta == 0.0) return (1.0 - 2.0 * a) / (2.0 * x);
  const double z = spec.theta * x;
  return (1.0 + 2.0 * a) / (2.0 * x) - spec.theta * sf::bessel_k_scaled(a + 1.0, z) / sf::bessel_k_scaled(a, z);
}

double speed_density(const DiffusionSpec& spec, double x) {
  spec.validate();
  if (!(x > 0.0)) throw std::domain_error("speed_density: x must be > 0");
  return 2.0 / scale_derivative(spec, x);
}

double phi_down(const DiffusionSpec& spec, double a, double x) {
  spec.validate();
  if (!(a > 0.0)) throw std::domain_error("phi_down: a must be > 0");
  if (!(x >= 0.0)) throw std::domain_error("phi_down: x must be >= 0");
  if (x == 0.0) return 1.0;
  const double al = spec.alpha;
  const double kappa = std::sqrt(2.0 * (spec.beta + a));
  if (spec.beta == 0.0) return sf::bessel_k_hat(al, kappa * x) / sf::bessel_k_hat(al, 0.0);
  const double th = spec.theta;
  const double log_ratio = al * std::log(kappa / th) - (kappa - th) * x +
                           std::log(sf::bessel_k_scaled(al, kappa * x) / sf::bessel_k_scaled(al, th * x));
  return std::exp(log_ratio);
}

double gig_hitting_density(double x0, double beta, double t) {
  if (!(x0 > 0.0) || !(beta > 0.0) || !(t > 0.0)) {
    throw std::domain_error("gig_hitting_density: arguments must be positive");
  }
  const double y = x0 * std::sqrt(2.0 * beta);
  const double log_k0 = std::log(sf::bessel_k_scaled(0.0, y)) - y;
  return std::exp(-0.5 * (x0 * x0 / t + 2.0 * beta * t) - std::log(2.0 * t) - log_k0);
}

double gig_laplace_by_quadrature(double x0, double beta, double gamma, double rel_tol) {
  if (!(gamma >= 0.0)) throw std::domain_error("gig_laplace_by_quadrature: gamma must be >= 0");
  auto f = [=](double t) { return t == 0.0 ? 0.0 : std::exp(-gamma * t) * gig_hitting_density(x0, beta, t); };
  // mode of t^{-1} exp(-x0^2/(2t) - (beta + gamma) t)
  const double b = beta + gamma;
  const double peak = (-1.0 + std::sqrt(1.0 + 2.0 * b * x0 * x0)) / (2.0 * b);
  const sf::Accuracy acc{rel_tol, 1e-300, 4000};
  return sf::quad(f, 0.0, peak, acc) + sf::quad(f, peak, INFINITY, acc, sf::Transform::log_right);
}

double representation_constant(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("representation_constant: alpha in (0, 1)");
  const double r = std::pow(alpha, alpha) / std::tgamma(alpha);
  return kPi / (alpha * std::sin(kPi * alpha)) * r * r;
}

double representation_time_scale(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("representation_time_scale: alpha in (0, 1)");
  const double g = std::tgamma(alpha);
  return g * g / std::pow(alpha, 2.0 * alpha - 1.0);
}

}  // namespace kreinlab::krein
