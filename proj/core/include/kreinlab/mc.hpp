#pragma once

// Monte Carlo harness: estimates with standard errors, goodness-of-fit
// statistics, and deterministic replication-parallel execution.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace kreinlab::mc {

struct McEstimate {
  std::string label;  ///< e.g. "laplace(lambda=0.5)"
  double param = 0.0;
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t n = 0;
  std::optional<double> analytic;
  std::optional<double> z;

  /// Attach a reference value and fill z.  A zero standard error yields
  /// z = 0 on exact agreement and +-inf otherwise.
  McEstimate& compare(double reference);
};

/// Sample mean with standard error sd/sqrt(n).  Needs n >= 2.
McEstimate mean_estimate(std::span<const double> samples);

/// Mean and SE of e^{-lambda X}.  lambda = 0 gives exactly (1, 0).
McEstimate empirical_laplace(std::span<const double> samples, double lambda);

/// Sample skewness with a delta-method standard error.
McEstimate skewness(std::span<const double> samples);

/// Pearson correlation with a delta-method standard error.
McEstimate correlation(std::span<const double> x, std::span<const double> y);

/// sup |F_n - F|.  `samples` need not be sorted.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);

/// sup |F_n - G_m| between two samples.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// P(K > x) for the limiting Kolmogorov distribution.
double kolmogorov_survival(double x);

/// Asymptotic p-value of a one-sample KS statistic d from n points
/// (with Stephens' finite-n correction).
double ks_pvalue(double d, std::uint64_t n);

/// Two-sample version with effective size nm/(n+m).
double ks_two_sample_pvalue(double d, std::uint64_t n, std::uint64_t m);

/// Upper tail of the chi-square distribution with dof degrees of freedom.
double chi_square_pvalue(double statistic, double dof);

/// Per-estimate |z| threshold for an experiment scoring m estimates.  Up to
/// five estimates use z_max as is; beyond that the per-estimate level is
/// tightened so the family-wise level stays at that of five.
double effective_z_max(double z_max, std::size_t m);

/// Worker count used when `threads` is 0.
unsigned default_threads();

/// Evaluate f(i) for i in [0, n) across `threads` workers and return the
/// results in index order.  Because every replication owns its random
/// stream, the output does not depend on the thread count.
template <class F>
auto replicate(std::uint64_t n, unsigned threads, F&& f) -> std::vector<decltype(f(std::uint64_t{}))> {
  using T = decltype(f(std::uint64_t{}));
  std::vector<T> out(n);
  if (threads == 0) threads = default_threads();
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(n, 1)));
  if (threads <= 1) {
    for (std::uint64_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  constexpr std::uint64_t chunk = 64;
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    try {
      while (!failed.load(std::memory_order_relaxed)) {
        const std::uint64_t start = next.fetch_add(chunk);
        if (start >= n) break;
        const std::uint64_t stop = std::min(n, start + chunk);
        for (std::uint64_t i = start; i < stop; ++i) out[i] = f(i);
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Least-squares fit of a multiplier k so that the Laplace transform of k*A
/// over `lambdas` matches `target(lambda)`.
struct Calibration {
  double k_continuous = 0.0;  ///< golden-section minimizer on [lo, hi]
  double k_selected = 0.0;    ///< best of the candidate set
  double residual = 0.0;      ///< sum of squares at k_selected
};

Calibration calibrate_multiplier(std::span<const double> samples, std::span<const double> lambdas,
                                 const std::function<double(double)>& target,
                                 std::span<const double> candidates, double lo = 0.1, double hi = 10.0);

}  // namespace kreinlab::mc
