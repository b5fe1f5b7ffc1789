#pragma once

// The subordinators S^{alpha,beta} with Levy measure
//   nu(dy) = c e^{-beta y} y^{-alpha-1} dy,   0 <= alpha < 1, beta >= 0.
// alpha = 0 is the Gamma process (beta > 0 required), beta = 0 the one-sided
// stable process, anything else tempered stable.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "kreinlab/rng.hpp"

namespace kreinlab::levy {

enum class PsiNormalization {
  excursion,  ///< c = 2^alpha Gamma(alpha + 1)
  unit,             ///< c = 1
};

/// The normalization constant c selected by `mode` for index alpha.
double normalization_constant(double alpha, PsiNormalization mode);

struct LevySpec {
  double alpha = 0.5;
  double beta = 0.0;
  double c = 1.0;

  /// Throws std::invalid_argument unless 0 <= alpha < 1, beta >= 0, c > 0,
  /// and beta > 0 whenever alpha = 0.
  void validate() const;

  static LevySpec make(double alpha, double beta,
                       PsiNormalization mode = PsiNormalization::excursion);

  bool operator==(const LevySpec&) const = default;
};

struct JumpRecord {
  double local_time_coordinate = 0.0;
  double jump_size = 0.0;
};

struct JumpPath {
  std::vector<JumpRecord> jumps;  ///< sorted by local_time_coordinate
  double compensator = 0.0;       ///< T * int_0^eps y nu(dy), not included in jumps
  double horizon = 0.0;
  double jump_floor = 0.0;

  /// compensator plus the sum of all jump sizes
  double total() const;
};

/// Bookkeeping from the rejection samplers.
struct SamplerStats {
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
  std::uint64_t slices = 0;

  double acceptance_rate() const {
    return proposals == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposals);
  }
};

/// Raised when the tempered rejection loop exceeds its proposal cap.
class RejectionCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// c e^{-beta y} / y^{alpha+1}, y > 0.
double levy_density(const LevySpec& spec, double y);

/// nu((eps, inf)), eps > 0.
double levy_tail(const LevySpec& spec, double eps);

/// int_0^eps y nu(dy), eps > 0.
double small_jump_mean(const LevySpec& spec, double eps);

/// psi(lambda) = c Gamma(1-alpha)/alpha [(lambda+beta)^alpha - beta^alpha];
/// alpha = 0 gives c ln(1 + lambda/beta).
double laplace_exponent(const LevySpec& spec, double lambda);

/// psi(lambda) from the Levy-Khintchine integral c int (1 - e^{-lambda y}) ...
/// by quadrature; used as an independent check of laplace_exponent.
double laplace_exponent_by_quadrature(const LevySpec& spec, double lambda,
                                      double rel_tol = 1e-11);

/// Exponential tilt by a > 0: beta -> beta + a.
LevySpec esscher(const LevySpec& spec, double a);

struct SamplerOptions {
  double min_acceptance = 0.1;            ///< slice t until e^{-sigma beta^alpha} >= this
  std::uint64_t max_proposals = 100000;   ///< per slice
};

/// Positive alpha-stable variable with E e^{-lambda S} = exp(-lambda^alpha),
/// 0 < alpha < 1 (Kanter's representation).
double sample_standard_stable(double alpha, Rng& rng);

/// One draw of S_t.  Gamma and stable cases are exact; the tempered case uses
/// exponential-tilt rejection on stable proposals.
double sample_increment(const LevySpec& spec, double t, Rng& rng,
                        SamplerStats* stats = nullptr, const SamplerOptions& options = {});

/// Draw from the density proportional to y^{-alpha-1} e^{-beta y} on
/// [floor, inf).  Exact (piecewise envelope rejection).
double sample_power_exp_tail(double alpha, double beta, double floor, Rng& rng,
                             SamplerStats* stats = nullptr);

/// Poisson point process of jumps larger than jump_floor on [0, horizon],
/// with the small-jump mean reported separately.
JumpPath sample_path_by_jumps(const LevySpec& spec, double horizon, double jump_floor, Rng& rng);

}  // namespace kreinlab::levy
