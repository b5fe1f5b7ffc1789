#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "kreinlab/specialfn.hpp"

namespace kreinlab::specialfn {

namespace {

// Kronrod 15-point abscissae; odd indices are the 7-point Gauss nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Piece& other) const { return error < other.error; }
};

template <class F>
Piece gauss_kronrod(const F& g, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = g(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  std::array<double, 7> f1{};
  std::array<double, 7> f2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = g(center - dx);
    f2[j] = g(center + dx);
    kronrod += kWgk[j] * (f1[j] + f2[j]);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1[j] + f2[j]);
  }
  const double mean = 0.5 * kronrod;
  double asc = kWgk[7] * std::abs(fc - mean);
  double abs_sum = kWgk[7] * std::abs(fc);
  for (int j = 0; j < 7; ++j) {
    asc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
    abs_sum += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
  }
  const double value = kronrod * half;
  asc *= std::abs(half);
  abs_sum *= std::abs(half);
  double err = std::abs((kronrod - gauss) * half);
  if (asc != 0.0 && err != 0.0) {
    err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (abs_sum > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(err, 50.0 * eps * abs_sum);
  }
  return {a, b, value, err};
}

template <class F>
QuadResult adaptive(const F& g, double a, double b, const Accuracy& acc) {
  std::priority_queue<Piece> heap;
  Piece first = gauss_kronrod(g, a, b);
  double total = first.value;
  double total_err = first.error;
  heap.push(first);
  int count = 1;
  while (total_err > std::max(acc.abs_tol, acc.rel_tol * std::abs(total))) {
    if (count >= acc.max_subdivisions) {
      throw ConvergenceError("quad: no convergence within max_subdivisions (estimate " +
                             std::to_string(total) + ", error " +
                             std::to_string(total_err) + ")");
    }
    const Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw ConvergenceError("quad: interval collapsed below machine resolution");
    }
    const Piece left = gauss_kronrod(g, worst.a, mid);
    const Piece right = gauss_kronrod(g, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++count;
    if (count % 64 == 0) {
      // re-sum to shed accumulated cancellation in the running totals
      std::vector<Piece> all;
      all.reserve(heap.size());
      total = 0.0;
      total_err = 0.0;
      while (!heap.empty()) {
        all.push_back(heap.top());
        total += heap.top().value;
        total_err += heap.top().error;
        heap.pop();
      }
      for (const auto& p : all) heap.push(p);
    }
  }
  return {total, total_err, count};
}

}  // namespace

QuadResult quad_detail(const Integrand& f, double a, double b,
                       const Accuracy& acc, Transform transform) {
  acc.validate();
  if (!std::isfinite(a)) throw std::domain_error("quad: lower limit must be finite");
  if (std::isnan(b)) throw std::domain_error("quad: upper limit is NaN");
  if (a == b) return {};

  auto checked = [&f](double x) {
    const double v = f(x);
    if (!std::isfinite(v)) {
      throw ConvergenceError("quad: integrand not finite at x = " + std::to_string(x));
    }
    return v;
  };

  const bool infinite = std::isinf(b);
  if (infinite && b < 0) throw std::domain_error("quad: upper limit -inf unsupported");
  if (!infinite && b < a) {
    QuadResult r = quad_detail(f, b, a, acc, transform);
    r.value = -r.value;
    return r;
  }

  // Every transformed integral lands on u in [0, inf), then s in (0, 1].
  auto over_half_line = [&](auto&& h) {
    auto g = [&h](double s) {
      const double u = (1.0 - s) / s;
      return h(u) / (s * s);
    };
    return adaptive(g, 0.0, 1.0, acc);
  };

  switch (transform) {
    case Transform::none:
      if (!infinite) return adaptive(checked, a, b, acc);
      return over_half_line([&](double u) { return checked(a + u); });
    case Transform::log_left: {
      if (infinite) throw std::domain_error("quad: log_left needs a finite upper limit");
      const double width = b - a;
      return over_half_line([&](double u) {
        const double jac = width * std::exp(-u);
        if (jac == 0.0) return 0.0;
        return checked(a + jac) * jac;
      });
    }
    case Transform::log_right: {
      if (!(a > 0.0) || !infinite) {
        throw std::domain_error("quad: log_right needs a > 0 and b = +inf");
      }
      return over_half_line([&](double u) {
        const double x = a * std::exp(u);
        if (!std::isfinite(x)) return 0.0;
        return checked(x) * x;
      });
    }
  }
  throw std::logic_error("quad: unknown transform");
}

}  // namespace kreinlab::specialfn
