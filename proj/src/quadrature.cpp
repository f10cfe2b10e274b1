#include "holder/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "holder/error.hpp"

namespace holder {
namespace {

// Kronrod abscissae on [0,1] (symmetric), Kronrod and Gauss weights.
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

struct Segment {
  double a;
  double b;
  double value;
  double error;
  int depth;
  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gauss_kronrod15(const Integrand& f, double a, double b, int depth) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double result_gauss = fc * kWg[3];
  double result_kronrod = fc * kWgk[7];
  double result_abs = std::abs(result_kronrod);
  std::array<double, 7> f1{};
  std::array<double, 7> f2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = f(center - dx);
    f2[j] = f(center + dx);
    const double sum = f1[j] + f2[j];
    result_kronrod += kWgk[j] * sum;
    result_abs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) result_gauss += kWg[j / 2] * sum;
  }
  const double mean = 0.5 * result_kronrod;
  double result_asc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j)
    result_asc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

  const double value = result_kronrod * half;
  result_abs *= std::abs(half);
  result_asc *= std::abs(half);
  double err = std::abs((result_kronrod - result_gauss) * half);
  if (result_asc != 0.0 && err != 0.0)
    err = result_asc * std::min(1.0, std::pow(200.0 * err / result_asc, 1.5));
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  if (result_abs > std::numeric_limits<double>::min() / (50.0 * kEps))
    err = std::max(50.0 * kEps * result_abs, err);
  return {a, b, value, err, depth};
}

}  // namespace

QuadResult integrate(const Integrand& f, double a, double b,
                     const QuadSettings& settings) {
  QuadResult out;
  if (a == b) return out;
  if (!std::isfinite(a) || !std::isfinite(b))
    throw QuadratureError("integrate: infinite limits need integrate_to_infinity");

  std::priority_queue<Segment> heap;
  Segment first = gauss_kronrod15(f, a, b, 0);
  out.evaluations = 15;
  double total = first.value;
  double total_err = first.error;
  heap.push(first);
  std::vector<Segment> frozen;  // segments at max depth

  auto tolerance = [&] {
    return std::max(settings.abs_tol, settings.rel_tol * std::abs(total));
  };

  while (total_err > tolerance() && !heap.empty() &&
         heap.size() + frozen.size() < settings.max_intervals) {
    Segment worst = heap.top();
    heap.pop();
    if (worst.depth >= settings.max_depth) {
      frozen.push_back(worst);
      continue;
    }
    const double mid = 0.5 * (worst.a + worst.b);
    Segment left = gauss_kronrod15(f, worst.a, mid, worst.depth + 1);
    Segment right = gauss_kronrod15(f, mid, worst.b, worst.depth + 1);
    out.evaluations += 30;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum to remove drift from the incremental updates.
  total = 0.0;
  total_err = 0.0;
  for (const auto& s : frozen) {
    total += s.value;
    total_err += s.error;
  }
  while (!heap.empty()) {
    total += heap.top().value;
    total_err += heap.top().error;
    heap.pop();
  }
  out.value = total;
  out.error = total_err;
  out.converged = std::isfinite(total) && total_err <= tolerance();
  return out;
}

double integrate_checked(const Integrand& f, double a, double b,
                         const QuadSettings& settings) {
  const QuadResult r = integrate(f, a, b, settings);
  if (!r.converged) {
    std::ostringstream msg;
    msg << "quadrature did not converge on [" << a << ", " << b
        << "]: estimate " << r.value << ", error " << r.error << " after "
        << r.evaluations << " evaluations";
    throw QuadratureError(msg.str());
  }
  return r.value;
}

double integrate_upper_singular(const Integrand& f, double a, double m,
                                double gamma, const QuadSettings& settings) {
  if (m <= a) return 0.0;
  if (!(gamma < 0.0)) return integrate_checked(f, a, m, settings);
  if (gamma <= -0.5)
    throw QuadratureError("singularity exponent must exceed -1/2");
  const double k = 1.0 / (1.0 + 2.0 * gamma);
  const double v_max = std::pow(m - a, 1.0 / k);
  // k v^(k-1) equals k (m-u)^(-2 gamma); using the represented distance m-u
  // keeps the product bounded where v^k drops below the spacing of doubles at m.
  const double closest = std::nextafter(m, a);
  auto g = [&](double v) {
    const double u = std::min(m - std::pow(v, k), closest);
    return f(u) * k * std::pow(m - u, -2.0 * gamma);
  };
  return integrate_checked(g, 0.0, v_max, settings);
}

double integrate_to_infinity(const Integrand& f, double a,
                             const QuadSettings& settings) {
  if (!(a > 0.0)) throw QuadratureError("integrate_to_infinity needs a > 0");
  auto g = [&](double x) {
    if (x <= 0.0) return 0.0;
    const double u = a / x;
    const double v = f(u) * a / (x * x);
    return std::isfinite(v) ? v : 0.0;
  };
  return integrate_checked(g, 0.0, 1.0, settings);
}

double wynn_epsilon(std::span<const double> partial_sums) {
  const std::size_t n = partial_sums.size();
  if (n == 0) return 0.0;
  if (n < 3) return partial_sums.back();
  // eps[k] holds column k of the current antidiagonal.
  std::vector<double> prev(partial_sums.begin(), partial_sums.end());
  std::vector<double> prev2(n + 1, 0.0);
  double best = partial_sums.back();
  double best_change = std::numeric_limits<double>::infinity();
  double last_even = partial_sums.back();
  for (std::size_t col = 1; col < n; ++col) {
    std::vector<double> cur(n - col);
    bool ok = true;
    for (std::size_t i = 0; i < n - col; ++i) {
      const double diff = prev[i + 1] - prev[i];
      if (diff == 0.0 || !std::isfinite(diff)) {
        ok = false;
        break;
      }
      const double base = col >= 2 ? prev2[i + 1] : 0.0;
      cur[i] = base + 1.0 / diff;
    }
    if (!ok) break;
    if (col % 2 == 0) {
      const double candidate = cur.back();
      const double change = std::abs(candidate - last_even);
      if (std::isfinite(candidate) && change <= best_change) {
        best = candidate;
        best_change = change;
      }
      last_even = candidate;
    }
    prev2.assign(prev.begin(), prev.end());
    prev = std::move(cur);
    if (prev.size() < 2) break;
  }
  return best;
}

}  // namespace holder
