#include "holder/pathstats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "holder/error.hpp"
#include "holder/parallel.hpp"
#include "holder/random.hpp"

namespace holder {
namespace {

void require_path(const SamplePath& path, std::size_t min_points) {
  if (path.grid.size() != path.values.size())
    throw ParameterError("path grid and values differ in length");
  if (path.grid.size() < min_points)
    throw InsufficientDataError("path needs at least " + std::to_string(min_points) +
                                " points");
  for (std::size_t i = 1; i < path.grid.size(); ++i)
    if (!(path.grid[i] > path.grid[i - 1]))
      throw ParameterError("path grid must be strictly increasing");
}

double require_uniform(const SamplePath& path, const char* what) {
  const auto step = uniform_step(path.grid);
  if (!step) throw CapabilityError(std::string(what) + " requires a uniform grid");
  return *step;
}

// Offsets scanned for a path of n points: all of them, or powers of two.
std::vector<std::size_t> scan_offsets(std::size_t n, std::size_t full_scan_limit,
                                      bool* restricted) {
  std::vector<std::size_t> offsets;
  *restricted = n > full_scan_limit;
  if (!*restricted) {
    offsets.resize(n - 1);
    std::iota(offsets.begin(), offsets.end(), std::size_t{1});
  } else {
    for (std::size_t k = 1; k < n; k *= 2) offsets.push_back(k);
  }
  return offsets;
}

double percentile(std::vector<double> sorted_values, double q) {
  std::sort(sorted_values.begin(), sorted_values.end());
  const double pos = q * static_cast<double>(sorted_values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted_values.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return sorted_values[lo] * (1.0 - w) + sorted_values[hi] * w;
}

template <class Stat>
double bootstrap_half_width(std::span<const double> values, std::size_t resamples,
                            std::uint64_t seed, Stat&& stat) {
  if (resamples == 0 || values.size() < 2) return 0.0;
  boost::random::mt19937_64 engine(splitmix64(seed));
  boost::random::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> draw(values.size());
  std::vector<double> stats(resamples);
  for (auto& s : stats) {
    for (auto& d : draw) d = values[pick(engine)];
    s = stat(std::span<const double>(draw));
  }
  return 0.5 * (percentile(stats, 0.975) - percentile(stats, 0.025));
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double max_of(std::span<const double> v) { return *std::max_element(v.begin(), v.end()); }

}  // namespace

HolderStat path_holder_constant(const SamplePath& path, double a,
                                std::size_t full_scan_limit) {
  if (!(a >= 0.0 && a <= 1.0)) throw ParameterError("Holder order must lie in [0, 1]");
  require_path(path, 2);
  const auto& t = path.grid;
  const auto& x = path.values;
  const std::size_t n = t.size();
  HolderStat out;
  out.order = a;
  const auto offsets = scan_offsets(n, full_scan_limit, &out.restricted);
  const auto step = uniform_step(t);
  double best = -1.0;
  for (const std::size_t k : offsets) {
    const double lag_power = step ? std::pow(static_cast<double>(k) * *step, a) : 0.0;
    for (std::size_t i = 0; i + k < n; ++i) {
      const double denom = step ? lag_power : std::pow(t[i + k] - t[i], a);
      const double r = std::abs(x[i + k] - x[i]) / denom;
      // Ties go to the earliest pair in (i, j) order.
      const bool earlier = r == best && std::make_pair(t[i], t[i + k]) < out.argmax;
      if (r > best || earlier) {
        best = r;
        out.argmax = {t[i], t[i + k]};
      }
    }
  }
  out.constant = std::max(best, 0.0);
  return out;
}

std::vector<std::size_t> default_path_lags() { return {1, 2, 4, 8}; }

std::vector<DecayPoint> path_increment_decay(const SamplePath& path,
                                             std::span<const std::size_t> lag_steps) {
  require_path(path, 2);
  const double step = require_uniform(path, "path_increment_decay");
  const auto& x = path.values;
  std::vector<DecayPoint> out;
  out.reserve(lag_steps.size());
  for (const std::size_t k : lag_steps) {
    if (k == 0 || k >= x.size())
      throw ParameterError("lag of " + std::to_string(k) + " steps outside the path");
    double m = 0.0;
    for (std::size_t i = 0; i + k < x.size(); ++i) m = std::max(m, std::abs(x[i + k] - x[i]));
    out.push_back({static_cast<double>(k) * step, m});
  }
  return out;
}

ExponentFit path_holder_exponent(const SamplePath& path,
                                 std::span<const std::size_t> lag_steps) {
  const auto decay = path_increment_decay(path, lag_steps);
  return fit_holder_exponent(decay);
}

double grr_xi(const SamplePath& path, double H, double eps) {
  if (!(H > 0.0 && H < 1.0)) throw ParameterError("H must lie in (0, 1)");
  if (!(eps > 0.0 && eps < 2.0 * H)) throw ParameterError("eps must lie in (0, 2H)");
  require_path(path, 2);
  const double step = require_uniform(path, "grr_xi");
  const auto& x = path.values;
  const std::size_t n = x.size();
  const double p = 2.0 / eps;
  const double q = 2.0 * H / eps;
  // Online log-sum-exp of p log|dx| - q log(k step) over ordered pairs i < j.
  double m = -std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    const double lag_term = q * std::log(static_cast<double>(k) * step);
    for (std::size_t i = 0; i + k < n; ++i) {
      const double dx = std::abs(x[i + k] - x[i]);
      if (dx == 0.0) continue;
      const double l = p * std::log(dx) - lag_term;
      if (l > m) {
        s = s * std::exp(m - l) + 1.0;
        m = l;
      } else {
        s += std::exp(l - m);
      }
    }
  }
  if (s == 0.0) return 0.0;
  const double log_sum = std::log(2.0) + 2.0 * std::log(step) + m + std::log(s);
  return std::exp(0.5 * eps * log_sum);
}

double grr_ratio(const SamplePath& path, double H, double eps) {
  const double a = H - eps;
  if (!(a >= 0.0)) throw ParameterError("grr_ratio needs eps <= H");
  const double xi = grr_xi(path, H, eps);
  const double c = path_holder_constant(path, a).constant;
  if (c == 0.0) throw ParameterError("grr_ratio is undefined for a constant path");
  if (xi == 0.0)
    throw NumericalConsistencyError("GRR functional vanished on a non-constant path");
  const double horizon = path.grid.back() - path.grid.front();
  return c / (std::pow(horizon, a) * xi);
}

GrrConstantEstimate grr_constant_estimate(std::span<const SamplePath> paths, double H,
                                          double eps, unsigned threads) {
  if (paths.size() < 2) throw InsufficientDataError("grr_constant_estimate needs >= 2 paths");
  GrrConstantEstimate out;
  out.ratios.resize(paths.size());
  parallel_for(paths.size(), threads,
               [&](std::size_t i) { out.ratios[i] = grr_ratio(paths[i], H, eps); });
  const std::span<const double> r(out.ratios);
  const std::size_t half = r.size() / 2;
  auto& est = out.max_ratio;
  est.value = max_of(r);
  est.n_samples = r.size();
  est.stability = relative_change(max_of(r.first(half)), est.value);
  est.half_width = bootstrap_half_width(r, 1000, 0x9e3779b97f4a7c15ULL, max_of);
  est.stable = std::isfinite(est.value);
  out.mean = mean_of(r);
  out.min = *std::min_element(r.begin(), r.end());
  out.median = percentile(out.ratios, 0.5);
  return out;
}

double gaussian_abs_moment(double sigma, double q) {
  if (!(sigma >= 0.0)) throw ParameterError("sigma must be non-negative");
  if (!(q > 0.0)) throw ParameterError("moment order must be positive");
  if (sigma == 0.0) return 0.0;
  const double log_value = q * std::log(sigma) + 0.5 * q * std::log(2.0) +
                           std::lgamma(0.5 * (q + 1.0)) - 0.5 * std::log(std::numbers::pi);
  return std::exp(log_value);
}

MomentEstimate exp_moment_estimate(std::span<const double> samples, double a, double kappa,
                                   const ExpMomentOptions& opts) {
  if (samples.size() < 100)
    throw InsufficientDataError("exp_moment_estimate needs >= 100 samples");
  if (!(kappa > 0.0 && kappa <= 2.0)) throw ParameterError("kappa must lie in (0, 2]");
  if (kappa == 2.0 && a > 0.0) {
    const double c =
        opts.moment_constant > 0.0 ? opts.moment_constant : moment_bound_constant(samples);
    const double a_max = kappa2_a_max(c);
    if (a >= a_max) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "kappa = 2 requires a < %.6g (moment constant %.6g); got a = %.6g", a_max,
                    c, a);
      throw ParameterError(buf);
    }
  }
  std::vector<double> values(samples.size());
  MomentEstimate out;
  out.n_samples = samples.size();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) throw ParameterError("non-finite sample");
    values[i] = a == 0.0 ? 1.0 : std::exp(a * std::pow(std::abs(samples[i]), kappa));
    if (!std::isfinite(values[i])) ++out.overflow_count;
  }
  if (out.overflow_count > 0) {
    out.value = std::numeric_limits<double>::infinity();
    out.half_width = std::numeric_limits<double>::infinity();
    out.stability = std::numeric_limits<double>::infinity();
    out.stable = false;
    return out;
  }
  const std::span<const double> v(values);
  out.value = mean_of(v);
  out.stability = relative_change(mean_of(v.first(v.size() / 2)), out.value);
  out.half_width =
      bootstrap_half_width(v, opts.bootstrap_resamples, opts.bootstrap_seed, mean_of);
  out.stable = out.stability < opts.stability_tol;
  return out;
}

std::string to_string(SeriesVerdict v) {
  switch (v) {
    case SeriesVerdict::converged: return "converged";
    case SeriesVerdict::diverged: return "diverged";
    case SeriesVerdict::undetermined: return "undetermined";
  }
  return "undetermined";
}

SeriesResult exp_moment_series(double a, double c, double kappa, std::size_t J) {
  if (J < 2) throw ParameterError("series needs J >= 2");
  if (!(c >= 0.0) || !std::isfinite(c)) throw ParameterError("c must be finite and >= 0");
  if (!(kappa > 0.0)) throw ParameterError("kappa must be positive");
  if (!std::isfinite(a)) throw ParameterError("a must be finite");
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  SeriesResult out;
  out.log_abs_terms.resize(J + 1);
  out.partial_sums.resize(J + 1);
  out.term_ratios.resize(J);
  const bool trivial = a == 0.0 || c == 0.0;
  double sum = 0.0;
  for (std::size_t j = 0; j <= J; ++j) {
    const double jd = static_cast<double>(j);
    // The j = 0 term is normalised to 1 so that S_0 = 1.
    double log_term = 0.0;
    if (j > 0)
      log_term = trivial ? neg_inf
                         : jd * std::log(std::abs(a)) + kappa * jd * std::log(c) +
                               std::lgamma(0.5 * (kappa * jd + 1.0)) - std::lgamma(jd + 1.0);
    out.log_abs_terms[j] = log_term;
    const double sign = (a < 0.0 && j % 2 == 1) ? -1.0 : 1.0;
    sum += sign * std::exp(log_term);
    out.partial_sums[j] = sum;
    if (j > 0) {
      const double prev = out.log_abs_terms[j - 1];
      out.term_ratios[j - 1] = log_term == neg_inf ? 0.0 : std::exp(log_term - prev);
    }
  }
  if (trivial) {
    out.verdict = SeriesVerdict::converged;
    return out;
  }
  double limit = std::numeric_limits<double>::infinity();
  if (kappa < 2.0) limit = 0.0;
  else if (kappa == 2.0) limit = std::abs(a) * c * c;
  const std::size_t window = std::min<std::size_t>(10, out.term_ratios.size());
  const auto tail = std::span<const double>(out.term_ratios).last(window);
  const bool below = std::all_of(tail.begin(), tail.end(), [](double r) { return r < 1.0; });
  const bool above = std::all_of(tail.begin(), tail.end(), [](double r) { return r > 1.0; });
  bool decreasing = true;
  bool increasing = true;
  for (std::size_t i = 1; i < tail.size(); ++i) {
    decreasing = decreasing && tail[i] <= tail[i - 1] * (1.0 + 1e-12);
    increasing = increasing && tail[i] >= tail[i - 1] * (1.0 - 1e-12);
  }
  if (below && (decreasing || limit < 1.0)) out.verdict = SeriesVerdict::converged;
  else if (above && (increasing || limit > 1.0)) out.verdict = SeriesVerdict::diverged;
  return out;
}

double kappa2_a_max(double c) {
  if (!(c >= 0.0)) throw ParameterError("c must be >= 0");
  if (c == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (c * c);
}

double moment_bound_constant(std::span<const double> samples, int p_max) {
  if (samples.empty()) throw InsufficientDataError("no samples");
  if (p_max < 1) throw ParameterError("p_max must be >= 1");
  std::vector<double> logs;
  logs.reserve(samples.size());
  for (const double s : samples)
    if (s != 0.0) logs.push_back(std::log(std::abs(s)));
  if (logs.empty()) return 0.0;
  const double log_n = std::log(static_cast<double>(samples.size()));
  const double log_max = *std::max_element(logs.begin(), logs.end());
  double c = 0.0;
  for (int p = 1; p <= p_max; ++p) {
    double acc = 0.0;
    for (const double l : logs) acc += std::exp(p * (l - log_max));
    const double log_mean = p * log_max + std::log(acc) - log_n;
    const double log_c = (log_mean - std::lgamma(0.5 * (p + 1.0))) / p;
    c = std::max(c, std::exp(log_c));
  }
  return c;
}

double tail_variance_bound(double x, double p) {
  if (!(x > 0.0)) throw ParameterError("threshold must be positive");
  if (p == 0.0) throw ParameterError("probability 0 makes the bound vacuous");
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("probability must lie in (0, 1]");
  return 2.0 * x * x / (std::numbers::pi * p * p);
}

std::vector<TailVarianceRow> tail_variance_check(std::span<const SamplePath> paths, double order,
                                                  std::span<const double> thresholds) {
  if (paths.size() < 2) throw InsufficientDataError("tail_variance_check needs >= 2 paths");
  const auto& grid = paths.front().grid;
  const std::size_t n = grid.size();
  if (n < 2) throw InsufficientDataError("tail_variance_check needs >= 2 grid points");
  std::vector<double> scale;  // |t_j - t_i|^{-order} for i < j, row-major
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) scale.push_back(std::pow(grid[j] - grid[i], -order));
  std::vector<double> m2(scale.size(), 0.0), m4(scale.size(), 0.0);
  std::vector<double> sup(paths.size(), 0.0);
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const auto& path = paths[p];
    if (path.grid != grid) throw ParameterError("tail_variance_check paths must share one grid");
    require_path(path, 2);
    std::size_t idx = 0;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j, ++idx) {
        const double xi = (path.values[j] - path.values[i]) * scale[idx];
        const double sq = xi * xi;
        m2[idx] += sq;
        m4[idx] += sq * sq;
        s = std::max(s, std::abs(xi));
      }
    sup[p] = s;
  }
  const double N = static_cast<double>(paths.size());
  double sigma2_max = 0.0;
  double sigma2_upper = 0.0;
  for (std::size_t k = 0; k < m2.size(); ++k) {
    const double mean2 = m2[k] / N;
    const double var2 = std::max(0.0, m4[k] / N - mean2 * mean2);
    sigma2_max = std::max(sigma2_max, mean2);
    sigma2_upper = std::max(sigma2_upper, mean2 + 3.0 * std::sqrt(var2 / N));
  }
  std::vector<TailVarianceRow> rows;
  for (const double x : thresholds) {
    TailVarianceRow row;
    row.threshold = x;
    const auto below = std::count_if(sup.begin(), sup.end(), [x](double s) { return s < x; });
    row.p_hat = static_cast<double>(below) / N;
    row.p_upper = below == 0
                      ? std::min(1.0, 3.0 / N)
                      : std::min(1.0, row.p_hat + 3.0 * std::sqrt(row.p_hat * (1.0 - row.p_hat) / N));
    row.bound = tail_variance_bound(x, row.p_upper);
    row.sigma2_max = sigma2_max;
    row.sigma2_upper = sigma2_upper;
    row.holds = sigma2_upper <= row.bound;
    rows.push_back(row);
  }
  return rows;
}

void write_constants_csv(std::ostream& os, std::span<const double> constants) {
  os << "path_index,C\n";
  char buf[64];
  for (std::size_t i = 0; i < constants.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, constants[i]);
    os << buf;
  }
}

}  // namespace holder
