#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "holder/regularity.hpp"
#include "holder/simulate.hpp"

namespace holder {

/// Pathwise Holder constant of order a: sup |X_t - X_s| / |t-s|^a.
struct HolderStat {
  double order = 0.0;
  double constant = 0.0;
  std::pair<double, double> argmax{0.0, 0.0};
  /// Dyadic-lag scan only (a lower bound on the full-scan constant).
  bool restricted = false;
};

struct MomentEstimate {
  double value = 0.0;
  double half_width = 0.0;  // 95% bootstrap percentile half-width
  std::size_t n_samples = 0;
  double stability = 0.0;   // relative change between first half and full sample
  std::size_t overflow_count = 0;
  bool stable = true;
};

/// Full O(n^2) scan for n <= full_scan_limit, dyadic-lag pairs above.
HolderStat path_holder_constant(const SamplePath& path, double a,
                                std::size_t full_scan_limit = 2048);

/// Default lag ladder (in grid steps) for path exponents: the finest dyadic
/// lags 1, 2, 4, 8. Coarser lags pick up the sqrt(log 1/h) factor of the
/// uniform modulus and bias the slope low.
std::vector<std::size_t> default_path_lags();

/// (h, M(h)) with M(h) = max_t |X(t+h) - X(t)|; lags in grid steps of a
/// uniform grid.
std::vector<DecayPoint> path_increment_decay(const SamplePath& path,
                                             std::span<const std::size_t> lag_steps);

ExponentFit path_holder_exponent(const SamplePath& path,
                                 std::span<const std::size_t> lag_steps);

/// GRR functional (int int |X_u - X_v|^{2/eps} / |u-v|^{2H/eps} du dv)^{eps/2},
/// Riemann sum over off-diagonal cells of a uniform grid using node values.
double grr_xi(const SamplePath& path, double H, double eps);

/// rho = C_{H-eps} / (T^{H-eps} xi) for one path.
double grr_ratio(const SamplePath& path, double H, double eps);

struct GrrConstantEstimate {
  /// value is max rho; stability compares the max over the first half of
  /// the paths with the max over all.
  MomentEstimate max_ratio;
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  std::vector<double> ratios;
};

GrrConstantEstimate grr_constant_estimate(std::span<const SamplePath> paths, double H,
                                          double eps, unsigned threads = 0);

/// E|Z|^q for Z ~ N(0, sigma^2).
double gaussian_abs_moment(double sigma, double q);

struct ExpMomentOptions {
  std::size_t bootstrap_resamples = 1000;
  std::uint64_t bootstrap_seed = 0x5eed;
  /// Stability threshold for the `stable` flag.
  double stability_tol = 0.05;
  /// For kappa = 2: constant c of E|C|^p <= c^p Gamma((p+1)/2). Fitted from
  /// the samples when <= 0.
  double moment_constant = 0.0;
};

/// Sample mean of exp(a C^kappa) with bootstrap half-width.
MomentEstimate exp_moment_estimate(std::span<const double> samples, double a, double kappa,
                                   const ExpMomentOptions& opts = {});

enum class SeriesVerdict { converged, diverged, undetermined };
std::string to_string(SeriesVerdict v);

struct SeriesResult {
  std::vector<double> partial_sums;
  std::vector<double> log_abs_terms;
  std::vector<double> term_ratios;  // |term_{j+1} / term_j|
  SeriesVerdict verdict = SeriesVerdict::undetermined;
};

/// Partial sums of sum_j a^j c^{kappa j} Gamma((kappa j + 1)/2) / Gamma(j+1),
/// j = 0..J, evaluated term by term in log space.
SeriesResult exp_moment_series(double a, double c, double kappa, std::size_t J);

/// Largest a with a convergent kappa = 2 series: the term ratio tends to a c^2.
double kappa2_a_max(double c);

/// Smallest c with mean(C^p) <= c^p Gamma((p+1)/2) for p = 1..p_max.
double moment_bound_constant(std::span<const double> samples, int p_max = 8);

/// 2 x^2 / (pi p^2).
double tail_variance_bound(double x, double p);

struct TailVarianceRow {
  double threshold = 0.0;
  double p_hat = 0.0;
  double p_upper = 0.0;       // P_hat + 3 se (rule of three when P_hat = 0)
  double bound = 0.0;         // tail_variance_bound(x, p_upper)
  double sigma2_max = 0.0;    // max empirical variance of the family
  double sigma2_upper = 0.0;  // sigma2_max + 3 se
  bool holds = false;
};

/// Monte Carlo check of the tail-probability variance bound for the normalised
/// increment family (X_t - X_s) / |t-s|^{order} over all grid pairs.
std::vector<TailVarianceRow> tail_variance_check(std::span<const SamplePath> paths, double order,
                                                  std::span<const double> thresholds);

/// CSV `path_index,C`.
void write_constants_csv(std::ostream& os, std::span<const double> constants);

}  // namespace holder
