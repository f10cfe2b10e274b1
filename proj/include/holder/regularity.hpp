#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "holder/covariance.hpp"

namespace holder {

struct DecayPoint {
  double lag;
  double value;
};

/// Least-squares power law D(h) ~ exp(log_constant) * h^exponent.
struct ExponentFit {
  double exponent = 0.0;
  double log_constant = 0.0;
  double max_residual = 0.0;
  double h_min = 0.0;
  double h_max = 0.0;
  std::size_t n_lags = 0;
  std::vector<double> dropped_lags;  // lags with D(h) = 0
};

/// Exponent of one integral condition as a function of t - s. An
/// identically vanishing left-hand side leaves `fit` empty: the condition
/// holds for every exponent.
struct ConditionFit {
  std::vector<DecayPoint> decay;
  std::optional<ExponentFit> fit;
  std::vector<double> dropped_lags;

  bool vacuous() const { return !fit.has_value(); }
};

struct ConditionVerdict {
  std::string name;
  bool holds = false;
  /// Worst-case slack; negative means violated.
  double margin = 0.0;
  std::pair<double, double> witness{0.0, 0.0};
  /// Named scalar outputs (minimal constants, relative changes, ...).
  std::map<std::string, double> constants;
  std::vector<ConditionVerdict> sub;
  std::vector<std::string> notes;
};

/// Relative change |a - b| / max(|a|, |b|); 0 when both vanish.
double relative_change(double a, double b);

/// Step of an equally spaced grid (relative tolerance 1e-9), if it is one.
std::optional<double> uniform_step(std::span<const double> grid);

/// Uniform grid with n intervals (n + 1 points) on [start, end].
std::vector<double> uniform_grid(double start, double end, std::size_t intervals);

/// Dyadic lags horizon * 2^{-k}, k = k_min..k_max, in increasing order.
std::vector<double> dyadic_lags(double horizon, int k_min, int k_max);

ExponentFit fit_holder_exponent(std::span<const DecayPoint> decay);

/// D(h) = max over grid points t (with t + h in the domain) of d_X(t, t + h).
std::vector<DecayPoint> metric_decay(const CovarianceModel& model,
                                     std::span<const double> grid,
                                     std::span<const double> lags);

struct PairScanOptions {
  /// Full pair scan up to this many points; dyadic-lag pairs beyond.
  std::size_t full_scan_limit = 2048;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// max over distinct grid pairs of d_X(t,s) / |t-s|^{order}; reports the
/// argmax pair and whether the scan was lag-restricted.
struct ScanResult {
  double constant = 0.0;
  std::pair<double, double> argmax{0.0, 0.0};
  bool restricted = false;
};
ScanResult metric_ratio_scan(const CovarianceModel& model, std::span<const double> grid,
                             double order, const PairScanOptions& opts = {});

/// Kolmogorov-Centsov constant c with d_X(t,s) <= c |t-s|^{H-eps} on the grid.
ConditionVerdict kc_check(const CovarianceModel& model, double H, double eps,
                          std::span<const double> grid, const PairScanOptions& opts = {});

/// kc constants on each grid of a refining sequence; eps = 0 allowed.
std::vector<double> divergence_scan(const CovarianceModel& model, double H, double eps,
                                    const std::vector<std::vector<double>>& grids,
                                    const PairScanOptions& opts = {});

/// Uniform grids on [0, T] with 2^k intervals, k = k_min..k_max.
std::vector<std::vector<double>> dyadic_grids(double horizon, int k_min, int k_max);

struct IntegralConditions {
  ConditionFit first;   // int_s^t K(t,u)^2 du
  ConditionFit second;  // int_0^s |K(t,u) - K(s,u)|^2 du

  /// Holder index implied by the fits (half the smaller 2H-scale exponent).
  double holder_index() const;
};

/// Exponents (2H-scale) of both Volterra conditions in t - s, maximising
/// each integral over base points s in the grid with s + h <= T.
IntegralConditions volterra_conditions_check(const VolterraKernel& kernel,
                                             std::span<const double> grid,
                                             std::span<const double> lags,
                                             double horizon, const QuadSettings& quad = {});

IntegralConditions selfsimilar_conditions_check(const SelfSimilarProfile& profile,
                                                std::span<const double> grid,
                                                std::span<const double> lags,
                                                double horizon,
                                                const QuadSettings& quad = {});

/// Sufficient condition with int_s^t K(t,u)^2 du <= c (t-s)^{2H} and
/// |dK/dt(t,s)| <= c (t-s)^{H-3/2}. Holds when both minimal constants are
/// finite and change by less than `stability_tol` between the grid and its
/// every-other-point coarsening.
ConditionVerdict alos_check(const VolterraKernel& kernel, double H,
                            std::span<const double> grid, const QuadSettings& quad = {},
                            double stability_tol = 0.05);

struct XYPair {
  double x;
  double y;
};

/// Pairs 0 < y < x < 1 from an interior grid of n points.
std::vector<XYPair> xy_pairs(std::size_t n);

ConditionVerdict selfsimilar_sufficient_check(const SelfSimilarProfile& profile, double H,
                                              std::span<const XYPair> pairs);

using FredholmKernel = std::function<double(double, double)>;

/// Margin min f(u)|t-s|^{H-eps} - |K(t,u) - K(s,u)| over grid pairs (t, s)
/// and the u-grid on which f is sampled.
ConditionVerdict fredholm_dominating_check(const FredholmKernel& kernel,
                                           std::span<const double> u_grid,
                                           std::span<const double> f_values, double H,
                                           double eps, std::span<const double> grid,
                                           const QuadSettings& quad = {});

/// (t, sigma_X^2(t)) at t = lags.
std::vector<DecayPoint> variance_decay(const CovarianceModel& model,
                                       std::span<const double> lags);

/// Exponent of sigma_X^2(t) in t (2H-scale); fbm and bm only.
ExponentFit stationary_increment_check(const CovarianceModel& model,
                                       std::span<const double> lags);

/// (h, I(h)) for the spectral increment integral.
std::vector<DecayPoint> spectral_decay(const SpectralMeasure& measure,
                                       std::span<const double> lags,
                                       const QuadSettings& quad = {});

/// Diagnostic proxy for the liminf density f_eps(u) = liminf_{s->t}
/// |K(t,u)-K(s,u)|^2 / |t-s|^{2H-eps}: the minimum of the ratio over the
/// finest `n_lags` lags of `lags` at base point t. Not a convergent
/// approximation in general.
std::vector<double> liminf_density_proxy(const FredholmKernel& kernel, double t,
                                         std::span<const double> u_grid, double H,
                                         double eps, std::span<const double> lags,
                                         std::size_t n_lags = 3);

}  // namespace holder
