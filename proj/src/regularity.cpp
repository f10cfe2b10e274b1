#include "holder/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "holder/error.hpp"
#include "holder/parallel.hpp"

namespace holder {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kVerdictTolerance = 1e-12;

bool is_uniform(std::span<const double> grid, double* step) {
  const auto d = uniform_step(grid);
  if (d) *step = *d;
  return d.has_value();
}

void require_increasing(std::span<const double> grid, const char* what) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw ParameterError(std::string(what) + " must be strictly increasing");
}

// Increment variances between grid points, with per-point caching for the
// modulated family whose closed form separates into point and lag factors.
class GridMetric {
 public:
  GridMetric(const CovarianceModel& model, std::span<const double> grid)
      : model_(model), grid_(grid) {
    if (model.kind() == ModelKind::modulated_fbm) {
      const double two_h = 2.0 * model.hurst();
      mod_f_.resize(grid.size());
      mod_p_.resize(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i) {
        model.check_time(grid[i]);
        mod_f_[i] = grid[i] > 0.0 ? model.modulation(grid[i]) : 0.0;
        mod_p_[i] = grid[i] > 0.0 ? std::pow(grid[i], two_h) : 0.0;
      }
    }
  }

  // i < j; lag_power = |t_j - t_i|^{2H} when the caller has it cached.
  double variance(std::size_t i, std::size_t j, double lag_power) const {
    if (mod_f_.empty()) return increment_variance(model_, grid_[i], grid_[j]);
    double v;
    if (grid_[i] <= 0.0) {
      v = mod_f_[j] * mod_f_[j] * mod_p_[j];
    } else {
      const double fs = mod_f_[i];
      const double ft = mod_f_[j];
      v = fs * ft * lag_power + (ft - fs) * (ft * mod_p_[j] - fs * mod_p_[i]);
    }
    return model_.scale() * std::max(v, 0.0);
  }

  bool wants_lag_power() const { return !mod_f_.empty(); }

 private:
  const CovarianceModel& model_;
  std::span<const double> grid_;
  std::vector<double> mod_f_;
  std::vector<double> mod_p_;
};

struct Best {
  double value = -kInf;
  std::size_t i = 0;
  std::size_t j = 0;
  // Deterministic regardless of evaluation order: ties go to the smaller pair.
  void offer(double v, std::size_t a, std::size_t b) {
    if (v > value || (v == value && std::pair(a, b) < std::pair(i, j))) {
      value = v;
      i = a;
      j = b;
    }
  }
};

}  // namespace

std::optional<double> uniform_step(std::span<const double> grid) {
  if (grid.size() < 2) return std::nullopt;
  const double d = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double expected = grid.front() + d * static_cast<double>(i);
    if (std::abs(grid[i] - expected) > 1e-9 * (std::abs(d) + std::abs(expected)))
      return std::nullopt;
  }
  return d;
}

double relative_change(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale == 0.0) return 0.0;
  return std::abs(a - b) / scale;
}

std::vector<double> uniform_grid(double start, double end, std::size_t intervals) {
  if (intervals == 0) throw ParameterError("uniform grid needs at least one interval");
  std::vector<double> g(intervals + 1);
  const double step = (end - start) / static_cast<double>(intervals);
  for (std::size_t i = 0; i <= intervals; ++i) g[i] = start + step * static_cast<double>(i);
  g.back() = end;
  return g;
}

std::vector<double> dyadic_lags(double horizon, int k_min, int k_max) {
  if (k_min > k_max) throw ParameterError("dyadic lags need k_min <= k_max");
  std::vector<double> lags;
  for (int k = k_max; k >= k_min; --k) lags.push_back(std::ldexp(horizon, -k));
  return lags;
}

std::vector<std::vector<double>> dyadic_grids(double horizon, int k_min, int k_max) {
  if (k_min > k_max || k_min < 0) throw ParameterError("dyadic grids need 0 <= k_min <= k_max");
  std::vector<std::vector<double>> grids;
  for (int k = k_min; k <= k_max; ++k)
    grids.push_back(uniform_grid(0.0, horizon, std::size_t{1} << k));
  return grids;
}

ExponentFit fit_holder_exponent(std::span<const DecayPoint> decay) {
  ExponentFit fit;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& p : decay) {
    if (!(p.lag > 0.0) || !std::isfinite(p.lag))
      throw ParameterError("exponent fit needs positive lags");
    if (p.value == 0.0) {
      fit.dropped_lags.push_back(p.lag);
      continue;
    }
    if (!(p.value > 0.0) || !std::isfinite(p.value))
      throw ParameterError("exponent fit needs positive finite values");
    xs.push_back(std::log(p.lag));
    ys.push_back(std::log(p.value));
  }
  std::vector<double> distinct = xs;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3) {
    std::ostringstream os;
    os << "exponent fit needs at least 3 distinct positive lags, got " << distinct.size();
    if (!fit.dropped_lags.empty()) os << " (" << fit.dropped_lags.size() << " zero values dropped)";
    throw InsufficientDataError(os.str());
  }
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.exponent = sxy / sxx;
  fit.log_constant = my - fit.exponent * mx;
  for (std::size_t i = 0; i < xs.size(); ++i)
    fit.max_residual =
        std::max(fit.max_residual, std::abs(ys[i] - fit.log_constant - fit.exponent * xs[i]));
  fit.h_min = std::exp(distinct.front());
  fit.h_max = std::exp(distinct.back());
  fit.n_lags = xs.size();
  return fit;
}

std::vector<DecayPoint> metric_decay(const CovarianceModel& model,
                                     std::span<const double> grid,
                                     std::span<const double> lags) {
  const double T = model.horizon();
  const double tol = 1e-12 * T;
  std::vector<DecayPoint> out;
  for (double h : lags) {
    if (!(h > 0.0)) throw ParameterError("metric_decay needs positive lags");
    double best = -1.0;
    for (double t : grid) {
      if (t < -tol || t + h > T + tol) continue;
      best = std::max(best, increment_stddev(model, t, std::min(t + h, T)));
      // d_X(t, t+h) is the same for every admissible t.
      if (model.has_stationary_increments()) break;
    }
    if (best >= 0.0) out.push_back({h, best});
  }
  return out;
}

ScanResult metric_ratio_scan(const CovarianceModel& model, std::span<const double> grid,
                             double order, const PairScanOptions& opts) {
  const std::size_t n = grid.size();
  if (n < 2) throw ParameterError("pair scan needs at least 2 grid points");
  require_increasing(grid, "grid");
  for (double t : grid) model.check_time(t);

  double step = 0.0;
  const bool uniform = is_uniform(grid, &step);
  ScanResult result;

  if (model.has_stationary_increments() && uniform) {
    // d_X depends on the lag only: one base point covers every pair.
    Best best;
    for (std::size_t k = 1; k < n; ++k) {
      const double h = step * static_cast<double>(k);
      const double d = increment_stddev(model, grid[0], grid[0] + h);
      best.offer(d / std::pow(h, order), 0, k);
    }
    result.constant = best.value;
    result.argmax = {grid[best.i], grid[best.j]};
    return result;
  }

  GridMetric metric(model, grid);
  const double two_h = 2.0 * model.hurst();
  result.restricted = n > opts.full_scan_limit;

  // Offsets scanned: every offset, or powers of two when restricted.
  std::vector<std::size_t> offsets;
  if (result.restricted) {
    for (std::size_t k = 1; k < n; k <<= 1) offsets.push_back(k);
  } else {
    for (std::size_t k = 1; k < n; ++k) offsets.push_back(k);
  }

  const unsigned threads = resolve_threads(opts.threads);
  const std::size_t chunks = std::min<std::size_t>(offsets.size(), threads * 4);
  std::vector<Best> partial(chunks);
  parallel_chunks(offsets.size(), chunks, threads,
                  [&](std::size_t b, std::size_t e, std::size_t c) {
                    Best local;
                    for (std::size_t o = b; o < e; ++o) {
                      const std::size_t k = offsets[o];
                      const double uh = step * static_cast<double>(k);
                      const double lag_pow = uniform ? std::pow(uh, two_h) : 0.0;
                      const double lag_order = uniform ? std::pow(uh, order) : 0.0;
                      for (std::size_t i = 0; i + k < n; ++i) {
                        const std::size_t j = i + k;
                        const double h = grid[j] - grid[i];
                        const double lp = metric.wants_lag_power()
                                              ? (uniform ? lag_pow : std::pow(h, two_h))
                                              : 0.0;
                        const double d = std::sqrt(metric.variance(i, j, lp));
                        const double denom = uniform ? lag_order : std::pow(h, order);
                        local.offer(d / denom, i, j);
                      }
                    }
                    partial[c] = local;
                  });
  Best best;
  for (const auto& p : partial) best.offer(p.value, p.i, p.j);
  result.constant = best.value;
  result.argmax = {grid[best.i], grid[best.j]};
  return result;
}

ConditionVerdict kc_check(const CovarianceModel& model, double H, double eps,
                          std::span<const double> grid, const PairScanOptions& opts) {
  if (!(eps > 0.0) || !(eps < H))
    throw ParameterError("kc_check needs 0 < eps < H");
  const ScanResult scan = metric_ratio_scan(model, grid, H - eps, opts);
  ConditionVerdict v;
  v.name = "kolmogorov-centsov";
  v.holds = std::isfinite(scan.constant);
  v.margin = v.holds ? 0.0 : -kInf;
  v.witness = scan.argmax;
  v.constants["c"] = scan.constant;
  v.constants["order"] = H - eps;
  v.constants["grid_points"] = static_cast<double>(grid.size());
  if (scan.restricted) v.notes.push_back("pair scan restricted to dyadic lags");
  return v;
}

std::vector<double> divergence_scan(const CovarianceModel& model, double H, double eps,
                                    const std::vector<std::vector<double>>& grids,
                                    const PairScanOptions& opts) {
  if (!(eps >= 0.0) || !(eps < H)) throw ParameterError("divergence_scan needs 0 <= eps < H");
  std::vector<double> constants;
  for (std::size_t g = 0; g < grids.size(); ++g) {
    if (g > 0 && grids[g].size() <= grids[g - 1].size())
      throw ParameterError("divergence_scan needs strictly refining grids");
    constants.push_back(metric_ratio_scan(model, grids[g], H - eps, opts).constant);
  }
  return constants;
}

namespace {

ConditionFit make_condition_fit(std::vector<DecayPoint> decay) {
  ConditionFit cf;
  bool any_positive = false;
  for (const auto& p : decay) {
    if (p.value > 0.0)
      any_positive = true;
    else
      cf.dropped_lags.push_back(p.lag);
  }
  cf.decay = std::move(decay);
  if (any_positive) cf.fit = fit_holder_exponent(cf.decay);
  return cf;
}

}  // namespace

double IntegralConditions::holder_index() const {
  double index = kInf;
  if (first.fit) index = std::min(index, 0.5 * first.fit->exponent);
  if (second.fit) index = std::min(index, 0.5 * second.fit->exponent);
  return index;
}

IntegralConditions volterra_conditions_check(const VolterraKernel& kernel,
                                             std::span<const double> grid,
                                             std::span<const double> lags, double horizon,
                                             const QuadSettings& quad) {
  const double tol = 1e-12 * horizon;
  std::vector<DecayPoint> first;
  std::vector<DecayPoint> second;
  for (double h : lags) {
    if (!(h > 0.0)) throw ParameterError("volterra_conditions_check needs positive lags");
    double d1 = -1.0;
    double d2 = -1.0;
    for (double s : grid) {
      if (s < -tol || s + h > horizon + tol) continue;
      const double t = s + h;
      d1 = std::max(d1, volterra_diagonal_integral(kernel, s, t, quad));
      d2 = std::max(d2, volterra_increment_integral(kernel, s, t, quad));
    }
    if (d1 < 0.0) continue;  // no admissible base point
    first.push_back({h, d1});
    second.push_back({h, d2});
  }
  IntegralConditions out;
  out.first = make_condition_fit(std::move(first));
  out.second = make_condition_fit(std::move(second));
  return out;
}

IntegralConditions selfsimilar_conditions_check(const SelfSimilarProfile& profile,
                                                std::span<const double> grid,
                                                std::span<const double> lags,
                                                double horizon, const QuadSettings& quad) {
  return volterra_conditions_check(selfsimilar_kernel(profile), grid, lags, horizon, quad);
}

ConditionVerdict alos_check(const VolterraKernel& kernel, double H,
                            std::span<const double> grid, const QuadSettings& quad,
                            double stability_tol) {
  if (!kernel.has_derivative())
    throw CapabilityError("alos_check needs a kernel with dK/dt ('" + kernel.name + "')");
  if (!(H > 0.0 && H < 1.0)) throw ParameterError("alos_check needs H in (0,1)");
  if (grid.size() < 3) throw ParameterError("alos_check needs at least 3 grid points");
  require_increasing(grid, "grid");

  struct Constants {
    Best integral;
    Best derivative;
  };
  auto scan = [&](std::span<const double> g) {
    Constants c;
    for (std::size_t j = 1; j < g.size(); ++j) {
      for (std::size_t i = 0; i < j; ++i) {
        const double s = g[i];
        const double t = g[j];
        const double h = t - s;
        c.integral.offer(volterra_diagonal_integral(kernel, s, t, quad) / std::pow(h, 2.0 * H),
                         i, j);
        c.derivative.offer(std::abs(kernel.dK_dt(t, s)) * std::pow(h, 1.5 - H), i, j);
      }
    }
    return c;
  };

  std::vector<double> coarse;
  for (std::size_t i = 0; i < grid.size(); i += 2) coarse.push_back(grid[i]);
  const Constants fine_c = scan(grid);
  const Constants coarse_c = scan(coarse);

  auto sub = [&](const char* name, const Best& f, const Best& c) {
    ConditionVerdict v;
    v.name = name;
    const double change = relative_change(f.value, c.value);
    const bool finite = std::isfinite(f.value) && std::isfinite(c.value);
    v.margin = finite ? stability_tol - change : -kInf;
    v.holds = v.margin >= 0.0;
    v.witness = {grid[f.j], grid[f.i]};
    v.constants["c"] = f.value;
    v.constants["c_coarse"] = c.value;
    v.constants["relative_change"] = change;
    return v;
  };

  ConditionVerdict v;
  v.name = "alos";
  v.sub.push_back(sub("diagonal-integral", fine_c.integral, coarse_c.integral));
  v.sub.push_back(sub("kernel-derivative", fine_c.derivative, coarse_c.derivative));
  v.margin = std::min(v.sub[0].margin, v.sub[1].margin);
  v.holds = v.margin >= 0.0;
  v.witness = v.sub[0].margin <= v.sub[1].margin ? v.sub[0].witness : v.sub[1].witness;
  v.constants["c_integral"] = fine_c.integral.value;
  v.constants["c_derivative"] = fine_c.derivative.value;
  v.constants["stability_tolerance"] = stability_tol;
  return v;
}

std::vector<XYPair> xy_pairs(std::size_t n) {
  std::vector<XYPair> pairs;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j < i; ++j)
      pairs.push_back({static_cast<double>(i) / static_cast<double>(n + 1),
                       static_cast<double>(j) / static_cast<double>(n + 1)});
  return pairs;
}

ConditionVerdict selfsimilar_sufficient_check(const SelfSimilarProfile& profile, double H,
                                              std::span<const XYPair> pairs) {
  if (pairs.empty()) throw ParameterError("selfsimilar_sufficient_check needs pairs");
  const double beta = profile.beta();
  auto envelope = [&](double x) {
    return std::pow(x, beta - H) * std::pow(1.0 - x, H - 0.5);
  };

  Best bound;  // F(x) / envelope(x)
  Best worst;  // -(RHS - LHS)
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [x, y] = pairs[k];
    if (!(0.0 < y && y < x && x < 1.0))
      throw ParameterError("selfsimilar_sufficient_check needs 0 < y < x < 1");
    const double fx = profile(x);
    const double fy = profile(y);
    bound.offer(fx / envelope(x), k, 0);
    bound.offer(fy / envelope(y), k, 1);
    const double lhs = std::abs(1.0 - fx / fy);
    const double rhs =
        std::abs(std::pow(y / x, H - beta) * std::pow((1.0 - x) / (1.0 - y), H - 0.5) - 1.0);
    worst.offer(lhs - rhs, k, 0);
  }

  ConditionVerdict c1;
  c1.name = "profile-envelope";
  c1.holds = std::isfinite(bound.value);
  c1.margin = c1.holds ? 0.0 : -kInf;
  const XYPair& bp = pairs[bound.i];
  const double bx = bound.j == 0 ? bp.x : bp.y;
  c1.witness = {bx, bx};
  c1.constants["c"] = bound.value;

  ConditionVerdict c2;
  c2.name = "profile-ratio";
  const double raw = -worst.value;
  c2.holds = std::isfinite(raw) && raw >= -kVerdictTolerance;
  c2.margin = c2.holds ? std::max(raw, 0.0) : raw;
  c2.witness = {pairs[worst.i].x, pairs[worst.i].y};
  c2.constants["raw_margin"] = raw;

  ConditionVerdict v;
  v.name = "selfsimilar-sufficient";
  v.holds = c1.holds && c2.holds;
  v.margin = c1.holds ? c2.margin : -kInf;
  v.witness = c2.witness;
  v.constants["c"] = bound.value;
  v.constants["raw_margin"] = raw;
  v.sub = {c1, c2};
  return v;
}

ConditionVerdict fredholm_dominating_check(const FredholmKernel& kernel,
                                           std::span<const double> u_grid,
                                           std::span<const double> f_values, double H,
                                           double eps, std::span<const double> grid,
                                           const QuadSettings& quad) {
  if (u_grid.size() != f_values.size() || u_grid.size() < 2)
    throw ParameterError("fredholm check needs f sampled on at least 2 u-grid points");
  if (!(eps >= 0.0) || !(H - eps > 0.0)) throw ParameterError("fredholm check needs H - eps > 0");
  if (grid.size() < 2) throw ParameterError("fredholm check needs at least 2 grid points");
  require_increasing(u_grid, "u-grid");
  for (double f : f_values)
    if (!std::isfinite(f)) throw ParameterError("dominating function has non-finite samples");

  // Square integrability of the piecewise-linear interpolant of f.
  auto f_interp = [&](double u) {
    const auto it = std::upper_bound(u_grid.begin(), u_grid.end(), u);
    if (it == u_grid.begin()) return f_values.front();
    if (it == u_grid.end()) return f_values.back();
    const std::size_t i = static_cast<std::size_t>(it - u_grid.begin()) - 1;
    const double w = (u - u_grid[i]) / (u_grid[i + 1] - u_grid[i]);
    return (1 - w) * f_values[i] + w * f_values[i + 1];
  };
  double l2 = 0.0;
  for (std::size_t i = 0; i + 1 < u_grid.size(); ++i)
    l2 += integrate_checked([&](double u) { return f_interp(u) * f_interp(u); }, u_grid[i],
                            u_grid[i + 1], quad);
  if (!std::isfinite(l2)) throw ParameterError("dominating function is not square integrable");

  const double order = H - eps;
  double raw = kInf;
  std::size_t wi = 0, wj = 1, wk = 0;
  for (std::size_t j = 1; j < grid.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      const double s = grid[i];
      const double t = grid[j];
      const double allowance = std::pow(t - s, order);
      for (std::size_t k = 0; k < u_grid.size(); ++k) {
        const double u = u_grid[k];
        const double slack = f_values[k] * allowance - std::abs(kernel(t, u) - kernel(s, u));
        if (slack < raw) {
          raw = slack;
          wi = i;
          wj = j;
          wk = k;
        }
      }
    }
  }
  ConditionVerdict v;
  v.name = "fredholm-dominating";
  v.holds = std::isfinite(raw) && raw >= -kVerdictTolerance;
  v.margin = v.holds ? std::max(raw, 0.0) : raw;
  v.witness = {grid[wj], grid[wi]};
  v.constants["raw_margin"] = raw;
  v.constants["u_at_margin"] = u_grid[wk];
  v.constants["f_l2_norm_squared"] = l2;
  return v;
}

std::vector<DecayPoint> variance_decay(const CovarianceModel& model,
                                       std::span<const double> lags) {
  std::vector<DecayPoint> out;
  for (double t : lags) out.push_back({t, cov_eval(model, t, t)});
  return out;
}

ExponentFit stationary_increment_check(const CovarianceModel& model,
                                       std::span<const double> lags) {
  if (!model.is_stationary_increment_from_origin())
    throw CapabilityError("stationary_increment_check needs an fbm or bm model, got " +
                          model.id());
  const auto decay = variance_decay(model, lags);
  return fit_holder_exponent(decay);
}

std::vector<DecayPoint> spectral_decay(const SpectralMeasure& measure,
                                       std::span<const double> lags,
                                       const QuadSettings& quad) {
  std::vector<DecayPoint> out;
  for (double h : lags) out.push_back({h, spectral_increment_integral(measure, h, quad)});
  return out;
}

std::vector<double> liminf_density_proxy(const FredholmKernel& kernel, double t,
                                         std::span<const double> u_grid, double H,
                                         double eps, std::span<const double> lags,
                                         std::size_t n_lags) {
  std::vector<double> sorted(lags.begin(), lags.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.resize(std::min(sorted.size(), n_lags));
  std::vector<double> out;
  for (double u : u_grid) {
    double m = kInf;
    for (double h : sorted) {
      const double d = kernel(t, u) - kernel(t - h, u);
      m = std::min(m, d * d / std::pow(h, 2.0 * H - eps));
    }
    out.push_back(m);
  }
  return out;
}

}  // namespace holder
