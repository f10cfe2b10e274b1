#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "holder/error.hpp"
#include "holder/regularity.hpp"

using namespace holder;

namespace {

std::vector<DecayPoint> power_law(double c, double a, int k_min, int k_max) {
  std::vector<DecayPoint> d;
  for (const double h : dyadic_lags(1.0, k_min, k_max)) d.push_back({h, c * std::pow(h, a)});
  return d;
}

// Modulated-fbm sup ratio on a grid, computed from the covariance in long
// double (independent of the library's closed-form increment variance).
long double modulated_sup_ratio(const std::vector<double>& grid, long double H,
                                long double order, long double power) {
  auto f = [&](long double t) {
    return t == 0.0L ? 0.0L : std::pow(std::log(std::log(1.0L / t)), power);
  };
  auto R = [&](long double s, long double t) {
    const long double h = std::fabs(t - s);
    return f(s) * f(t) * 0.5L *
           (std::pow(s, 2 * H) + std::pow(t, 2 * H) - (h == 0 ? 0.0L : std::pow(h, 2 * H)));
  };
  long double best = 0.0L;
  for (std::size_t j = 1; j < grid.size(); ++j)
    for (std::size_t i = 0; i < j; ++i) {
      const long double s = grid[i], t = grid[j];
      const long double d2 = R(t, t) - 2 * R(s, t) + R(s, s);
      best = std::max(best, std::sqrt(std::max(d2, 0.0L)) / std::pow(t - s, order));
    }
  return best;
}

// Simpson oracle for int_0^s ((t-u)^{g} - (s-u)^{g})^2 du after u = s - v^4,
// which makes the integrand smooth for g = H - 1/2 = 1/4.
double rl_increment_oracle(double s, double t, double g) {
  const double vmax = std::pow(s, 0.25);
  const int n = 4000;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double v = vmax * i / n;
    const double u = s - std::pow(v, 4);
    const double diff = std::pow(t - u, g) - std::pow(s - u, g);
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * diff * diff * 4.0 * v * v * v;
  }
  return acc * vmax / (3.0 * n);
}

}  // namespace

TEST_CASE("exact power laws are fitted exactly") {
  const auto fit = fit_holder_exponent(power_law(1.0, 0.7, 2, 14));
  CHECK(std::abs(fit.exponent - 0.7) < 1e-10);
  CHECK(std::abs(fit.log_constant) < 1e-10);
  CHECK(fit.max_residual < 1e-10);
  CHECK(fit.n_lags == 13);
  CHECK(fit.h_min < fit.h_max);
  const auto fit2 = fit_holder_exponent(power_law(2.0, 0.3, 2, 10));
  CHECK(std::abs(fit2.exponent - 0.3) < 1e-10);
  CHECK(std::abs(fit2.log_constant - std::log(2.0)) < 1e-10);
}

TEST_CASE("fit drops zero values and needs three lags") {
  auto d = power_law(1.0, 0.5, 2, 6);
  d[0].value = 0.0;
  const auto fit = fit_holder_exponent(d);
  CHECK(fit.dropped_lags.size() == 1);
  CHECK(fit.n_lags == 4);
  CHECK_THROWS_AS(fit_holder_exponent(power_law(1.0, 0.5, 2, 3)), InsufficientDataError);
  std::vector<DecayPoint> zeros{{0.1, 0.0}, {0.2, 0.0}, {0.3, 0.0}};
  CHECK_THROWS_AS(fit_holder_exponent(zeros), InsufficientDataError);
}

TEST_CASE("fbm metric pinned at the origin gives H") {
  const auto m = CovarianceModel::fbm(0.4);
  std::vector<DecayPoint> d;
  for (const double h : dyadic_lags(1.0, 2, 16)) d.push_back({h, increment_stddev(m, 0.0, h)});
  CHECK(std::abs(fit_holder_exponent(d).exponent - 0.4) < 1e-12);
}

TEST_CASE("metric_decay examples") {
  const auto grid = uniform_grid(0.0, 1.0, 64);
  const auto lags = dyadic_lags(1.0, 4, 16);
  for (const double H : {0.3, 0.5, 0.7}) {
    const auto decay = metric_decay(CovarianceModel::fbm(H), grid, lags);
    for (const auto& p : decay) CHECK(p.value == doctest::Approx(std::pow(p.lag, H)));
  }
  const auto ou = metric_decay(CovarianceModel::ornstein_uhlenbeck(1.0, 2.0), grid, lags);
  for (const auto& p : ou)
    CHECK(p.value == doctest::Approx(std::sqrt(2.0 * (1.0 - std::exp(-2.0 * p.lag)))));
  const auto fine = dyadic_lags(1.0, 12, 20);
  const auto ou_fine = metric_decay(CovarianceModel::ornstein_uhlenbeck(1.0, 2.0), grid, fine);
  CHECK(std::abs(fit_holder_exponent(ou_fine).exponent - 0.5) < 1e-3);
}

TEST_CASE("metric_decay drops lags without admissible base points") {
  const std::vector<double> grid{0.0, 0.9};
  const std::vector<double> lags{0.05, 0.5, 2.0};
  const auto d = metric_decay(CovarianceModel::brownian(), grid, lags);
  CHECK(d.size() == 2);
}

TEST_CASE("kc_check examples") {
  const auto grid = uniform_grid(0.0, 1.0, 32);
  for (const double H : {0.3, 0.7}) {
    const auto v = kc_check(CovarianceModel::fbm(H), H, 0.1, grid);
    CHECK(v.holds);
    CHECK(v.constants.at("c") == doctest::Approx(1.0));
  }
  const auto bm = kc_check(CovarianceModel::brownian(), 0.5, 0.1, grid);
  CHECK(bm.constants.at("c") == doctest::Approx(1.0));
  CHECK_THROWS_AS(kc_check(CovarianceModel::brownian(), 0.5, 0.0, grid), ParameterError);
  CHECK_THROWS_AS(kc_check(CovarianceModel::brownian(), 0.5, 0.5, grid), ParameterError);
}

TEST_CASE("kc constant of OU is stable across refinement") {
  const auto ou = CovarianceModel::ornstein_uhlenbeck(1.0, 2.0);
  const double c8 = kc_check(ou, 0.5, 0.1, uniform_grid(0.0, 1.0, 256)).constants.at("c");
  const double c14 = kc_check(ou, 0.5, 0.1, uniform_grid(0.0, 1.0, 1 << 14)).constants.at("c");
  CHECK(std::isfinite(c14));
  CHECK(relative_change(c8, c14) < 0.05);
}

TEST_CASE("kc constants scale with the model") {
  const auto grid = uniform_grid(0.0, 1.0, 40);
  const auto base = CovarianceModel::ornstein_uhlenbeck(1.0, 1.5);
  const double c1 = kc_check(base, 0.5, 0.2, grid).constants.at("c");
  const double c3 = kc_check(base.scaled(3.0), 0.5, 0.2, grid).constants.at("c");
  CHECK(c3 == doctest::Approx(3.0 * c1).epsilon(1e-12));
  const auto lags = dyadic_lags(1.0, 4, 12);
  const double e1 = fit_holder_exponent(metric_decay(base, grid, lags)).exponent;
  const double e3 = fit_holder_exponent(metric_decay(base.scaled(3.0), grid, lags)).exponent;
  CHECK(e1 == doctest::Approx(e3).epsilon(1e-12));
}

TEST_CASE("restricted pair scans are flagged") {
  PairScanOptions opts;
  opts.full_scan_limit = 16;
  const auto grid = uniform_grid(0.0, 0.3, 64);
  const auto v = kc_check(CovarianceModel::modulated_fbm(0.5), 0.5, 0.1, grid, opts);
  CHECK_FALSE(v.notes.empty());
  const auto full = kc_check(CovarianceModel::modulated_fbm(0.5), 0.5, 0.1, grid);
  CHECK(v.constants.at("c") <= full.constants.at("c") * (1.0 + 1e-12));
}

TEST_CASE("divergence_scan of fbm with eps = 0 is identically one") {
  const auto c = divergence_scan(CovarianceModel::fbm(0.6), 0.6, 0.0, dyadic_grids(1.0, 3, 8));
  for (const double x : c) CHECK(x == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("divergence_scan of modulated fbm matches the long double oracle") {
  const auto m = CovarianceModel::modulated_fbm(0.5);
  const auto grids = dyadic_grids(0.3, 4, 7);
  for (const double eps : {0.0, 0.05}) {
    const auto c = divergence_scan(m, 0.5, eps, grids);
    for (std::size_t g = 0; g < grids.size(); ++g) {
      const double oracle =
          static_cast<double>(modulated_sup_ratio(grids[g], 0.5L, 0.5L - eps, 0.5L));
      CHECK(c[g] == doctest::Approx(oracle).epsilon(1e-9));
    }
  }
}

TEST_CASE("divergence_scan rejects non-refining grids") {
  std::vector<std::vector<double>> grids{uniform_grid(0.0, 1.0, 8), uniform_grid(0.0, 1.0, 4)};
  CHECK_THROWS_AS(divergence_scan(CovarianceModel::brownian(), 0.5, 0.0, grids), ParameterError);
}

TEST_CASE("volterra conditions for the brownian kernel") {
  const auto grid = uniform_grid(0.0, 1.0, 16);
  const auto lags = dyadic_lags(1.0, 4, 12);
  const auto ic = volterra_conditions_check(VolterraKernel::brownian(), grid, lags, 1.0);
  REQUIRE(ic.first.fit);
  CHECK(std::abs(ic.first.fit->exponent - 1.0) < 1e-8);
  CHECK(ic.second.vacuous());
  CHECK(ic.second.dropped_lags.size() == lags.size());
  CHECK(std::abs(ic.holder_index() - 0.5) < 1e-8);
}

TEST_CASE("volterra conditions for riemann-liouville kernels") {
  const auto grid = uniform_grid(0.0, 1.0, 8);
  const auto lags = dyadic_lags(1.0, 4, 12);
  const auto rl = volterra_conditions_check(VolterraKernel::riemann_liouville(0.25), grid, lags, 1.0);
  REQUIRE(rl.first.fit);
  CHECK(std::abs(rl.first.fit->exponent - 0.5) < 1e-6);
  for (const auto& p : rl.first.decay)
    CHECK(std::abs(p.value - std::sqrt(p.lag) / 0.5) < 1e-8 * (1.0 + p.value));

  const auto k75 = VolterraKernel::riemann_liouville(0.75);
  CHECK(std::abs(volterra_increment_integral(k75, 0.5, 0.5 + 1.0 / 64) -
                 rl_increment_oracle(0.5, 0.5 + 1.0 / 64, 0.25)) < 1e-10);
  const auto ic = volterra_conditions_check(k75, grid, lags, 1.0);
  REQUIRE(ic.second.fit);
  CHECK(ic.second.fit->exponent >= 1.5 - 0.05);
}

TEST_CASE("alos_check examples") {
  const auto grid = uniform_grid(0.0, 1.0, 16);
  for (const double H : {0.25, 0.75}) {
    const auto v = alos_check(VolterraKernel::riemann_liouville(H), H, grid);
    CHECK(v.holds);
    CHECK(v.sub[1].constants.at("c") == doctest::Approx(std::abs(H - 0.5)).epsilon(1e-12));
    CHECK(v.sub[0].constants.at("c") == doctest::Approx(1.0 / (2.0 * H)).epsilon(1e-7));
  }
  const auto bm = alos_check(VolterraKernel::brownian(), 0.5, grid);
  CHECK(bm.holds);
  CHECK(bm.sub[1].constants.at("c") == 0.0);
  VolterraKernel no_derivative = VolterraKernel::brownian();
  no_derivative.dK_dt = nullptr;
  CHECK_THROWS_AS(alos_check(no_derivative, 0.5, grid), CapabilityError);
}

TEST_CASE("selfsimilar conditions") {
  const auto grid = uniform_grid(0.0, 1.0, 8);
  const auto lags = dyadic_lags(1.0, 4, 10);
  const auto bm = selfsimilar_conditions_check(SelfSimilarProfile::constant(1.0, 0.5), grid,
                                               lags, 1.0);
  REQUIRE(bm.first.fit);
  CHECK(std::abs(bm.first.fit->exponent - 1.0) < 1e-8);
  CHECK(bm.second.vacuous());

  const auto p = selfsimilar_conditions_check(SelfSimilarProfile::power(0.75, 0.75), grid,
                                              lags, 1.0);
  REQUIRE(p.first.fit);
  REQUIRE(p.second.fit);
  CHECK(std::abs(p.first.fit->exponent - 1.5) < 1e-3);
  CHECK(std::abs(p.second.fit->exponent - 1.5) < 0.06);
}

TEST_CASE("selfsimilar sufficient conditions") {
  const auto pairs = xy_pairs(24);
  const auto bm = selfsimilar_sufficient_check(SelfSimilarProfile::constant(1.0, 0.5), 0.5, pairs);
  CHECK(bm.holds);
  CHECK(bm.sub[0].constants.at("c") == doctest::Approx(1.0));
  CHECK(bm.sub[1].constants.at("raw_margin") == doctest::Approx(0.0));
  for (const auto& [beta, H] : {std::pair{0.6, 0.3}, std::pair{0.75, 0.75}}) {
    const auto v = selfsimilar_sufficient_check(SelfSimilarProfile::power(beta, H), H, pairs);
    CHECK(v.sub[0].constants.at("c") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(v.holds);
  }
  const auto two =
      selfsimilar_sufficient_check(SelfSimilarProfile::constant(2.0, 0.5), 0.5, pairs);
  CHECK(two.sub[0].constants.at("c") == doctest::Approx(2.0));
}

TEST_CASE("fredholm dominating check") {
  const auto grid = uniform_grid(0.0, 1.0, 16);
  const auto u = uniform_grid(0.0, 1.0, 32);
  std::vector<double> g(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) g[k] = std::abs(std::sin(3.0 * u[k]) + 0.2);
  const auto product = fredholm_dominating_check(
      [](double t, double s) { return t * (std::sin(3.0 * s) + 0.2); }, u, g, 1.0, 0.0, grid);
  CHECK(product.holds);
  CHECK(std::abs(product.constants.at("raw_margin")) < 1e-12);

  const std::vector<double> one(u.size(), 1.0);
  const auto jump = fredholm_dominating_check(
      [](double t, double s) { return s <= t ? 1.0 : 0.0; }, u, one, 0.5, 0.1, grid);
  CHECK_FALSE(jump.holds);
  CHECK(jump.margin < 0.0);

  const std::vector<double> zero(u.size(), 0.0);
  const auto trivial =
      fredholm_dominating_check([](double, double) { return 0.0; }, u, zero, 0.5, 0.1, grid);
  CHECK(trivial.holds);
  CHECK(trivial.margin == 0.0);
}

TEST_CASE("stationary increment check") {
  const auto lags = dyadic_lags(1.0, 2, 12);
  CHECK(std::abs(stationary_increment_check(CovarianceModel::fbm(0.6), lags).exponent - 1.2) <
        1e-12);
  CHECK(std::abs(stationary_increment_check(CovarianceModel::brownian(), lags).exponent - 1.0) <
        1e-12);
  CHECK_THROWS_AS(stationary_increment_check(CovarianceModel::ornstein_uhlenbeck(1, 1), lags),
                  CapabilityError);
}

TEST_CASE("perturbed variance profile keeps its exponent within the residual") {
  // sigma^2(t) = t^{0.6} (1 + 0.01 sin(37 k)) on dyadic t
  std::vector<DecayPoint> d;
  int k = 0;
  for (const double t : dyadic_lags(1.0, 2, 14))
    d.push_back({t, std::pow(t, 0.6) * (1.0 + 0.01 * std::sin(37.0 * k++))});
  const auto fit = fit_holder_exponent(d);
  CHECK(std::abs(fit.exponent - 0.6) < 0.01);
  CHECK(fit.max_residual > 0.0);
  CHECK(fit.max_residual < 0.02);
}

TEST_CASE("corollary chain gives index one half for brownian motion") {
  const auto grid = uniform_grid(0.0, 1.0, 16);
  const auto lags = dyadic_lags(1.0, 4, 12);
  const double v = volterra_conditions_check(VolterraKernel::brownian(), grid, lags, 1.0)
                       .holder_index();
  const double s = selfsimilar_conditions_check(SelfSimilarProfile::constant(1.0, 0.5), grid,
                                                lags, 1.0)
                       .holder_index();
  const double st = 0.5 * stationary_increment_check(CovarianceModel::brownian(), lags).exponent;
  const double m =
      fit_holder_exponent(metric_decay(CovarianceModel::brownian(), grid, lags)).exponent;
  for (const double x : {v, s, st, m}) CHECK(std::abs(x - 0.5) < 1e-6);
}

TEST_CASE("spectral decay of the OU density") {
  const auto lags = dyadic_lags(1.0, 10, 16);
  const auto decay = spectral_decay(SpectralMeasure::ornstein_uhlenbeck(1.0, 2.0), lags);
  for (const auto& p : decay)
    CHECK(std::abs(p.value - 0.5 * (1.0 - std::exp(-2.0 * p.lag))) < 1e-8);
  CHECK(std::abs(0.5 * fit_holder_exponent(decay).exponent - 0.5) < 1e-3);
}

TEST_CASE("liminf proxy is a diagnostic ratio") {
  const auto u = uniform_grid(0.05, 0.95, 8);
  const auto lags = dyadic_lags(1.0, 6, 12);
  const auto f = liminf_density_proxy([](double t, double s) { return t * s; }, 0.5, u, 1.0,
                                      0.0, lags);
  REQUIRE(f.size() == u.size());
  for (std::size_t k = 0; k < u.size(); ++k) CHECK(f[k] == doctest::Approx(u[k] * u[k]));
}

TEST_CASE("grid helpers") {
  const auto g = uniform_grid(0.0, 1.0, 4);
  CHECK(g.size() == 5);
  CHECK(uniform_step(g).value() == doctest::Approx(0.25));
  const std::vector<double> ragged{0.0, 0.1, 0.5};
  CHECK_FALSE(uniform_step(ragged).has_value());
  const auto lags = dyadic_lags(2.0, 1, 3);
  CHECK(lags.front() == doctest::Approx(0.25));
  CHECK(lags.back() == doctest::Approx(1.0));
  CHECK(relative_change(0.0, 0.0) == 0.0);
  CHECK(relative_change(1.0, 2.0) == doctest::Approx(0.5));
}
