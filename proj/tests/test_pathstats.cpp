#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "holder/error.hpp"
#include "holder/pathstats.hpp"
#include "holder/random.hpp"

using namespace holder;

namespace {

template <class F>
SamplePath make_path(std::size_t intervals, double T, F f) {
  SamplePath p;
  p.grid = uniform_grid(0.0, T, intervals);
  for (const double t : p.grid) p.values.push_back(f(t));
  return p;
}

SamplePath scaled(SamplePath p, double lambda) {
  for (auto& v : p.values) v *= lambda;
  return p;
}

std::vector<SamplePath> fbm_paths(double H, std::size_t n, std::size_t count,
                                  std::uint64_t seed) {
  return sample_paths(SimulationPlan(CovarianceModel::fbm(H), uniform_grid(0.0, 1.0, n), count,
                                     seed, SimulationMethod::circulant));
}

}  // namespace

TEST_CASE("path_holder_constant examples") {
  const auto line = make_path(50, 1.0, [](double t) { return t; });
  CHECK(path_holder_constant(line, 1.0).constant == doctest::Approx(1.0));
  const auto half = path_holder_constant(line, 0.5);
  CHECK(half.constant == doctest::Approx(1.0));
  CHECK(half.argmax.first == 0.0);
  CHECK(half.argmax.second == doctest::Approx(1.0));
  CHECK(path_holder_constant(make_path(10, 1.0, [](double) { return 3.0; }), 0.4).constant == 0.0);
  CHECK_FALSE(half.restricted);
  CHECK(path_holder_constant(line, 0.5, 16).restricted);
}

TEST_CASE("path_holder_constant on a non-uniform grid") {
  SamplePath p;
  p.grid = {0.0, 0.1, 0.5, 1.0};
  for (const double t : p.grid) p.values.push_back(t);
  CHECK(path_holder_constant(p, 1.0).constant == doctest::Approx(1.0));
  CHECK_THROWS_AS(path_holder_constant(p, 1.5), ParameterError);
}

TEST_CASE("path constant homogeneity and monotonicity in the order") {
  const auto paths = fbm_paths(0.5, 256, 3, 4);
  for (const auto& p : paths) {
    const double c = path_holder_constant(p, 0.3).constant;
    CHECK(path_holder_constant(scaled(p, 2.5), 0.3).constant == doctest::Approx(2.5 * c));
    double prev = 0.0;
    for (const double a : {0.1, 0.2, 0.3, 0.4, 0.5}) {
      const double x = path_holder_constant(p, a).constant;
      CHECK(x >= prev);
      prev = x;
    }
  }
}

TEST_CASE("path_holder_exponent examples") {
  const auto lags = default_path_lags();
  const auto line = make_path(1024, 1.0, [](double t) { return t; });
  CHECK(path_holder_exponent(line, lags).exponent == doctest::Approx(1.0));
  // M(h) = sqrt(h), attained at base point 0
  const auto root = make_path(1024, 1.0, [](double t) { return std::sqrt(t); });
  const std::vector<std::size_t> ladder{1, 4, 16, 64};
  CHECK(std::abs(path_holder_exponent(root, ladder).exponent - 0.5) < 1e-12);
  CHECK_THROWS_AS(path_holder_exponent(make_path(64, 1.0, [](double) { return 1.0; }), lags),
                  InsufficientDataError);
  CHECK_THROWS_AS(path_increment_decay(line, std::vector<std::size_t>{0, 1, 2}), ParameterError);
}

TEST_CASE("non-uniform grids are refused by grid-step statistics") {
  SamplePath p;
  p.grid = {0.0, 0.1, 0.5, 1.0};
  p.values = {0.0, 1.0, 0.0, 1.0};
  CHECK_THROWS_AS(grr_xi(p, 0.5, 0.5), CapabilityError);
  CHECK_THROWS_AS(path_increment_decay(p, std::vector<std::size_t>{1}), CapabilityError);
}

TEST_CASE("grr_xi examples") {
  CHECK(grr_xi(make_path(64, 1.0, [](double) { return 2.0; }), 0.5, 0.5) == 0.0);
  const auto line = make_path(1024, 1.0, [](double t) { return t; });
  const double xi = grr_xi(line, 0.5, 0.5);
  CHECK(std::abs(xi / std::pow(1.0 / 6.0, 0.25) - 1.0) < 0.02);
  CHECK(grr_xi(scaled(line, 3.0), 0.5, 0.5) == doctest::Approx(3.0 * xi).epsilon(1e-12));
  CHECK_THROWS_AS(grr_xi(line, 0.5, 1.0), ParameterError);
  CHECK_THROWS_AS(grr_xi(line, 0.5, 0.0), ParameterError);
}

TEST_CASE("grr_xi converges to the linear closed form under refinement") {
  const double exact = std::pow(1.0 / 6.0, 0.25);
  double prev_err = 1.0;
  for (const std::size_t n : {64u, 256u, 1024u}) {
    const double err = std::abs(grr_xi(make_path(n, 1.0, [](double t) { return t; }), 0.5, 0.5) -
                                exact);
    CHECK(err < prev_err);
    prev_err = err;
  }
}

TEST_CASE("grr ratio of the linear path") {
  const auto line = make_path(1024, 1.0, [](double t) { return t; });
  // C_0 = 1 and T = 1
  CHECK(grr_ratio(line, 0.5, 0.5) == doctest::Approx(1.0 / grr_xi(line, 0.5, 0.5)));
  CHECK_THROWS_AS(grr_ratio(make_path(16, 1.0, [](double) { return 0.0; }), 0.5, 0.25),
                  ParameterError);
}

TEST_CASE("grr_constant_estimate") {
  const auto paths = fbm_paths(0.5, 128, 20, 31);
  const auto est = grr_constant_estimate(paths, 0.5, 0.25);
  CHECK(std::isfinite(est.max_ratio.value));
  CHECK(est.max_ratio.n_samples == 20);
  CHECK(est.max_ratio.half_width >= 0.0);
  CHECK(est.min <= est.median);
  CHECK(est.median <= est.max_ratio.value);
  const std::vector<SamplePath> twins{paths[0], paths[0]};
  const auto t = grr_constant_estimate(twins, 0.5, 0.25);
  CHECK(t.ratios[0] == t.ratios[1]);
  CHECK_THROWS_AS(grr_constant_estimate(std::span(paths).first(1), 0.5, 0.25),
                  InsufficientDataError);
}

TEST_CASE("grr pathwise inequality holds with the empirical constant") {
  const auto paths = fbm_paths(0.5, 128, 10, 12);
  for (const double eps : {0.2, 0.4}) {
    const auto est = grr_constant_estimate(paths, 0.5, eps);
    const double a = 0.5 - eps;
    for (const auto& p : paths) {
      const double xi = grr_xi(p, 0.5, eps);
      const double bound_factor = est.max_ratio.value * xi * (1.0 + 1e-12);
      const auto& t = p.grid;
      for (std::size_t j = 1; j < t.size(); ++j)
        for (std::size_t i = 0; i < j; ++i)
          CHECK_MESSAGE(std::abs(p.values[j] - p.values[i]) <=
                            bound_factor * std::pow(t[j] - t[i], a),
                        "pair ", i, ",", j);
    }
  }
}

TEST_CASE("gaussian_abs_moment") {
  CHECK(gaussian_abs_moment(1.0, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gaussian_abs_moment(1.0, 1.0) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)));
  CHECK(gaussian_abs_moment(1.0, 4.0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(gaussian_abs_moment(2.0, 2.0) == doctest::Approx(4.0));
  CHECK(gaussian_abs_moment(0.0, 3.0) == 0.0);
  CHECK_THROWS_AS(gaussian_abs_moment(1.0, 0.0), ParameterError);
  CHECK_THROWS_AS(gaussian_abs_moment(-1.0, 1.0), ParameterError);
}

TEST_CASE("empirical absolute moments match the closed form") {
  const auto z = standard_normals(606, 100'000);
  for (const double q : {1.0, 2.0, 3.0, 4.0}) {
    double m = 0.0, m2 = 0.0;
    for (const double x : z) {
      const double v = std::pow(std::abs(x), q);
      m += v;
      m2 += v * v;
    }
    const double N = static_cast<double>(z.size());
    m /= N;
    const double se = std::sqrt((m2 / N - m * m) / N);
    CHECK(std::abs(m - gaussian_abs_moment(1.0, q)) <= 3.0 * se);
  }
}

TEST_CASE("exp_moment_estimate trivial cases") {
  std::vector<double> samples(200);
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = 0.01 * i;
  const auto a0 = exp_moment_estimate(samples, 0.0, 1.5);
  CHECK(a0.value == 1.0);
  CHECK(a0.half_width == 0.0);
  CHECK(a0.n_samples == 200);
  const std::vector<double> zeros(150, 0.0);
  const auto z = exp_moment_estimate(zeros, 0.7, 2.0);
  CHECK(z.value == 1.0);
  CHECK(z.stable);
}

TEST_CASE("exp_moment_estimate preconditions and overflow") {
  CHECK_THROWS_AS(exp_moment_estimate(std::vector<double>(99, 1.0), 0.1, 1.0),
                  InsufficientDataError);
  CHECK_THROWS_AS(exp_moment_estimate(std::vector<double>(100, 1.0), 0.1, 2.5), ParameterError);
  std::vector<double> big(100, 1.0);
  big[5] = 1e3;
  const auto o = exp_moment_estimate(big, 1.0, 1.5);
  CHECK(o.overflow_count == 1);
  CHECK_FALSE(o.stable);
}

TEST_CASE("kappa two refuses a above the series limit") {
  std::vector<double> samples(200);
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = 1.0 + 0.001 * i;
  ExpMomentOptions opts;
  opts.moment_constant = 2.0;
  CHECK_NOTHROW(exp_moment_estimate(samples, 0.2, 2.0, opts));
  CHECK_THROWS_AS(exp_moment_estimate(samples, 0.25, 2.0, opts), ParameterError);
  CHECK_NOTHROW(exp_moment_estimate(samples, 5.0, 1.5, opts));
}

TEST_CASE("exp_moment_series verdicts") {
  const auto zero = exp_moment_series(0.0, 3.0, 1.5, 20);
  CHECK(zero.verdict == SeriesVerdict::converged);
  for (const double s : zero.partial_sums) CHECK(s == 1.0);
  CHECK(exp_moment_series(0.1, 1.0, 1.5, 200).verdict == SeriesVerdict::converged);
  CHECK(exp_moment_series(10.0, 1.0, 2.0, 200).verdict == SeriesVerdict::diverged);
  CHECK(exp_moment_series(0.5, 1.0, 2.0, 200).verdict == SeriesVerdict::converged);
  CHECK_THROWS_AS(exp_moment_series(0.1, 1.0, 1.5, 1), ParameterError);
}

TEST_CASE("series terms follow the lgamma closed form and stay finite past j = 170") {
  const double a = 0.1, c = 1.3, kappa = 1.5;
  const auto s = exp_moment_series(a, c, kappa, 400);
  for (const std::size_t j : {1u, 7u, 50u, 300u}) {
    const double jd = static_cast<double>(j);
    const double expected = jd * std::log(a) + kappa * jd * std::log(c) +
                            std::lgamma((kappa * jd + 1.0) / 2.0) - std::lgamma(jd + 1.0);
    CHECK(s.log_abs_terms[j] == doctest::Approx(expected).epsilon(1e-12));
  }
  for (const double x : s.partial_sums) CHECK(std::isfinite(x));
  // Stirling oracle: log term ratio behaves like (kappa/2 - 1) log j for large j.
  const double r300 = std::log(s.term_ratios[300]);
  const double r150 = std::log(s.term_ratios[150]);
  CHECK((r300 - r150) / std::log(2.0) == doctest::Approx(kappa / 2.0 - 1.0).epsilon(0.05));
}

TEST_CASE("kappa two ratio limit") {
  CHECK(kappa2_a_max(1.0) == 1.0);
  CHECK(kappa2_a_max(2.0) == 0.25);
  const auto s = exp_moment_series(0.2, 2.0, 2.0, 2000);
  CHECK(s.term_ratios.back() == doctest::Approx(0.8).epsilon(1e-3));
}

TEST_CASE("moment bound constant") {
  // Half-normal samples: E|Z|^p = 2^{p/2} Gamma((p+1)/2)/sqrt(pi), so c -> sqrt(2) pi^{-1/(2p)}
  const auto z = standard_normals(1, 200'000);
  const double c = moment_bound_constant(z, 8);
  CHECK(c > 1.0);
  CHECK(c < 1.45);
  CHECK(moment_bound_constant(std::vector<double>(10, 0.0)) == 0.0);
}

TEST_CASE("tail_variance_bound") {
  CHECK(tail_variance_bound(1.0, 1.0) == doctest::Approx(2.0 / std::numbers::pi));
  CHECK(tail_variance_bound(2.0, 1.0) == doctest::Approx(8.0 / std::numbers::pi));
  CHECK(tail_variance_bound(1.0, 0.5) == doctest::Approx(8.0 / std::numbers::pi));
  CHECK_THROWS_AS(tail_variance_bound(1.0, 0.0), ParameterError);
  CHECK_THROWS_AS(tail_variance_bound(0.0, 1.0), ParameterError);
}

TEST_CASE("tail_variance_check on a small fbm family") {
  const auto paths = sample_paths(
      SimulationPlan(CovarianceModel::fbm(0.7), uniform_grid(1.0 / 16, 1.0, 15), 2000, 44));
  const std::vector<double> x{1.0, 2.0, 4.0};
  const auto rows = tail_variance_check(paths, 0.5, x);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.p_hat >= 0.0);
    CHECK(r.p_hat <= 1.0);
    CHECK(r.p_upper >= r.p_hat);
    CHECK(r.sigma2_upper >= r.sigma2_max);
  }
  CHECK(rows[0].p_hat <= rows[1].p_hat);
  CHECK(rows[1].p_hat <= rows[2].p_hat);
  CHECK(rows[2].holds);
}

TEST_CASE("constants csv layout") {
  std::ostringstream os;
  const std::vector<double> c{1.5, 0.25};
  write_constants_csv(os, c);
  CHECK(os.str() == "path_index,C\n0,1.5\n1,0.25\n");
}
