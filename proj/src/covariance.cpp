#include "holder/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "holder/error.hpp"

namespace holder {
namespace {

constexpr double kPi = std::numbers::pi;

double fbm_cov(double hurst, double s, double t) {
  const double two_h = 2.0 * hurst;
  return 0.5 * (std::pow(s, two_h) + std::pow(t, two_h) -
                std::pow(std::abs(t - s), two_h));
}

// Bracketing index for bilinear interpolation with clamping.
std::pair<std::size_t, double> locate(const std::vector<double>& grid, double x) {
  if (grid.size() == 1 || x <= grid.front()) return {0, 0.0};
  if (x >= grid.back()) return {grid.size() - 2, 1.0};
  const auto it = std::upper_bound(grid.begin(), grid.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
  return {i, (x - grid[i]) / (grid[i + 1] - grid[i])};
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::fbm: return "fbm";
    case ModelKind::bm: return "bm";
    case ModelKind::ou: return "ou";
    case ModelKind::spectral: return "spectral";
    case ModelKind::volterra: return "volterra";
    case ModelKind::selfsimilar: return "selfsimilar";
    case ModelKind::modulated_fbm: return "modulated-fbm";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  for (ModelKind k : {ModelKind::fbm, ModelKind::bm, ModelKind::ou, ModelKind::spectral,
                      ModelKind::volterra, ModelKind::selfsimilar,
                      ModelKind::modulated_fbm}) {
    if (to_string(k) == name) return k;
  }
  throw ParameterError("unknown model kind '" + name + "'");
}

// ---------------------------------------------------------------------------
// SpectralMeasure

SpectralMeasure::SpectralMeasure(std::function<double(double)> density,
                                 double truncation, double atom_at_zero,
                                 std::string name)
    : density_(std::move(density)),
      truncation_(truncation),
      atom_(atom_at_zero),
      name_(std::move(name)) {
  if (!(truncation_ > 0.0)) throw ParameterError("spectral truncation must be positive");
  if (!(atom_ >= 0.0)) throw ParameterError("spectral atom must be nonnegative");

  const double probe_max = std::isfinite(truncation_) ? truncation_ : 1e6;
  bool all_zero = true;
  for (int k = 0; k <= 64; ++k) {
    const double lambda = k == 0 ? 0.0 : probe_max * std::pow(10.0, -8.0 + 8.0 * k / 64.0);
    const double g = density_(lambda);
    if (!(g >= 0.0))
      throw ParameterError("spectral density is negative or undefined at lambda=" +
                           std::to_string(lambda));
    if (g != 0.0) all_zero = false;
  }
  zero_density_ = all_zero;
  if (zero_density_) return;

  QuadSettings quad;
  quad.abs_tol = 1e-12;
  quad.rel_tol = 1e-10;
  try {
    if (std::isfinite(truncation_)) {
      mass_ = integrate_checked(density_, 0.0, truncation_, quad);
      try {
        tail_bound_ = 2.0 * integrate_to_infinity(density_, truncation_, quad);
      } catch (const QuadratureError&) {
        tail_bound_ = std::numeric_limits<double>::infinity();
      }
    } else {
      const double knee = 1.0;
      mass_ = integrate_checked(density_, 0.0, knee, quad) +
              integrate_to_infinity(density_, knee, quad);
    }
  } catch (const QuadratureError& e) {
    throw ParameterError(std::string("spectral measure is not finite: ") + e.what());
  }
  if (!std::isfinite(mass_)) throw ParameterError("spectral measure is not finite");
}

SpectralMeasure SpectralMeasure::ornstein_uhlenbeck(double sigma, double theta) {
  if (!(sigma > 0.0 && theta > 0.0)) throw ParameterError("ou needs sigma > 0, theta > 0");
  const double c = sigma * sigma * theta / kPi;
  const double theta2 = theta * theta;
  return SpectralMeasure([c, theta2](double l) { return c / (theta2 + l * l); },
                         std::numeric_limits<double>::infinity(), 0.0, "ou");
}

SpectralMeasure SpectralMeasure::matern(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw ParameterError("matern needs H in (0,1)");
  const double expo = -(hurst + 0.5);
  return SpectralMeasure([expo](double l) { return std::pow(1.0 + l * l, expo); },
                         std::numeric_limits<double>::infinity(), 0.0, "matern");
}

SpectralMeasure SpectralMeasure::point_mass(double mass) {
  return SpectralMeasure([](double) { return 0.0; },
                         std::numeric_limits<double>::infinity(), mass, "point-mass");
}

// ---------------------------------------------------------------------------
// Kernels and profiles

void VolterraKernel::validate(double horizon) const {
  if (!K) throw ParameterError("volterra kernel '" + name + "' has no K");
  if (singularity_exponent && !(*singularity_exponent > -0.5))
    throw ParameterError("kernel singularity exponent must exceed -1/2");
  for (int i = 1; i <= 16; ++i) {
    const double t = horizon * i / 17.0;
    for (int j = 1; j <= 4; ++j) {
      const double u = t + (horizon - t) * j / 5.0;
      if (u > t && K(t, u) != 0.0)
        throw ParameterError("volterra kernel '" + name + "' is nonzero for s > t");
    }
  }
}

VolterraKernel VolterraKernel::brownian() {
  VolterraKernel k;
  k.name = "brownian";
  k.K = [](double t, double u) { return u <= t ? 1.0 : 0.0; };
  k.dK_dt = [](double, double) { return 0.0; };
  return k;
}

VolterraKernel VolterraKernel::riemann_liouville(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw ParameterError("riemann-liouville needs H in (0,1)");
  VolterraKernel k;
  k.name = "riemann-liouville";
  const double gamma = hurst - 0.5;
  k.K = [gamma](double t, double u) {
    if (u < t) return std::pow(t - u, gamma);
    return (u == t && gamma == 0.0) ? 1.0 : 0.0;
  };
  k.dK_dt = [gamma](double t, double u) {
    return u < t ? gamma * std::pow(t - u, gamma - 1.0) : 0.0;
  };
  k.singularity_exponent = gamma;
  return k;
}

VolterraKernel VolterraKernel::tabulated(std::vector<double> t_grid,
                                         std::vector<double> s_grid,
                                         std::vector<double> values) {
  if (t_grid.empty() || s_grid.empty() || values.size() != t_grid.size() * s_grid.size())
    throw ParameterError("tabulated kernel needs |t| * |s| values");
  if (!std::is_sorted(t_grid.begin(), t_grid.end()) ||
      !std::is_sorted(s_grid.begin(), s_grid.end()))
    throw ParameterError("tabulated kernel grids must be increasing");
  for (std::size_t i = 0; i < t_grid.size(); ++i)
    for (std::size_t j = 0; j < s_grid.size(); ++j)
      if (s_grid[j] > t_grid[i] && values[i * s_grid.size() + j] != 0.0)
        throw ParameterError("tabulated kernel is nonzero for s > t");

  auto table = std::make_shared<const std::tuple<std::vector<double>, std::vector<double>,
                                                 std::vector<double>>>(
      std::move(t_grid), std::move(s_grid), std::move(values));
  VolterraKernel k;
  k.name = "tabulated";
  k.K = [table](double t, double u) {
    if (u > t) return 0.0;
    const auto& [tg, sg, v] = *table;
    const auto [i, a] = locate(tg, t);
    const auto [j, b] = locate(sg, u);
    const std::size_t ns = sg.size();
    const std::size_t i1 = std::min(i + 1, tg.size() - 1);
    const std::size_t j1 = std::min(j + 1, ns - 1);
    return (1 - a) * (1 - b) * v[i * ns + j] + (1 - a) * b * v[i * ns + j1] +
           a * (1 - b) * v[i1 * ns + j] + a * b * v[i1 * ns + j1];
  };
  return k;
}

SelfSimilarProfile::SelfSimilarProfile(std::function<double(double)> F, double beta,
                                       std::optional<double> upper_singularity,
                                       std::string name)
    : F_(std::move(F)),
      beta_(beta),
      upper_singularity_(upper_singularity),
      name_(std::move(name)) {
  if (!(beta_ > 0.0)) throw ParameterError("self-similarity index must be positive");
  for (int k = 1; k < 64; ++k) {
    const double x = k / 64.0;
    const double v = F_(x);
    if (!(v > 0.0) || !std::isfinite(v))
      throw ParameterError("profile F must be positive on (0,1); F(" + std::to_string(x) +
                           ") = " + std::to_string(v));
  }
  QuadSettings quad;
  quad.abs_tol = 1e-10;
  quad.max_intervals = 20000;
  auto sq = [this](double x) {
    const double v = F_(x);
    return v * v;
  };
  QuadResult r;
  if (upper_singularity_ && *upper_singularity_ < 0.0) {
    try {
      r.value = integrate_upper_singular(sq, 0.0, 1.0, *upper_singularity_, quad);
    } catch (const QuadratureError&) {
      r.converged = false;
    }
  } else {
    r = integrate(sq, 0.0, 1.0, quad);
    if (!r.converged && r.error <= 1e-6 * (1.0 + std::abs(r.value))) r.converged = true;
  }
  if (!r.converged || !std::isfinite(r.value))
    throw ParameterError("profile F is not square integrable on (0,1)");
}

SelfSimilarProfile SelfSimilarProfile::constant(double value, double beta) {
  return SelfSimilarProfile([value](double) { return value; }, beta, std::nullopt,
                            "constant");
}

SelfSimilarProfile SelfSimilarProfile::power(double beta, double hurst) {
  const double a = beta - hurst;
  const double b = hurst - 0.5;
  return SelfSimilarProfile(
      [a, b](double x) { return std::pow(x, a) * std::pow(1.0 - x, b); }, beta, b,
      "power");
}

SelfSimilarProfile SelfSimilarProfile::linear(double beta) {
  return SelfSimilarProfile([](double x) { return x; }, beta, std::nullopt, "linear");
}

VolterraKernel selfsimilar_kernel(const SelfSimilarProfile& profile) {
  auto p = std::make_shared<const SelfSimilarProfile>(profile);
  VolterraKernel k;
  k.name = "selfsimilar(" + profile.name() + ")";
  const double expo = profile.beta() - 0.5;
  k.K = [p, expo](double t, double u) {
    if (t <= 0.0 || u >= t) return 0.0;
    return std::pow(t, expo) * (*p)(u / t);
  };
  k.singularity_exponent = profile.upper_singularity();
  return k;
}

// ---------------------------------------------------------------------------
// CovarianceModel

CovarianceModel CovarianceModel::fbm(double hurst, double horizon) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw ParameterError("fbm needs H in (0,1)");
  if (!(horizon > 0.0)) throw ParameterError("horizon must be positive");
  CovarianceModel m;
  m.kind_ = ModelKind::fbm;
  m.hurst_ = hurst;
  m.horizon_ = horizon;
  return m;
}

CovarianceModel CovarianceModel::brownian(double horizon) {
  if (!(horizon > 0.0)) throw ParameterError("horizon must be positive");
  CovarianceModel m;
  m.kind_ = ModelKind::bm;
  m.hurst_ = 0.5;
  m.horizon_ = horizon;
  return m;
}

CovarianceModel CovarianceModel::ornstein_uhlenbeck(double sigma, double theta,
                                                    double horizon) {
  if (!(sigma > 0.0 && theta > 0.0)) throw ParameterError("ou needs sigma > 0, theta > 0");
  if (!(horizon > 0.0)) throw ParameterError("horizon must be positive");
  CovarianceModel m;
  m.kind_ = ModelKind::ou;
  m.sigma_ = sigma;
  m.theta_ = theta;
  m.hurst_ = 0.5;
  m.horizon_ = horizon;
  return m;
}

CovarianceModel CovarianceModel::spectral(SpectralMeasure measure, double horizon,
                                          QuadSettings quad) {
  if (!(horizon > 0.0)) throw ParameterError("horizon must be positive");
  CovarianceModel m;
  m.kind_ = ModelKind::spectral;
  m.spectral_ = std::make_shared<const SpectralMeasure>(std::move(measure));
  m.horizon_ = horizon;
  m.quad_ = quad;
  return m;
}

CovarianceModel CovarianceModel::volterra(VolterraKernel kernel, double horizon,
                                          QuadSettings quad) {
  if (!(horizon > 0.0)) throw ParameterError("horizon must be positive");
  kernel.validate(horizon);
  CovarianceModel m;
  m.kind_ = ModelKind::volterra;
  m.kernel_ = std::make_shared<const VolterraKernel>(std::move(kernel));
  m.horizon_ = horizon;
  m.quad_ = quad;
  return m;
}

CovarianceModel CovarianceModel::selfsimilar(const SelfSimilarProfile& profile,
                                             double horizon, QuadSettings quad) {
  CovarianceModel m = volterra(selfsimilar_kernel(profile), horizon, quad);
  m.kind_ = ModelKind::selfsimilar;
  m.profile_ = std::make_shared<const SelfSimilarProfile>(profile);
  return m;
}

CovarianceModel CovarianceModel::modulated_fbm(double hurst, double t_max, double power) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw ParameterError("modulated-fbm needs H in (0,1)");
  if (!(t_max > 0.0 && t_max < std::exp(-1.0)))
    throw ParameterError("modulated-fbm needs 0 < t_max < 1/e");
  CovarianceModel m;
  m.kind_ = ModelKind::modulated_fbm;
  m.hurst_ = hurst;
  m.horizon_ = t_max;
  m.power_ = power;
  return m;
}

bool CovarianceModel::has_stationary_increments() const {
  return kind_ == ModelKind::fbm || kind_ == ModelKind::bm || kind_ == ModelKind::ou ||
         kind_ == ModelKind::spectral;
}

CovarianceModel CovarianceModel::scaled(double lambda) const {
  CovarianceModel m = *this;
  m.scale_ *= lambda * lambda;
  return m;
}

double CovarianceModel::modulation(double t) const {
  if (kind_ != ModelKind::modulated_fbm)
    throw CapabilityError("modulation is defined for modulated-fbm only");
  if (t <= 0.0) return power_ < 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::pow(std::log(std::log(1.0 / t)), power_);
}

std::string CovarianceModel::id() const {
  std::ostringstream os;
  os << to_string(kind_) << "(";
  switch (kind_) {
    case ModelKind::fbm: os << "H=" << hurst_; break;
    case ModelKind::bm: break;
    case ModelKind::ou: os << "sigma=" << sigma_ << ",theta=" << theta_; break;
    case ModelKind::spectral: os << "density=" << spectral_->name(); break;
    case ModelKind::volterra: os << "kernel=" << kernel_->name; break;
    case ModelKind::selfsimilar:
      os << "profile=" << profile_->name() << ",beta=" << profile_->beta();
      break;
    case ModelKind::modulated_fbm: os << "H=" << hurst_ << ",power=" << power_; break;
  }
  if (kind_ != ModelKind::bm) os << ",";
  os << "T=" << horizon_;
  if (scale_ != 1.0) os << ",scale=" << scale_;
  os << ")";
  return os.str();
}

void CovarianceModel::check_time(double t) const {
  const double tol = 1e-12 * horizon_;
  if (!(t >= -tol && t <= horizon_ + tol)) {
    std::ostringstream os;
    os << "time " << t << " outside [0, " << horizon_ << "] for " << id();
    throw DomainError(os.str());
  }
}

// ---------------------------------------------------------------------------
// Evaluation

double cov_eval(const CovarianceModel& model, double s, double t) {
  model.check_time(s);
  model.check_time(t);
  s = std::max(s, 0.0);
  t = std::max(t, 0.0);
  double r = 0.0;
  switch (model.kind()) {
    case ModelKind::fbm: r = fbm_cov(model.hurst(), s, t); break;
    case ModelKind::bm: r = std::min(s, t); break;
    case ModelKind::ou: {
      const double sg = model.ou_sigma();
      r = sg * sg * std::exp(-model.ou_theta() * std::abs(t - s));
      break;
    }
    case ModelKind::spectral: {
      const SpectralMeasure& m = *model.spectral_measure();
      r = m.atom_at_zero() + 2.0 * (m.half_line_mass() -
                                    spectral_increment_integral(m, std::abs(t - s),
                                                                model.quad()));
      break;
    }
    case ModelKind::volterra:
    case ModelKind::selfsimilar: r = volterra_cov(*model.kernel(), s, t, model.quad()); break;
    case ModelKind::modulated_fbm:
      if (s == 0.0 || t == 0.0) return 0.0;
      r = model.modulation(s) * model.modulation(t) * fbm_cov(model.hurst(), s, t);
      break;
  }
  return model.scale() * r;
}

double increment_variance(const CovarianceModel& model, double s, double t) {
  model.check_time(s);
  model.check_time(t);
  double lo = std::max(std::min(s, t), 0.0);
  double hi = std::max(std::max(s, t), 0.0);
  const double h = hi - lo;
  if (h == 0.0) return 0.0;
  double v = 0.0;
  switch (model.kind()) {
    case ModelKind::fbm: v = std::pow(h, 2.0 * model.hurst()); break;
    case ModelKind::bm: v = h; break;
    case ModelKind::ou: {
      const double sg = model.ou_sigma();
      v = -2.0 * sg * sg * std::expm1(-model.ou_theta() * h);
      break;
    }
    case ModelKind::spectral:
      v = 4.0 * spectral_increment_integral(*model.spectral_measure(), h, model.quad());
      break;
    case ModelKind::volterra:
    case ModelKind::selfsimilar:
      v = volterra_diagonal_integral(*model.kernel(), lo, hi, model.quad()) +
          volterra_increment_integral(*model.kernel(), lo, hi, model.quad());
      break;
    case ModelKind::modulated_fbm: {
      const double two_h = 2.0 * model.hurst();
      const double ft = model.modulation(hi);
      const double pt = std::pow(hi, two_h);
      if (lo == 0.0) {
        v = ft * ft * pt;
        break;
      }
      const double fs = model.modulation(lo);
      const double ps = std::pow(lo, two_h);
      v = fs * ft * std::pow(h, two_h) + (ft - fs) * (ft * pt - fs * ps);
      break;
    }
  }
  return model.scale() * std::max(v, 0.0);
}

double increment_stddev(const CovarianceModel& model, double s, double t) {
  return std::sqrt(increment_variance(model, s, t));
}

double increment_stddev_from_covariance(const CovarianceModel& model, double s, double t) {
  const double rss = cov_eval(model, s, s);
  const double rtt = cov_eval(model, t, t);
  const double rst = cov_eval(model, s, t);
  const double radicand = rtt - 2.0 * rst + rss;
  if (radicand >= 0.0) return std::sqrt(radicand);
  const double scale = std::max({rss, rtt, 1.0});
  if (radicand >= -1e-12 * scale) return 0.0;
  std::ostringstream os;
  os << "negative increment variance " << radicand << " at (" << s << ", " << t
     << ") for " << model.id();
  throw NumericalConsistencyError(os.str());
}

Eigen::MatrixXd gram_matrix(const CovarianceModel& model, std::span<const double> grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = cov_eval(model, grid[i], grid[j]);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

double volterra_cov(const VolterraKernel& kernel, double s, double t,
                    const QuadSettings& quad) {
  const double m = std::min(s, t);
  if (m <= 0.0) return 0.0;
  auto integrand = [&](double u) { return kernel(t, u) * kernel(s, u); };
  return integrate_upper_singular(integrand, 0.0, m,
                                  kernel.singularity_exponent.value_or(0.0), quad);
}

double volterra_diagonal_integral(const VolterraKernel& kernel, double s, double t,
                                  const QuadSettings& quad) {
  if (t <= s) return 0.0;
  auto integrand = [&](double u) {
    const double k = kernel(t, u);
    return k * k;
  };
  return integrate_upper_singular(integrand, s, t,
                                  kernel.singularity_exponent.value_or(0.0), quad);
}

double volterra_increment_integral(const VolterraKernel& kernel, double s, double t,
                                   const QuadSettings& quad) {
  if (s <= 0.0 || t <= s) return 0.0;
  auto integrand = [&](double u) {
    const double d = kernel(t, u) - kernel(s, u);
    return d * d;
  };
  return integrate_upper_singular(integrand, 0.0, s,
                                  kernel.singularity_exponent.value_or(0.0), quad);
}

namespace {

double spectral_increment_pass(const SpectralMeasure& measure, double t,
                               const QuadSettings& quad) {

  // 1 - cos(x) = 2 sin^2(x/2) avoids cancellation at small lambda*t.
  auto one_minus_cos = [&](double l) {
    const double s = std::sin(0.5 * l * t);
    return 2.0 * s * s * measure.density(l);
  };
  const double period = 2.0 * kPi / t;

  // Adaptive quadrature period by period over [0, upper]. The first chunk is
  // split at powers of two so density features far below one period are seen.
  auto over_periods = [&](double upper) {
    constexpr double kMaxChunks = 4096.0;
    const double chunks = std::min(kMaxChunks, std::ceil(upper / period));
    const double width = upper / chunks;
    double sum = 0.0;
    double lo = 0.0;
    for (double edge = 1.0 / 64.0; edge < width; edge *= 2.0) {
      sum += integrate_checked(one_minus_cos, lo, edge, quad);
      lo = edge;
    }
    for (int k = 0; k < static_cast<int>(chunks); ++k)
      sum += integrate_checked(one_minus_cos, k == 0 ? lo : k * width,
                               k + 1 == static_cast<int>(chunks) ? upper : (k + 1) * width,
                               quad);
    return sum;
  };

  if (std::isfinite(measure.truncation())) return over_periods(measure.truncation());

  // Infinite support: [0, L] directly, then the tail split into the
  // non-oscillatory mass and an alternating cosine series.
  constexpr double kReferenceFrequency = 50.0;
  const double cutoff = period * std::max(1.0, std::ceil(kReferenceFrequency / period));
  const double head = over_periods(cutoff);

  QuadSettings fine = quad;
  fine.abs_tol = quad.abs_tol * 1e-2;
  const double tail_mass = integrate_to_infinity(
      [&](double l) { return measure.density(l); }, cutoff, fine);

  auto cosine = [&](double l) { return std::cos(l * t) * measure.density(l); };
  const double half = 0.5 * period;
  constexpr int kPieces = 60;
  std::vector<double> partial;
  partial.reserve(kPieces);
  double running = 0.0;
  for (int k = 0; k < kPieces; ++k) {
    running += integrate_checked(cosine, cutoff + k * half, cutoff + (k + 1) * half, fine);
    partial.push_back(running);
  }
  const double tail_cosine = wynn_epsilon(partial);
  return head + tail_mass - tail_cosine;
}

}  // namespace

double spectral_increment_integral(const SpectralMeasure& measure, double t,
                                   const QuadSettings& quad) {
  t = std::abs(t);
  if (t == 0.0 || measure.zero_density()) return 0.0;
  // I(t) shrinks like t^2 (or t^(2H)) at small lags, so the absolute tolerance
  // is rescaled by a first-pass magnitude to keep the relative error small.
  const double rough = spectral_increment_pass(measure, t, quad);
  if (!(rough > 0.0) || rough >= 1.0) return rough;
  QuadSettings scaled = quad;
  scaled.abs_tol = quad.abs_tol * rough;
  return spectral_increment_pass(measure, t, scaled);
}

}  // namespace holder
