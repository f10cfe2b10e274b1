#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "holder/quadrature.hpp"

namespace holder {

enum class ModelKind { fbm, bm, ou, spectral, volterra, selfsimilar, modulated_fbm };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// Symmetric spectral measure on the real line, stored as its density on
/// lambda >= 0 plus an optional point mass at the origin. The covariance is
/// r(t) = atom + 2 * int_0^cutoff cos(lambda t) density(lambda) dlambda.
class SpectralMeasure {
 public:
  SpectralMeasure(std::function<double(double)> density,
                  double truncation = std::numeric_limits<double>::infinity(),
                  double atom_at_zero = 0.0, std::string name = "custom");

  /// OU spectrum sigma^2 theta / (pi (theta^2 + lambda^2)); r(t) = sigma^2 e^{-theta|t|}.
  static SpectralMeasure ornstein_uhlenbeck(double sigma, double theta);
  /// Matern-type density (1 + lambda^2)^{-(H + 1/2)}, Holder index H.
  static SpectralMeasure matern(double hurst);
  static SpectralMeasure point_mass(double mass);

  double density(double lambda) const { return density_(lambda); }
  double truncation() const { return truncation_; }
  double atom_at_zero() const { return atom_; }
  /// int_0^cutoff density.
  double half_line_mass() const { return mass_; }
  /// 2 * int_cutoff^inf density, when the density is defined past the cutoff.
  double tail_bound() const { return tail_bound_; }
  const std::string& name() const { return name_; }
  bool zero_density() const { return zero_density_; }

 private:
  std::function<double(double)> density_;
  double truncation_;
  double atom_;
  double mass_ = 0.0;
  double tail_bound_ = 0.0;
  std::string name_;
  bool zero_density_ = false;
};

/// Kernel K(t, u) of a Gaussian Volterra process X_t = int_0^t K(t,u) dW_u.
struct VolterraKernel {
  std::string name = "custom";
  std::function<double(double, double)> K;
  std::function<double(double, double)> dK_dt;  // optional
  /// gamma with K(t,u) ~ (t-u)^gamma as u -> t.
  std::optional<double> singularity_exponent;

  double operator()(double t, double u) const { return u > t ? 0.0 : K(t, u); }
  bool has_derivative() const { return static_cast<bool>(dK_dt); }

  /// Throws ParameterError when the invariants are violated on a sample.
  void validate(double horizon) const;

  static VolterraKernel brownian();
  /// Riemann-Liouville kernel (t-u)^{H-1/2}.
  static VolterraKernel riemann_liouville(double hurst);
  /// Bilinear interpolation of (t, s, K) samples on a rectangular grid.
  static VolterraKernel tabulated(std::vector<double> t_grid,
                                  std::vector<double> s_grid,
                                  std::vector<double> values);
};

/// Profile F on (0,1) and index beta of a self-similar process
/// X_t = int_0^t t^{beta-1/2} F(u/t) dW_u.
class SelfSimilarProfile {
 public:
  SelfSimilarProfile(std::function<double(double)> F, double beta,
                     std::optional<double> upper_singularity = std::nullopt,
                     std::string name = "custom");

  static SelfSimilarProfile constant(double value, double beta);
  /// F(x) = x^{beta-H} (1-x)^{H-1/2}.
  static SelfSimilarProfile power(double beta, double hurst);
  static SelfSimilarProfile linear(double beta);

  double operator()(double x) const { return F_(x); }
  double beta() const { return beta_; }
  std::optional<double> upper_singularity() const { return upper_singularity_; }
  const std::string& name() const { return name_; }

 private:
  std::function<double(double)> F_;
  double beta_;
  std::optional<double> upper_singularity_;
  std::string name_;
};

VolterraKernel selfsimilar_kernel(const SelfSimilarProfile& profile);

/// A centred Gaussian covariance family on [0, T]. Immutable after construction.
class CovarianceModel {
 public:
  static CovarianceModel fbm(double hurst, double horizon = 1.0);
  static CovarianceModel brownian(double horizon = 1.0);
  static CovarianceModel ornstein_uhlenbeck(double sigma, double theta,
                                            double horizon = 1.0);
  static CovarianceModel spectral(SpectralMeasure measure, double horizon = 1.0,
                                  QuadSettings quad = {});
  static CovarianceModel volterra(VolterraKernel kernel, double horizon = 1.0,
                                  QuadSettings quad = {});
  static CovarianceModel selfsimilar(const SelfSimilarProfile& profile,
                                     double horizon = 1.0, QuadSettings quad = {});
  /// X_t = f(t) B_t with f(t) = (log log 1/t)^power, B an fBm of index
  /// `hurst`, on [0, t_max], t_max < 1/e.
  static CovarianceModel modulated_fbm(double hurst, double t_max = 0.3,
                                       double power = 0.5);

  ModelKind kind() const { return kind_; }
  double horizon() const { return horizon_; }
  /// Hurst index for fbm, bm (1/2) and modulated-fbm.
  double hurst() const { return hurst_; }
  double ou_sigma() const { return sigma_; }
  double ou_theta() const { return theta_; }
  double modulation_power() const { return power_; }
  /// Variance multiplier lambda^2 applied on top of the family.
  double scale() const { return scale_; }
  const SpectralMeasure* spectral_measure() const { return spectral_.get(); }
  const VolterraKernel* kernel() const { return kernel_.get(); }
  const SelfSimilarProfile* profile() const { return profile_.get(); }
  const QuadSettings& quad() const { return quad_; }

  /// Law of X_{t+h} - X_t independent of t.
  bool has_stationary_increments() const;
  /// X_0 = 0 and stationary increments, so sigma_X^2(t) = d_X^2(0, t).
  bool is_stationary_increment_from_origin() const {
    return kind_ == ModelKind::fbm || kind_ == ModelKind::bm;
  }
  /// Same family with covariance multiplied by lambda^2.
  CovarianceModel scaled(double lambda) const;

  /// Modulation f(t) of the modulated-fbm family.
  double modulation(double t) const;

  std::string id() const;

  /// Throws DomainError unless 0 <= t <= T (within round-off).
  void check_time(double t) const;

 private:
  CovarianceModel() = default;

  ModelKind kind_ = ModelKind::bm;
  double horizon_ = 1.0;
  double hurst_ = 0.5;
  double sigma_ = 1.0;
  double theta_ = 1.0;
  double power_ = 0.5;
  double scale_ = 1.0;
  std::shared_ptr<const SpectralMeasure> spectral_;
  std::shared_ptr<const VolterraKernel> kernel_;
  std::shared_ptr<const SelfSimilarProfile> profile_;
  QuadSettings quad_;
};

double cov_eval(const CovarianceModel& model, double s, double t);

/// d_X(s,t) = sqrt(E[(X_t - X_s)^2]).
double increment_stddev(const CovarianceModel& model, double s, double t);
double increment_variance(const CovarianceModel& model, double s, double t);

/// d_X from R via R(t,t) - 2R(s,t) + R(s,s). Radicands in
/// [-1e-12 * max(R(s,s), R(t,t), 1), 0) clamp to 0; more negative values
/// raise NumericalConsistencyError.
double increment_stddev_from_covariance(const CovarianceModel& model, double s,
                                        double t);

Eigen::MatrixXd gram_matrix(const CovarianceModel& model,
                            std::span<const double> grid);

/// R(s,t) = int_0^{min(s,t)} K(t,u) K(s,u) du.
double volterra_cov(const VolterraKernel& kernel, double s, double t,
                    const QuadSettings& quad = {});

/// int_s^t K(t,u)^2 du for s < t.
double volterra_diagonal_integral(const VolterraKernel& kernel, double s,
                                  double t, const QuadSettings& quad = {});

/// int_0^s (K(t,u) - K(s,u))^2 du for s < t.
double volterra_increment_integral(const VolterraKernel& kernel, double s,
                                   double t, const QuadSettings& quad = {});

/// I(t) = int_0^cutoff (1 - cos(lambda t)) density(lambda) dlambda. For
/// atomless measures d_X^2(s,t) = 4 I(|t-s|).
double spectral_increment_integral(const SpectralMeasure& measure, double t,
                                   const QuadSettings& quad = {});

}  // namespace holder
