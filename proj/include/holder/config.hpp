#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "holder/covariance.hpp"
#include "holder/simulate.hpp"

namespace holder {

/// Model section. Which fields matter depends on `kind`.
struct ModelSpec {
  std::string kind = "fbm";
  double horizon = 1.0;
  std::optional<double> hurst;
  double sigma = 1.0;   // ou, spectral ou
  double theta = 1.0;   // ou, spectral ou
  double power = 0.5;   // modulated-fbm
  // spectral: family ou | matern
  std::string spectral_family = "ou";
  double truncation = 0.0;  // 0: untruncated
  // volterra: family brownian | riemann-liouville
  std::string kernel_family = "brownian";
  // selfsimilar: family constant | power | linear
  std::string profile_family = "constant";
  double beta = 0.5;
  double profile_value = 1.0;
};

struct GridSpec {
  std::size_t intervals = 1024;  // uniform grid on [start, horizon]
  double start = 0.0;
  std::vector<double> points;    // explicit grid; overrides the uniform one
};

struct RunConfig {
  ModelSpec model;
  GridSpec grid;
  std::vector<std::string> analyses;
  std::vector<double> epsilons{0.1};
  std::optional<double> H;
  std::uint64_t seed = 42;
  std::size_t n_paths = 16;
  std::string method = "cholesky";
  std::string output = "out";
  // dyadic lag exponents for decay fits: T 2^{-k}, k = lag_k_min..lag_k_max
  int lag_k_min = 4;
  int lag_k_max = 16;
  // dyadic grids 2^k intervals, k = divergence_k_min..divergence_k_max
  int divergence_k_min = 6;
  int divergence_k_max = 12;
  // fredholm: constant dominating function on u_points interior points
  double fredholm_f = 1.0;
  std::size_t fredholm_u_points = 64;
  // pathstats exponential moment
  double moment_a = 0.1;
  double moment_kappa = 1.5;
  std::size_t series_terms = 200;
};

/// Names accepted in `analyses`, in documentation order.
const std::vector<std::string>& known_analyses();

/// Strict YAML parsing: unknown keys, wrong types and invalid values raise
/// ConfigError with the line number and key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

CovarianceModel build_model(const ModelSpec& spec);
std::vector<double> build_grid(const RunConfig& config);

/// Explicit H, else the model's own index when it has one.
std::optional<double> effective_hurst(const RunConfig& config);

}  // namespace holder
