#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "holder/covariance.hpp"

namespace holder {

enum class SimulationMethod { cholesky, circulant };

std::string to_string(SimulationMethod method);
SimulationMethod simulation_method_from_string(const std::string& name);

/// Relative diagonal jitter ladder start, start*growth, ..., max.
struct JitterPolicy {
  double start = 1e-12;
  double growth = 10.0;
  double max = 1e-6;
};

struct PathMeta {
  std::string model_id;
  std::uint64_t seed = 0;
  SimulationMethod method = SimulationMethod::cholesky;
  std::size_t path_index = 0;
  double jitter = 0.0;       // absolute diagonal jitter added (cholesky)
  double clip_mass = 0.0;    // clipped negative eigenvalue mass (circulant)
};

struct SamplePath {
  std::vector<double> grid;
  std::vector<double> values;
  PathMeta meta;
};

struct SimulationPlan {
  SimulationPlan(CovarianceModel model, std::vector<double> grid, std::size_t n_paths,
                 std::uint64_t seed, SimulationMethod method = SimulationMethod::cholesky,
                 JitterPolicy jitter = {});

  CovarianceModel model;
  std::vector<double> grid;
  std::size_t n_paths;
  std::uint64_t seed;
  SimulationMethod method;
  JitterPolicy jitter;
};

struct CholeskyResult {
  Eigen::MatrixXd lower;
  double jitter = 0.0;  // absolute delta with L L^T = gram + delta I
};

/// Lower Cholesky factor, trying delta = 0 and then the jitter ladder
/// (relative to the largest diagonal entry).
CholeskyResult cholesky_factor(const Eigen::MatrixXd& gram, const JitterPolicy& policy = {});

std::vector<SamplePath> sample_paths(const SimulationPlan& plan, unsigned threads = 0);

struct CirculantReport {
  double clip_mass = 0.0;
  double max_eigenvalue = 0.0;
  std::size_t embedding_size = 0;
};

/// Exact stationary-increment synthesis on a uniform grid whose first point
/// is an integer multiple of the step: the increment autocovariance is
/// embedded in a circulant of size 2N, diagonalised by FFT, and increments
/// are cumulatively summed from X(0) = 0.
std::vector<SamplePath> circulant_embed_sample(const CovarianceModel& model,
                                               std::span<const double> grid,
                                               std::size_t n_paths, std::uint64_t seed,
                                               unsigned threads = 0,
                                               CirculantReport* report = nullptr);

/// Eigenvalues of the circulant embedding of the fBm/bm increment
/// autocovariance for N steps of size `step`.
std::vector<double> circulant_eigenvalues(const CovarianceModel& model, double step,
                                          std::size_t steps);

/// CSV with header `t,p0,p1,...`, one row per grid point, 17 significant digits.
void write_paths_csv(std::ostream& os, std::span<const SamplePath> paths);

}  // namespace holder
