#include "holder/simulate.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>

#include "holder/error.hpp"
#include "holder/parallel.hpp"
#include "holder/random.hpp"

namespace holder {
namespace {

// The FFTW planner is not thread-safe; execution of an existing plan is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

FftwBuffer make_buffer(std::size_t n) {
  auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer(p);
}

class ForwardPlan {
 public:
  explicit ForwardPlan(std::size_t n) : n_(n) {
    auto in = make_buffer(n);
    auto out = make_buffer(n);
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), in.get(), out.get(), FFTW_FORWARD,
                             FFTW_ESTIMATE);
  }
  ~ForwardPlan() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }
  ForwardPlan(const ForwardPlan&) = delete;
  ForwardPlan& operator=(const ForwardPlan&) = delete;

  // Buffers must come from make_buffer (same alignment as at planning).
  void execute(fftw_complex* in, fftw_complex* out) const { fftw_execute_dft(plan_, in, out); }
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  fftw_plan plan_;
};

// Autocovariance of increments of size `step` at lag k (fBm family; bm is H = 1/2).
double increment_autocovariance(double hurst, double step, std::size_t k) {
  if (hurst == 0.5) return k == 0 ? step : 0.0;
  const double two_h = 2.0 * hurst;
  const double kk = static_cast<double>(k);
  const double g = 0.5 * (std::pow(kk + 1.0, two_h) - 2.0 * std::pow(kk, two_h) +
                          std::pow(std::abs(kk - 1.0), two_h));
  return std::pow(step, two_h) * g;
}

void require_plan_grid(std::span<const double> grid) {
  if (grid.empty()) throw ParameterError("simulation grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw ParameterError("simulation grid must be strictly increasing");
}

std::vector<SamplePath> cholesky_sample(const CovarianceModel& model,
                                        std::span<const double> grid, std::size_t n_paths,
                                        std::uint64_t seed, const JitterPolicy& jitter,
                                        unsigned threads) {
  // Points with zero variance (e.g. t = 0 for fBm) are identically 0.
  std::vector<double> active;
  std::vector<std::size_t> active_index;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (cov_eval(model, grid[i], grid[i]) > 0.0) {
      active.push_back(grid[i]);
      active_index.push_back(i);
    }
  }
  CholeskyResult chol;
  if (!active.empty()) chol = cholesky_factor(gram_matrix(model, active), jitter);
  const auto m = static_cast<Eigen::Index>(active.size());

  std::vector<SamplePath> paths(n_paths);
  parallel_for(n_paths, threads, [&](std::size_t p) {
    SamplePath& path = paths[p];
    path.grid.assign(grid.begin(), grid.end());
    path.values.assign(grid.size(), 0.0);
    path.meta = {model.id(), seed, SimulationMethod::cholesky, p, chol.jitter, 0.0};
    if (m == 0) return;
    Eigen::VectorXd z(m);
    fill_standard_normals(stream_seed(seed, p), z.data(), static_cast<std::size_t>(m));
    const Eigen::VectorXd x = chol.lower.triangularView<Eigen::Lower>() * z;
    for (Eigen::Index k = 0; k < m; ++k) path.values[active_index[k]] = x[k];
  });
  return paths;
}

}  // namespace

std::string to_string(SimulationMethod method) {
  return method == SimulationMethod::cholesky ? "cholesky" : "circulant";
}

SimulationMethod simulation_method_from_string(const std::string& name) {
  if (name == "cholesky") return SimulationMethod::cholesky;
  if (name == "circulant") return SimulationMethod::circulant;
  throw ParameterError("unknown simulation method '" + name + "'");
}

SimulationPlan::SimulationPlan(CovarianceModel model_, std::vector<double> grid_,
                               std::size_t n_paths_, std::uint64_t seed_,
                               SimulationMethod method_, JitterPolicy jitter_)
    : model(std::move(model_)),
      grid(std::move(grid_)),
      n_paths(n_paths_),
      seed(seed_),
      method(method_),
      jitter(jitter_) {
  if (n_paths == 0) throw ParameterError("simulation plan needs n_paths >= 1");
  require_plan_grid(grid);
  for (double t : grid) model.check_time(t);
}

CholeskyResult cholesky_factor(const Eigen::MatrixXd& gram, const JitterPolicy& policy) {
  if (gram.rows() != gram.cols()) throw ParameterError("gram matrix must be square");
  const double scale = gram.rows() > 0 ? gram.diagonal().cwiseAbs().maxCoeff() : 1.0;
  const auto n = gram.rows();
  auto attempt = [&](double delta, CholeskyResult& out) {
    Eigen::MatrixXd a = gram;
    a.diagonal().array() += delta;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) return false;
    Eigen::MatrixXd l = llt.matrixL();
    if (!l.allFinite()) return false;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!(l(i, i) > 0.0)) return false;
    out.lower = std::move(l);
    out.jitter = delta;
    return true;
  };
  CholeskyResult out;
  if (attempt(0.0, out)) return out;
  for (double rel = policy.start; rel <= policy.max * (1.0 + 1e-12); rel *= policy.growth) {
    if (attempt(rel * scale, out)) return out;
  }
  std::ostringstream os;
  os << "gram matrix of size " << n << " is not positive definite at jitter "
     << policy.max << " (relative)";
  throw NotPositiveDefiniteError(os.str());
}

std::vector<double> circulant_eigenvalues(const CovarianceModel& model, double step,
                                          std::size_t steps) {
  if (steps == 0) return {};
  const std::size_t size = 2 * steps;
  auto in = make_buffer(size);
  auto out = make_buffer(size);
  const double hurst = model.hurst();
  for (std::size_t k = 0; k < size; ++k) {
    const std::size_t lag = k <= steps ? k : size - k;
    in[k][0] = model.scale() * increment_autocovariance(hurst, step, lag);
    in[k][1] = 0.0;
  }
  ForwardPlan plan(size);
  plan.execute(in.get(), out.get());
  std::vector<double> eig(size);
  for (std::size_t k = 0; k < size; ++k) eig[k] = out[k][0];
  return eig;
}

std::vector<SamplePath> circulant_embed_sample(const CovarianceModel& model,
                                               std::span<const double> grid,
                                               std::size_t n_paths, std::uint64_t seed,
                                               unsigned threads, CirculantReport* report) {
  if (model.kind() != ModelKind::fbm && model.kind() != ModelKind::bm)
    throw CapabilityError("circulant embedding needs an fbm or bm model, got " + model.id());
  require_plan_grid(grid);
  for (double t : grid) model.check_time(t);

  double step = 0.0;
  if (grid.size() == 1) {
    step = grid[0];
  } else {
    step = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double expected = grid.front() + step * static_cast<double>(i);
      if (std::abs(grid[i] - expected) > 1e-9 * (step + std::abs(expected)))
        throw CapabilityError("circulant embedding needs a uniform grid");
    }
  }
  std::size_t offset = 0;
  if (step > 0.0) {
    const double m = std::round(grid.front() / step);
    if (std::abs(grid.front() - m * step) > 1e-9 * step)
      throw CapabilityError("circulant embedding needs the grid to start at a multiple of its step");
    offset = static_cast<std::size_t>(m);
  }
  const std::size_t steps = step > 0.0 ? offset + grid.size() - 1 : 0;

  std::vector<double> eig = circulant_eigenvalues(model, step, steps);
  CirculantReport rep;
  rep.embedding_size = eig.size();
  for (double e : eig) rep.max_eigenvalue = std::max(rep.max_eigenvalue, e);
  for (double& e : eig) {
    if (e >= 0.0) continue;
    if (-e > 1e-8 * rep.max_eigenvalue) {
      std::ostringstream os;
      os << "circulant embedding has eigenvalue " << e << " below tolerance (max "
         << rep.max_eigenvalue << ")";
      throw EmbeddingError(os.str());
    }
    rep.clip_mass += -e;
    e = 0.0;
  }
  if (report != nullptr) *report = rep;

  const std::size_t size = eig.size();
  std::vector<double> amplitude(size);
  for (std::size_t k = 0; k < size; ++k)
    amplitude[k] = std::sqrt(eig[k] / static_cast<double>(size));

  std::unique_ptr<ForwardPlan> plan;
  if (size > 0) plan = std::make_unique<ForwardPlan>(size);

  std::vector<SamplePath> paths(n_paths);
  parallel_for(n_paths, threads, [&](std::size_t p) {
    SamplePath& path = paths[p];
    path.grid.assign(grid.begin(), grid.end());
    path.values.assign(grid.size(), 0.0);
    path.meta = {model.id(), seed, SimulationMethod::circulant, p, 0.0, rep.clip_mass};
    if (size == 0) return;
    std::vector<double> z(2 * size);
    fill_standard_normals(stream_seed(seed, p), z.data(), z.size());
    auto in = make_buffer(size);
    auto out = make_buffer(size);
    for (std::size_t k = 0; k < size; ++k) {
      in[k][0] = amplitude[k] * z[2 * k];
      in[k][1] = amplitude[k] * z[2 * k + 1];
    }
    plan->execute(in.get(), out.get());
    double level = 0.0;
    std::size_t next = 0;  // next grid index to fill
    if (offset == 0) path.values[next++] = 0.0;
    for (std::size_t j = 0; j < steps && next < grid.size(); ++j) {
      level += out[j][0];
      if (j + 1 >= offset) path.values[next++] = level;
    }
  });
  return paths;
}

std::vector<SamplePath> sample_paths(const SimulationPlan& plan, unsigned threads) {
  const CovarianceModel& model = plan.model;
  if (model.kind() == ModelKind::modulated_fbm) {
    // f(t) * B_t with B sampled on its own; never through the modulated gram.
    const CovarianceModel base =
        CovarianceModel::fbm(model.hurst(), model.horizon()).scaled(std::sqrt(model.scale()));
    SimulationPlan base_plan(base, plan.grid, plan.n_paths, plan.seed, plan.method,
                             plan.jitter);
    std::vector<SamplePath> paths = sample_paths(base_plan, threads);
    for (auto& path : paths) {
      path.meta.model_id = model.id();
      for (std::size_t i = 0; i < path.grid.size(); ++i)
        path.values[i] = path.grid[i] > 0.0 ? model.modulation(path.grid[i]) * path.values[i]
                                            : 0.0;
    }
    return paths;
  }
  if (plan.method == SimulationMethod::circulant)
    return circulant_embed_sample(model, plan.grid, plan.n_paths, plan.seed, threads);
  return cholesky_sample(model, plan.grid, plan.n_paths, plan.seed, plan.jitter, threads);
}

void write_paths_csv(std::ostream& os, std::span<const SamplePath> paths) {
  os << "t";
  for (std::size_t p = 0; p < paths.size(); ++p) os << ",p" << p;
  os << "\n";
  if (paths.empty()) return;
  char buf[40];
  const auto& grid = paths.front().grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", grid[i]);
    os << buf;
    for (const auto& path : paths) {
      std::snprintf(buf, sizeof buf, "%.17g", path.values[i]);
      os << ',' << buf;
    }
    os << '\n';
  }
}

}  // namespace holder
