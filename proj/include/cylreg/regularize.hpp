#pragma once

#include "cylreg/cylindrical.hpp"
#include "cylreg/operators.hpp"
#include "cylreg/space.hpp"

#include <memory>

namespace cylreg {

// The dual-space-valued path Y_t = sum_{j<=m} c_j(t) f_j built from the first
// m coordinates c_j(t) of a sample against a q-orthonormal system. Coordinates
// are stored at the sample's event times; evaluation between stored times
// holds the last value (cadlag step view).
struct RegularizedPath {
  std::shared_ptr<const OrthonormalSystem> system;
  Eigen::Index truncation = 0;          // m
  std::vector<double> times;            // event times of the underlying sample
  Eigen::MatrixXd coords;               // m x |times|
  // a priori r=2 bound on the discarded tail; 0 when no certified bound applies
  double tail_bound = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
  // largest |evaluation| observed along kernel-residual directions; reported,
  // not asserted, for drivers that need not vanish there
  double kernel_leakage = 0.0;

  std::size_t time_index(double t) const;   // last stored time <= t
  double coord(Eigen::Index j, double t) const;
  double eval_dual_pairing(const ModelVector& phi, double t) const;
  // sqrt(sum_j c_j(t)^2); by biorthonormality this is the dual norm of Y_t
  double qnorm_at(std::size_t time_idx) const;
  std::vector<double> qnorm_path() const;
  double qnorm_sup() const;
  // sup over times of sum_{j in [lo, hi)} c_j(t)^2, for band/moment checks
  double sup_partial_square_sum(Eigen::Index lo, Eigen::Index hi) const;
};

// Series coordinates c_j(t) = sample(phi_j, t) for j < m. Works for plain and
// composed samples (anything exposing pullback/base/event_times). Kernel
// residual directions are evaluated and their largest magnitude recorded.
template <class Sample>
RegularizedPath regularize_series(const Sample& sample,
                                  std::shared_ptr<const OrthonormalSystem> system,
                                  Eigen::Index m);

struct TruncationPlan {
  Eigen::Index m = 0;
  double r = 2.0;
  double tol = 0.0;
  // doob variant applies the martingale maximal-inequality constant
  enum class BoundKind { schatten_tail, doob_schatten_tail } bound_kind = BoundKind::schatten_tail;
  double achieved_bound = 0.0;
};

// A priori bound C_doob * K * sum_{j>m} sigma_j^r on the r-th moment of the
// sup-norm gap left by truncating at m, where C_doob = (r/(r-1))^r for
// martingale drivers and K is the driver's r-th absolute moment at the
// horizon (defaults to the standard-Brownian value).
double doob_constant(double r);
double brownian_abs_moment(double r, double horizon);
double truncation_tail_bound(const LinearOperator& S, Eigen::Index m, double r, double horizon,
                             bool martingale, double moment_scale = -1.0);

// Smallest m whose tail bound is <= tol (always exists: the bound vanishes at
// the operator rank).
TruncationPlan choose_truncation(const LinearOperator& S, double r, double tol, double horizon,
                                 bool martingale, double moment_scale = -1.0);

struct SupMomentEstimate {
  double estimate = 0.0;
  double stderror = 0.0;
};

// Monte Carlo mean/standard error of sup_t (dual norm of Y_t)^r.
SupMomentEstimate sup_moment_estimate(const std::vector<RegularizedPath>& replicas, double r);
SupMomentEstimate sup_moment_from_values(const std::vector<double>& sup_qnorm_r);

class DominationError : public std::runtime_error {
 public:
  DominationError(std::string message, ModelVector direction)
      : std::runtime_error(std::move(message)), direction(std::move(direction)) {}
  ModelVector direction;
};

// Radonification pipeline: fixes a cylindrical process X on the codomain
// model, an operator S into it, and a Hilbertian seminorm q on the domain;
// builds the q-orthonormal system once and turns per-replica samples of X
// into regularized paths of X o S. Construction verifies that |S phi| is
// dominated by a multiple of q(phi) and records the smallest such multiple.
class Radonifier {
 public:
  Radonifier(CylindricalLevy process, LinearOperator op, HilbertianSeminorm q,
             Eigen::Index m, double horizon, int grid_resolution, std::uint64_t seed);

  const CylindricalLevy& process() const { return process_; }
  const LinearOperator& op() const { return op_; }
  const std::shared_ptr<const OrthonormalSystem>& system() const { return system_; }
  Eigen::Index truncation() const { return m_; }
  double horizon() const { return horizon_; }
  int grid_resolution() const { return grid_resolution_; }
  std::uint64_t seed() const { return seed_; }
  double domination_scale() const { return domination_scale_; }
  // S phi_j for the system basis (the effective probe vectors in the codomain)
  const std::vector<ModelVector>& mapped_basis() const { return mapped_basis_; }
  double tail_bound(double r, bool martingale, double moment_scale = -1.0) const;

  CylPathSample sample(std::uint64_t replica) const;
  RegularizedPath from_sample(const CylPathSample& s) const;
  RegularizedPath run(std::uint64_t replica) const;

 private:
  CylindricalLevy process_;
  LinearOperator op_;
  HilbertianSeminorm q_;
  std::shared_ptr<const OrthonormalSystem> system_;
  Eigen::Index m_;
  double horizon_;
  int grid_resolution_;
  std::uint64_t seed_;
  double domination_scale_ = 0.0;
  double tail_bound2_ = 0.0;
  std::vector<ModelVector> mapped_basis_;
  std::vector<ModelVector> mapped_residuals_;
};

// One-shot wrapper around the pipeline.
RegularizedPath radonify(const CylindricalLevy& process, const LinearOperator& op,
                         const HilbertianSeminorm& q, Eigen::Index m, double horizon,
                         int grid_resolution, std::uint64_t seed, std::uint64_t replica);

// --- template implementation ---

template <class Sample>
RegularizedPath regularize_series(const Sample& sample,
                                  std::shared_ptr<const OrthonormalSystem> system,
                                  Eigen::Index m) {
  if (!system) throw std::invalid_argument("regularize_series: null system");
  if (m < 0 || m > system->size()) {
    throw std::invalid_argument("regularize_series: truncation exceeds system size");
  }
  const auto& times = sample.base().event_times;

  RegularizedPath y;
  y.system = system;
  y.truncation = m;
  y.times = times;
  y.seed = sample.base().seed;
  y.replica = sample.base().replica;

  const Eigen::MatrixXd table = sample.base().values_table(times);
  y.coords.resize(m, static_cast<Eigen::Index>(times.size()));
  for (Eigen::Index j = 0; j < m; ++j) {
    const ModelVector psi = sample.pullback(system->basis[static_cast<std::size_t>(j)]);
    // row-by-row product keeps coordinate paths identical under truncation growth
    y.coords.row(j) = psi.transpose() * table;
  }
  for (std::size_t k : system->kernel_inputs) {
    const ModelVector psi = sample.pullback(system->residuals[k]);
    const Eigen::VectorXd vals = (psi.transpose() * table).transpose();
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
      y.kernel_leakage = std::max(y.kernel_leakage, std::abs(vals[i]));
    }
  }
  return y;
}

}  // namespace cylreg
