#include "cylreg/regularize.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cylreg {

std::size_t RegularizedPath::time_index(double t) const {
  if (times.empty() || t < times.front() || t > times.back()) {
    throw std::out_of_range("RegularizedPath: t outside [0, T]");
  }
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  return static_cast<std::size_t>(it - times.begin()) - 1;
}

double RegularizedPath::coord(Eigen::Index j, double t) const {
  if (j < 0 || j >= truncation) throw std::out_of_range("RegularizedPath: coordinate index");
  return coords(j, static_cast<Eigen::Index>(time_index(t)));
}

double RegularizedPath::eval_dual_pairing(const ModelVector& phi, double t) const {
  if (phi.size() != system->dim()) {
    throw std::invalid_argument("eval_dual_pairing: dimension mismatch");
  }
  const Eigen::Index ti = static_cast<Eigen::Index>(time_index(t));
  double sum = 0.0;
  for (Eigen::Index j = 0; j < truncation; ++j) {
    sum += coords(j, ti) * system->duals[static_cast<std::size_t>(j)].dot(phi);
  }
  return sum;
}

double RegularizedPath::qnorm_at(std::size_t time_idx) const {
  return std::sqrt(coords.col(static_cast<Eigen::Index>(time_idx)).squaredNorm());
}

std::vector<double> RegularizedPath::qnorm_path() const {
  std::vector<double> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) out[i] = qnorm_at(i);
  return out;
}

double RegularizedPath::qnorm_sup() const {
  double sup = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) sup = std::max(sup, qnorm_at(i));
  return sup;
}

double RegularizedPath::sup_partial_square_sum(Eigen::Index lo, Eigen::Index hi) const {
  lo = std::max<Eigen::Index>(lo, 0);
  hi = std::min<Eigen::Index>(hi, truncation);
  if (lo >= hi) return 0.0;
  double sup = 0.0;
  for (Eigen::Index i = 0; i < coords.cols(); ++i) {
    sup = std::max(sup, coords.col(i).segment(lo, hi - lo).squaredNorm());
  }
  return sup;
}

double doob_constant(double r) {
  if (!(r > 1.0)) throw std::invalid_argument("doob_constant: r must be > 1");
  return std::pow(r / (r - 1.0), r);
}

double brownian_abs_moment(double r, double horizon) {
  return std::pow(horizon, r / 2.0) * std::pow(2.0, r / 2.0) * std::tgamma((r + 1.0) / 2.0) /
         std::sqrt(M_PI);
}

double truncation_tail_bound(const LinearOperator& S, Eigen::Index m, double r, double horizon,
                             bool martingale, double moment_scale) {
  if (!(r >= 2.0)) {
    throw std::invalid_argument("truncation_tail_bound: the Schatten argument needs r >= 2");
  }
  const double k = moment_scale >= 0.0 ? moment_scale : brownian_abs_moment(r, horizon);
  const double c = martingale ? doob_constant(r) : 1.0;
  return c * k * S.tail(m, r);
}

TruncationPlan choose_truncation(const LinearOperator& S, double r, double tol, double horizon,
                                 bool martingale, double moment_scale) {
  if (!(tol > 0.0)) throw std::invalid_argument("choose_truncation: tol must be > 0");
  TruncationPlan plan;
  plan.r = r;
  plan.tol = tol;
  plan.bound_kind = martingale ? TruncationPlan::BoundKind::doob_schatten_tail
                               : TruncationPlan::BoundKind::schatten_tail;
  // the bound is nonincreasing in m and reaches 0 at the rank
  Eigen::Index lo = 0, hi = S.rank();
  if (truncation_tail_bound(S, 0, r, horizon, martingale, moment_scale) <= tol) {
    hi = 0;
  } else {
    while (hi - lo > 1) {
      const Eigen::Index mid = lo + (hi - lo) / 2;
      if (truncation_tail_bound(S, mid, r, horizon, martingale, moment_scale) <= tol) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
  }
  plan.m = hi;
  plan.achieved_bound = truncation_tail_bound(S, hi, r, horizon, martingale, moment_scale);
  return plan;
}

SupMomentEstimate sup_moment_from_values(const std::vector<double>& sup_qnorm_r) {
  if (sup_qnorm_r.size() < 2) {
    throw std::invalid_argument("sup_moment_estimate: need at least 2 replicas");
  }
  const double n = static_cast<double>(sup_qnorm_r.size());
  double mean = 0.0;
  for (double v : sup_qnorm_r) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : sup_qnorm_r) ss += (v - mean) * (v - mean);
  return SupMomentEstimate{mean, std::sqrt(ss / (n - 1.0) / n)};
}

SupMomentEstimate sup_moment_estimate(const std::vector<RegularizedPath>& replicas, double r) {
  std::vector<double> values;
  values.reserve(replicas.size());
  for (const auto& y : replicas) values.push_back(std::pow(y.qnorm_sup(), r));
  return sup_moment_from_values(values);
}

Radonifier::Radonifier(CylindricalLevy process, LinearOperator op, HilbertianSeminorm q,
                       Eigen::Index m, double horizon, int grid_resolution, std::uint64_t seed)
    : process_(std::move(process)),
      op_(std::move(op)),
      q_(std::move(q)),
      m_(m),
      horizon_(horizon),
      grid_resolution_(grid_resolution),
      seed_(seed) {
  if (op_.rows() != process_.dim()) {
    throw std::invalid_argument("Radonifier: operator codomain does not match process dimension");
  }
  if (op_.cols() != q_.dim()) {
    throw std::invalid_argument("Radonifier: operator domain does not match seminorm dimension");
  }

  // |S phi| <= c q(phi) must hold for some finite c; in particular S must
  // vanish on ker(q).
  const double scale = std::max(op_.operator_norm(), 1.0);
  for (Eigen::Index i = q_.rank(); i < q_.dim(); ++i) {
    const ModelVector kv = q_.eigenvector(i);
    if (op_.apply(kv).norm() > 1e-10 * scale) {
      std::ostringstream os;
      os << "radonify: |S phi| is not dominated by any multiple of q; q(phi) = 0 but "
         << "|S phi| = " << op_.apply(kv).norm() << " along a kernel direction of q";
      throw DominationError(os.str(), kv);
    }
  }
  double c2 = 0.0;
  if (op_.is_diagonal() && q_.is_diagonal()) {
    const Eigen::MatrixXd gq = q_.gram_dense();
    for (Eigen::Index i = 0; i < q_.dim(); ++i) {
      const double s2 = op_.diag()[i] * op_.diag()[i];
      if (gq(i, i) > q_.tol_psd()) c2 = std::max(c2, s2 / gq(i, i));
    }
  } else {
    const Eigen::Index r = q_.rank();
    Eigen::MatrixXd w(q_.dim(), r);
    for (Eigen::Index i = 0; i < r; ++i) {
      w.col(i) = q_.eigenvector(i) / std::sqrt(q_.eigenvalues()[i]);
    }
    const Eigen::MatrixXd sw = op_.matrix_dense() * w;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sw.transpose() * sw);
    c2 = es.eigenvalues().size() ? std::max(es.eigenvalues().maxCoeff(), 0.0) : 0.0;
  }
  domination_scale_ = std::sqrt(c2);

  std::vector<ModelVector> ref;
  ref.reserve(static_cast<std::size_t>(q_.dim()));
  for (Eigen::Index i = 0; i < q_.dim(); ++i) {
    ModelVector e = ModelVector::Zero(q_.dim());
    e[i] = 1.0;
    ref.push_back(std::move(e));
  }
  system_ = std::make_shared<const OrthonormalSystem>(gram_schmidt_onb(q_, ref));
  if (m_ < 0 || m_ > system_->size()) {
    throw std::invalid_argument("Radonifier: truncation exceeds system size");
  }

  mapped_basis_.reserve(system_->basis.size());
  for (const auto& phi : system_->basis) mapped_basis_.push_back(op_.apply(phi));
  for (std::size_t k : system_->kernel_inputs) {
    mapped_residuals_.push_back(op_.apply(system_->residuals[k]));
  }

  // certified r = 2 tail bound, where the driver admits one
  bool certified = !process_.drivers.empty();
  for (const auto& d : process_.drivers) {
    certified = certified && d.is_martingale() && d.has_finite_moment(2.0);
  }
  if (certified) {
    try {
      tail_bound2_ = truncation_tail_bound(op_, m_, 2.0, horizon_, true,
                                           process_.drivers[0].abs_moment(2.0, horizon_));
    } catch (const std::invalid_argument&) {
      tail_bound2_ = 0.0;
    }
  }
}

double Radonifier::tail_bound(double r, bool martingale, double moment_scale) const {
  return truncation_tail_bound(op_, m_, r, horizon_, martingale, moment_scale);
}

CylPathSample Radonifier::sample(std::uint64_t replica) const {
  return sample_paths(process_, horizon_, grid_resolution_, seed_, replica);
}

RegularizedPath Radonifier::from_sample(const CylPathSample& s) const {
  const auto& times = s.event_times;
  RegularizedPath y;
  y.system = system_;
  y.truncation = m_;
  y.times = times;
  y.seed = s.seed;
  y.replica = s.replica;
  y.tail_bound = tail_bound2_;

  const Eigen::MatrixXd table = s.values_table(times);
  y.coords.resize(m_, static_cast<Eigen::Index>(times.size()));
  for (Eigen::Index j = 0; j < m_; ++j) {
    y.coords.row(j) = mapped_basis_[static_cast<std::size_t>(j)].transpose() * table;
  }
  for (const auto& psi : mapped_residuals_) {
    const Eigen::VectorXd vals = (psi.transpose() * table).transpose();
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
      y.kernel_leakage = std::max(y.kernel_leakage, std::abs(vals[i]));
    }
  }
  return y;
}

RegularizedPath Radonifier::run(std::uint64_t replica) const {
  const CylPathSample s = sample(replica);
  return from_sample(s);
}

RegularizedPath radonify(const CylindricalLevy& process, const LinearOperator& op,
                         const HilbertianSeminorm& q, Eigen::Index m, double horizon,
                         int grid_resolution, std::uint64_t seed, std::uint64_t replica) {
  const Radonifier rad(process, op, q, m, horizon, grid_resolution, seed);
  return rad.run(replica);
}

}  // namespace cylreg
