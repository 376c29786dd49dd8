#include "cylreg/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace cylreg {

namespace {

constexpr double kKernelOrthoTol = 1e-8;

void check_dim(const HilbertianSeminorm& p, const ModelVector& v, const char* what) {
  if (v.size() != p.dim()) {
    std::ostringstream os;
    os << what << ": dimension mismatch (seminorm dim " << p.dim() << ", vector dim "
       << v.size() << ")";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

void require_finite(const ModelVector& v, const char* what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite coordinate");
  }
}

HilbertianSeminorm HilbertianSeminorm::diagonal(Eigen::VectorXd diag, std::string label,
                                                double tol_psd) {
  require_finite(diag, "HilbertianSeminorm::diagonal");
  HilbertianSeminorm p;
  p.dim_ = diag.size();
  p.diagonal_ = true;
  p.label_ = std::move(label);
  const double scale = diag.size() ? diag.cwiseAbs().maxCoeff() : 0.0;
  p.tol_psd_ = tol_psd >= 0.0 ? tol_psd : 1e-10 * scale;
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (diag[i] < -p.tol_psd_) {
      std::ostringstream os;
      os << "HilbertianSeminorm: diagonal entry " << i << " = " << diag[i]
         << " below -tol_psd = " << -p.tol_psd_;
      throw std::invalid_argument(os.str());
    }
    if (diag[i] < 0.0) diag[i] = 0.0;
  }
  p.diag_ = std::move(diag);
  p.order_.resize(static_cast<std::size_t>(p.dim_));
  std::iota(p.order_.begin(), p.order_.end(), Eigen::Index{0});
  std::stable_sort(p.order_.begin(), p.order_.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return p.diag_[a] > p.diag_[b]; });
  p.eigenvalues_.resize(p.dim_);
  for (Eigen::Index i = 0; i < p.dim_; ++i) p.eigenvalues_[i] = p.diag_[p.order_[i]];
  return p;
}

HilbertianSeminorm HilbertianSeminorm::dense(const Eigen::MatrixXd& gram, std::string label,
                                             double tol_psd) {
  if (gram.rows() != gram.cols()) {
    throw std::invalid_argument("HilbertianSeminorm::dense: matrix not square");
  }
  if (!gram.allFinite()) {
    throw std::invalid_argument("HilbertianSeminorm::dense: non-finite entry");
  }
  const double scale = gram.size() ? gram.cwiseAbs().maxCoeff() : 0.0;
  const double sym_err = (gram - gram.transpose()).cwiseAbs().maxCoeff();
  if (sym_err > 1e-12 * std::max(scale, 1.0)) {
    throw std::invalid_argument("HilbertianSeminorm::dense: matrix not symmetric");
  }

  HilbertianSeminorm p;
  p.dim_ = gram.rows();
  p.diagonal_ = false;
  p.label_ = std::move(label);
  p.gram_ = 0.5 * (gram + gram.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.gram_);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("HilbertianSeminorm::dense: eigendecomposition failed");
  }
  Eigen::VectorXd vals = es.eigenvalues();           // ascending
  const double lambda_max = vals.size() ? std::max(vals.maxCoeff(), 0.0) : 0.0;
  p.tol_psd_ = tol_psd >= 0.0 ? tol_psd : 1e-10 * lambda_max;
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (vals[i] < -p.tol_psd_) {
      std::ostringstream os;
      os << "HilbertianSeminorm: eigenvalue " << vals[i] << " below -tol_psd = "
         << -p.tol_psd_;
      throw std::invalid_argument(os.str());
    }
    if (vals[i] < 0.0) vals[i] = 0.0;
  }
  // store nonincreasing
  p.eigenvalues_ = vals.reverse();
  p.eigenvectors_ = es.eigenvectors().rowwise().reverse();
  return p;
}

HilbertianSeminorm HilbertianSeminorm::euclidean(Eigen::Index dim, std::string label) {
  return diagonal(Eigen::VectorXd::Ones(dim), std::move(label));
}

HilbertianSeminorm HilbertianSeminorm::zero(Eigen::Index dim, std::string label) {
  return diagonal(Eigen::VectorXd::Zero(dim), std::move(label));
}

double HilbertianSeminorm::operator()(const ModelVector& v) const {
  check_dim(*this, v, "seminorm_eval");
  require_finite(v, "seminorm_eval");
  const double q = inner(v, v);
  return std::sqrt(std::max(q, 0.0));
}

double HilbertianSeminorm::inner(const ModelVector& a, const ModelVector& b) const {
  check_dim(*this, a, "seminorm inner");
  check_dim(*this, b, "seminorm inner");
  if (diagonal_) return a.cwiseProduct(diag_).dot(b);
  return a.dot(gram_ * b);
}

ModelVector HilbertianSeminorm::apply_gram(const ModelVector& v) const {
  check_dim(*this, v, "apply_gram");
  if (diagonal_) return diag_.cwiseProduct(v);
  return gram_ * v;
}

Eigen::MatrixXd HilbertianSeminorm::gram_dense() const {
  if (diagonal_) return diag_.asDiagonal();
  return gram_;
}

double HilbertianSeminorm::dual_norm(const ModelVector& f) const {
  check_dim(*this, f, "dual_norm");
  require_finite(f, "dual_norm");
  const double fnorm = f.norm();
  if (fnorm == 0.0) return 0.0;
  const double ortho_tol = kKernelOrthoTol * fnorm;
  double sum = 0.0;
  if (diagonal_) {
    for (Eigen::Index i = 0; i < dim_; ++i) {
      if (diag_[i] > tol_psd_) {
        sum += f[i] * f[i] / diag_[i];
      } else if (std::abs(f[i]) > ortho_tol) {
        return std::numeric_limits<double>::infinity();
      }
    }
    return std::sqrt(sum);
  }
  for (Eigen::Index i = 0; i < dim_; ++i) {
    const double c = eigenvectors_.col(i).dot(f);
    if (eigenvalues_[i] > tol_psd_) {
      sum += c * c / eigenvalues_[i];
    } else if (std::abs(c) > ortho_tol) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return std::sqrt(sum);
}

Eigen::Index HilbertianSeminorm::rank() const {
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < eigenvalues_.size(); ++i) {
    if (eigenvalues_[i] > tol_psd_) ++r;
  }
  return r;
}

ModelVector HilbertianSeminorm::eigenvector(Eigen::Index i) const {
  if (i < 0 || i >= dim_) throw std::out_of_range("eigenvector index");
  if (diagonal_) {
    ModelVector v = ModelVector::Zero(dim_);
    v[order_[static_cast<std::size_t>(i)]] = 1.0;
    return v;
  }
  return eigenvectors_.col(i);
}

Eigen::MatrixXd HilbertianSeminorm::kernel_basis() const {
  const Eigen::Index r = rank();
  Eigen::MatrixXd out(dim_, dim_ - r);
  for (Eigen::Index i = r; i < dim_; ++i) out.col(i - r) = eigenvector(i);
  return out;
}

HilbertianSeminorm HilbertianSeminorm::scaled(double c) const {
  const double c2 = c * c;
  if (diagonal_) return diagonal(c2 * diag_, label_, c2 * tol_psd_);
  return dense(c2 * gram_, label_, c2 * tol_psd_);
}

DominanceReport dominance_report(const HilbertianSeminorm& p, const HilbertianSeminorm& q) {
  if (p.dim() != q.dim()) {
    throw std::invalid_argument("dominance_report: dimension mismatch");
  }
  const double tol = std::max(p.tol_psd(), q.tol_psd());
  DominanceReport rep;
  if (p.is_diagonal() && q.is_diagonal()) {
    const Eigen::MatrixXd dp = p.gram_dense();
    const Eigen::MatrixXd dq = q.gram_dense();
    double worst = 0.0;
    Eigen::Index worst_i = -1;
    for (Eigen::Index i = 0; i < p.dim(); ++i) {
      const double d = dq(i, i) - dp(i, i);
      if (d < worst) {
        worst = d;
        worst_i = i;
      }
    }
    rep.holds = worst >= -tol;
    rep.violation = std::min(worst, 0.0);
    if (!rep.holds) {
      rep.direction = ModelVector::Zero(p.dim());
      rep.direction[worst_i] = 1.0;
    }
    return rep;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q.gram_dense() - p.gram_dense());
  const double lo = es.eigenvalues().minCoeff();
  rep.holds = lo >= -tol;
  rep.violation = std::min(lo, 0.0);
  if (!rep.holds) rep.direction = es.eigenvectors().col(0);
  return rep;
}

bool dominates(const HilbertianSeminorm& p, const HilbertianSeminorm& q) {
  return dominance_report(p, q).holds;
}

std::vector<ModelVector> OrthonormalSystem::kernel_residuals() const {
  std::vector<ModelVector> out;
  out.reserve(kernel_inputs.size());
  for (std::size_t k : kernel_inputs) out.push_back(residuals[k]);
  return out;
}

OrthonormalSystem gram_schmidt_onb(const HilbertianSeminorm& q,
                                   const std::vector<ModelVector>& dense_set,
                                   double tol) {
  if (dense_set.empty()) throw std::invalid_argument("gram_schmidt_onb: empty input set");
  if (!(tol > 0.0)) throw std::invalid_argument("gram_schmidt_onb: tol must be > 0");
  for (const auto& v : dense_set) {
    if (v.size() != q.dim()) throw std::invalid_argument("gram_schmidt_onb: dimension mismatch");
    require_finite(v, "gram_schmidt_onb");
  }

  OrthonormalSystem sys;
  sys.seminorm = q;
  sys.tol = tol;

  const double lambda_max = q.eigenvalues().size() ? q.eigenvalues()[0] : 0.0;
  double max_norm_seen = 0.0;
  for (std::size_t k = 0; k < dense_set.size(); ++k) {
    max_norm_seen = std::max(max_norm_seen, q(dense_set[k]));
    ModelVector v = dense_set[k];
    std::vector<double> coeff(sys.basis.size(), 0.0);
    // modified Gram-Schmidt, two passes
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < sys.basis.size(); ++j) {
        const double a = q.inner(sys.basis[j], v);
        v -= a * sys.basis[j];
        coeff[j] += a;
      }
    }
    const double r = q(v);
    // absolute floor guards against promoting numerically exact kernel vectors
    const double floor = 1e-8 * std::sqrt(lambda_max) * v.norm();
    if (r > std::max(tol * max_norm_seen, floor)) {
      coeff.push_back(r);
      sys.basis.push_back(v / r);
      sys.duals.push_back(q.apply_gram(sys.basis.back()));
      sys.residuals.push_back(ModelVector::Zero(q.dim()));
    } else {
      sys.residuals.push_back(v);
      sys.kernel_inputs.push_back(k);
    }
    sys.coefficients.push_back(std::move(coeff));
  }
  return sys;
}

HsInclusion hs_inclusion_norm(const HilbertianSeminorm& p, const HilbertianSeminorm& q) {
  auto rep = dominance_report(p, q);
  if (!rep.holds) {
    std::ostringstream os;
    os << "hs_inclusion_norm: p does not satisfy p <= q; violation " << rep.violation
       << " along direction [";
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(rep.direction.size(), 8); ++i) {
      os << (i ? ", " : "") << rep.direction[i];
    }
    if (rep.direction.size() > 8) os << ", ...";
    os << "]";
    throw DominanceError(os.str(), rep.direction);
  }

  HsInclusion out;
  std::vector<double> contrib;
  if (p.is_diagonal() && q.is_diagonal()) {
    const Eigen::MatrixXd dp = p.gram_dense();
    const Eigen::MatrixXd dq = q.gram_dense();
    for (Eigen::Index i = 0; i < p.dim(); ++i) {
      if (dq(i, i) > q.tol_psd()) contrib.push_back(dp(i, i) / dq(i, i));
    }
  } else {
    std::vector<ModelVector> ref;
    ref.reserve(static_cast<std::size_t>(q.dim()));
    for (Eigen::Index i = 0; i < q.dim(); ++i) {
      ModelVector e = ModelVector::Zero(q.dim());
      e[i] = 1.0;
      ref.push_back(std::move(e));
    }
    const auto sys = gram_schmidt_onb(q, ref);
    for (const auto& phi : sys.basis) {
      const double v = p(phi);
      contrib.push_back(v * v);
    }
  }

  out.tail_profile.resize(contrib.size() + 1, 0.0);
  for (std::size_t m = contrib.size(); m-- > 0;) {
    out.tail_profile[m] = out.tail_profile[m + 1] + contrib[m];
  }
  out.value = std::sqrt(out.tail_profile[0]);
  return out;
}

SeminormChain::SeminormChain(std::vector<HilbertianSeminorm> members,
                             std::vector<double> epsilons)
    : members_(std::move(members)), epsilons_(std::move(epsilons)) {
  for (std::size_t n = 0; n + 1 < members_.size(); ++n) {
    if (!dominates(members_[n], members_[n + 1])) {
      std::ostringstream os;
      os << "SeminormChain: member " << n << " not dominated by member " << n + 1;
      throw std::invalid_argument(os.str());
    }
  }
  if (!epsilons_.empty()) {
    if (epsilons_.size() != members_.size()) {
      throw std::invalid_argument("SeminormChain: epsilons size mismatch");
    }
    for (std::size_t n = 0; n < epsilons_.size(); ++n) {
      if (!(epsilons_[n] > 0.0) || (n && epsilons_[n] > epsilons_[n - 1])) {
        throw std::invalid_argument("SeminormChain: epsilons must be positive and nonincreasing");
      }
    }
  }
}

}  // namespace cylreg
