#include "cylreg/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace cylreg {

namespace {
constexpr double kSigmaZeroRel = 1e-14;
}

LinearOperator LinearOperator::diagonal(Eigen::VectorXd diag) {
  require_finite(diag, "LinearOperator::diagonal");
  LinearOperator op;
  op.rows_ = op.cols_ = diag.size();
  op.diagonal_ = true;
  op.diag_ = std::move(diag);
  op.singular_values_ = op.diag_.cwiseAbs();
  std::sort(op.singular_values_.data(), op.singular_values_.data() + op.singular_values_.size(),
            std::greater<double>());
  return op;
}

LinearOperator LinearOperator::dense(const Eigen::MatrixXd& matrix) {
  if (!matrix.allFinite()) throw std::invalid_argument("LinearOperator::dense: non-finite entry");
  LinearOperator op;
  op.rows_ = matrix.rows();
  op.cols_ = matrix.cols();
  op.diagonal_ = false;
  op.matrix_ = matrix;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix);
  op.singular_values_ = svd.singularValues();
  return op;
}

LinearOperator LinearOperator::identity(Eigen::Index dim) {
  return diagonal(Eigen::VectorXd::Ones(dim));
}

LinearOperator LinearOperator::zero(Eigen::Index rows, Eigen::Index cols) {
  if (rows == cols) return diagonal(Eigen::VectorXd::Zero(rows));
  return dense(Eigen::MatrixXd::Zero(rows, cols));
}

LinearOperator LinearOperator::gaussian_kernel(Eigen::Index dim, double bandwidth) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("gaussian_kernel: bandwidth must be > 0");
  Eigen::MatrixXd k(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double d = static_cast<double>(i - j) / bandwidth;
      k(i, j) = std::exp(-0.5 * d * d);
    }
    k.row(i) /= k.row(i).sum();
  }
  return dense(k);
}

ModelVector LinearOperator::apply(const ModelVector& v) const {
  if (v.size() != cols_) throw std::invalid_argument("LinearOperator::apply: dimension mismatch");
  if (diagonal_) return diag_.cwiseProduct(v);
  return matrix_ * v;
}

ModelVector LinearOperator::apply_transpose(const ModelVector& v) const {
  if (v.size() != rows_) {
    throw std::invalid_argument("LinearOperator::apply_transpose: dimension mismatch");
  }
  if (diagonal_) return diag_.cwiseProduct(v);
  return matrix_.transpose() * v;
}

Eigen::MatrixXd LinearOperator::matrix_dense() const {
  if (diagonal_) return diag_.asDiagonal();
  return matrix_;
}

const Eigen::VectorXd& LinearOperator::diag() const {
  if (!diagonal_) throw std::logic_error("LinearOperator::diag: operator not diagonal");
  return diag_;
}

Eigen::Index LinearOperator::rank() const {
  if (singular_values_.size() == 0) return 0;
  const double cut = kSigmaZeroRel * singular_values_[0];
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < singular_values_.size(); ++i) {
    if (singular_values_[i] > cut) ++r;
  }
  return r;
}

double LinearOperator::operator_norm() const {
  return singular_values_.size() ? singular_values_[0] : 0.0;
}

double LinearOperator::hs_norm() const { return std::sqrt(tail(0, 2.0)); }

double LinearOperator::schatten_norm(double r) const {
  if (!(r >= 1.0)) throw std::invalid_argument("schatten_norm: r must be >= 1");
  return std::pow(tail(0, r), 1.0 / r);
}

double LinearOperator::tail(Eigen::Index m, double r) const {
  if (m < 0) throw std::invalid_argument("tail: m must be >= 0");
  if (!(r >= 1.0)) throw std::invalid_argument("tail: r must be >= 1");
  if (singular_values_.size() == 0) return 0.0;
  const double cut = kSigmaZeroRel * singular_values_[0];
  double sum = 0.0;
  for (Eigen::Index j = singular_values_.size(); j-- > m;) {
    if (singular_values_[j] > cut) sum += std::pow(singular_values_[j], r);
  }
  return sum;
}

void LinearOperator::compute_svd() const {
  if (svd_u_ && svd_v_) return;
  if (diagonal_) {
    // columns ordered by decreasing |diag| with signs folded into U
    const Eigen::Index n = rows_;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return std::abs(diag_[a]) > std::abs(diag_[b]);
    });
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index i = order[static_cast<std::size_t>(j)];
      v(i, j) = 1.0;
      u(i, j) = diag_[i] < 0.0 ? -1.0 : 1.0;
    }
    svd_u_ = std::move(u);
    svd_v_ = std::move(v);
    return;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix_, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd_u_ = svd.matrixU();
  svd_v_ = svd.matrixV();
}

const Eigen::MatrixXd& LinearOperator::left_singular_vectors() const {
  compute_svd();
  return *svd_u_;
}

const Eigen::MatrixXd& LinearOperator::right_singular_vectors() const {
  compute_svd();
  return *svd_v_;
}

HilbertianSeminorm sazonov_seminorm(const LinearOperator& S) {
  if (S.is_diagonal()) {
    return HilbertianSeminorm::diagonal(S.diag().cwiseAbs2(), "sazonov");
  }
  const Eigen::MatrixXd m = S.matrix_dense();
  return HilbertianSeminorm::dense(m.transpose() * m, "sazonov");
}

Eigen::MatrixXd HsFactorization::recompose() const {
  return embedding.matrix_dense() * core.matrix_dense() * quotient.matrix_dense();
}

HsFactorization factorize(const LinearOperator& S, const HilbertianSeminorm& p) {
  if (S.cols() != p.dim()) throw std::invalid_argument("factorize: dimension mismatch");

  const double scale = std::max(S.operator_norm(), 1.0);
  const Eigen::Index p_rank = p.rank();
  for (Eigen::Index i = p_rank; i < p.dim(); ++i) {
    const ModelVector kv = p.eigenvector(i);
    const double leak = S.apply(kv).norm();
    if (leak > 1e-10 * scale) {
      std::ostringstream os;
      os << "factorize: operator does not vanish on ker(p); |S v| = " << leak
         << " for a kernel direction";
      throw FactorizationError(os.str(), kv);
    }
  }

  // quotient: v -> p-orthonormal coordinates, rows sqrt(lambda_i) * u_i'
  Eigen::MatrixXd q(p_rank, p.dim());
  Eigen::MatrixXd q_pinv(p.dim(), p_rank);
  for (Eigen::Index i = 0; i < p_rank; ++i) {
    const double s = std::sqrt(p.eigenvalues()[i]);
    q.row(i) = s * p.eigenvector(i).transpose();
    q_pinv.col(i) = p.eigenvector(i) / s;
  }

  const Eigen::MatrixXd s_dense = S.matrix_dense();
  const Eigen::Index s_rank = S.rank();

  Eigen::MatrixXd emb;
  if (s_rank == S.rows()) {
    emb = Eigen::MatrixXd::Identity(S.rows(), S.rows());
  } else {
    emb = S.left_singular_vectors().leftCols(s_rank);
  }

  HsFactorization f{LinearOperator::dense(q),
                    LinearOperator::dense(emb.transpose() * (s_dense * q_pinv)),
                    LinearOperator::dense(emb)};
  return f;
}

}  // namespace cylreg
