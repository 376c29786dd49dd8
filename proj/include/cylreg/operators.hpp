#pragma once

#include "cylreg/space.hpp"

#include <optional>

namespace cylreg {

// Linear map between truncated model spaces. Singular values are computed
// once at construction and cached; every norm, tail and factorization reads
// them. Singular values below 1e-14 * sigma_1 count as zero.
class LinearOperator {
 public:
  static LinearOperator diagonal(Eigen::VectorXd diag);
  static LinearOperator dense(const Eigen::MatrixXd& matrix);
  static LinearOperator identity(Eigen::Index dim);
  static LinearOperator zero(Eigen::Index rows, Eigen::Index cols);
  // Row-normalized Gaussian smoothing matrix; a simple non-diagonal example.
  static LinearOperator gaussian_kernel(Eigen::Index dim, double bandwidth);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  bool is_diagonal() const { return diagonal_; }

  ModelVector apply(const ModelVector& v) const;
  ModelVector apply_transpose(const ModelVector& v) const;
  Eigen::MatrixXd matrix_dense() const;
  const Eigen::VectorXd& diag() const;

  // nonincreasing; zeros included up to min(rows, cols)
  const Eigen::VectorXd& singular_values() const { return singular_values_; }
  Eigen::Index rank() const;
  double operator_norm() const;

  double hs_norm() const;
  double schatten_norm(double r) const;                 // r >= 1
  double tail(Eigen::Index m, double r) const;          // sum_{j>m} sigma_j^r

  // Left/right singular bases (columns); computed lazily for dense input.
  const Eigen::MatrixXd& left_singular_vectors() const;
  const Eigen::MatrixXd& right_singular_vectors() const;

 private:
  LinearOperator() = default;
  void compute_svd() const;

  Eigen::Index rows_ = 0, cols_ = 0;
  bool diagonal_ = false;
  Eigen::VectorXd diag_;
  Eigen::MatrixXd matrix_;
  Eigen::VectorXd singular_values_;
  mutable std::optional<Eigen::MatrixXd> svd_u_;
  mutable std::optional<Eigen::MatrixXd> svd_v_;
};

// Seminorm p_S(v) = |S v|, Gram = S'S. Generates the Sazonov topology when S
// has finite Hilbert-Schmidt norm.
HilbertianSeminorm sazonov_seminorm(const LinearOperator& S);

class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(std::string message, ModelVector kernel_direction)
      : std::runtime_error(std::move(message)),
        kernel_direction(std::move(kernel_direction)) {}
  ModelVector kernel_direction;
};

// Three-factor decomposition S = embedding * core * quotient, where quotient
// maps onto p-orthonormal coordinates of the domain modulo ker(p), core is
// the induced Hilbert-Schmidt map and embedding isometrically injects range
// coordinates back into the codomain. Requires S to vanish on ker(p).
struct HsFactorization {
  LinearOperator quotient;   // dim: rank(p) x cols(S)
  LinearOperator core;       // dim: rank-ish x rank(p)
  LinearOperator embedding;  // dim: rows(S) x rank-ish
  Eigen::MatrixXd recompose() const;
};

HsFactorization factorize(const LinearOperator& S, const HilbertianSeminorm& p);

}  // namespace cylreg
