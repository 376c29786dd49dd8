#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace cylreg {

// Coordinates with respect to the reference orthonormal basis e_1..e_N of the
// truncated model space.
using ModelVector = Eigen::VectorXd;

void require_finite(const ModelVector& v, const char* what);

// Seminorm induced by a positive-semidefinite Gram operator G,
// p(v) = sqrt(v' G v). Carries a diagonal fast path and, for dense input, a
// cached eigendecomposition. Eigenvalues in [-tol_psd, 0) are clamped to
// zero; anything more negative is rejected. Eigenvalues <= tol_psd count as
// exact zeros, i.e. kernel directions.
class HilbertianSeminorm {
 public:
  HilbertianSeminorm() = default;  // empty (dim 0); assign before use

  static HilbertianSeminorm diagonal(Eigen::VectorXd diag, std::string label = "",
                                     double tol_psd = -1.0);
  static HilbertianSeminorm dense(const Eigen::MatrixXd& gram, std::string label = "",
                                  double tol_psd = -1.0);
  static HilbertianSeminorm euclidean(Eigen::Index dim, std::string label = "");
  static HilbertianSeminorm zero(Eigen::Index dim, std::string label = "");

  Eigen::Index dim() const { return dim_; }
  const std::string& label() const { return label_; }
  double tol_psd() const { return tol_psd_; }
  bool is_diagonal() const { return diagonal_; }

  // p(v)
  double operator()(const ModelVector& v) const;
  // the bilinear form Q(a,b) = a' G b
  double inner(const ModelVector& a, const ModelVector& b) const;
  // G v
  ModelVector apply_gram(const ModelVector& v) const;
  Eigen::MatrixXd gram_dense() const;

  // Dual norm p'(f) = sqrt(f' G^+ f), or +infinity when f does not
  // annihilate ker(G) (tested against |<f, v_ker>| <= 1e-8 * |f|).
  double dual_norm(const ModelVector& f) const;

  // Spectral structure; eigenvalues nonincreasing and clamped at zero.
  Eigen::Index rank() const;
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  ModelVector eigenvector(Eigen::Index i) const;
  Eigen::MatrixXd kernel_basis() const;

  // The seminorm c*p (Gram scaled by c^2).
  HilbertianSeminorm scaled(double c) const;

 private:
  Eigen::Index dim_ = 0;
  bool diagonal_ = false;
  std::string label_;
  double tol_psd_ = 0.0;
  Eigen::VectorXd diag_;          // diagonal path: clamped diagonal entries
  Eigen::MatrixXd gram_;          // dense path
  Eigen::VectorXd eigenvalues_;   // nonincreasing, clamped
  Eigen::MatrixXd eigenvectors_;  // dense path: columns match eigenvalues_
  std::vector<Eigen::Index> order_;  // diagonal path: index of j-th largest entry
};

struct DominanceReport {
  bool holds = false;
  double violation = 0.0;    // most negative eigenvalue of G_q - G_p (0 if none)
  ModelVector direction;     // offending direction when !holds
};

// p <= q, i.e. G_q - G_p positive semidefinite within tolerance.
DominanceReport dominance_report(const HilbertianSeminorm& p, const HilbertianSeminorm& q);
bool dominates(const HilbertianSeminorm& p, const HilbertianSeminorm& q);

class DominanceError : public std::runtime_error {
 public:
  DominanceError(std::string message, ModelVector direction)
      : std::runtime_error(std::move(message)), direction(std::move(direction)) {}
  ModelVector direction;
};

// Output of the Schmidt orthogonalization of an input sequence against a
// Hilbertian seminorm q. Input k decomposes as
//   input_k = sum_j coefficients[k][j] * basis[j] + residuals[k]
// where the residual is (numerically) a kernel vector; inputs that do not
// produce a basis vector are listed in kernel_inputs. duals[j] = G*basis[j],
// so <duals[j], basis[i]> = delta_ij and the duals are orthonormal in the
// dual norm.
struct OrthonormalSystem {
  HilbertianSeminorm seminorm;
  std::vector<ModelVector> basis;
  std::vector<ModelVector> duals;
  std::vector<std::vector<double>> coefficients;
  std::vector<ModelVector> residuals;
  std::vector<std::size_t> kernel_inputs;
  double tol = 0.0;

  Eigen::Index size() const { return static_cast<Eigen::Index>(basis.size()); }
  Eigen::Index dim() const { return seminorm.dim(); }
  std::vector<ModelVector> kernel_residuals() const;
};

// Modified Gram-Schmidt with one re-orthogonalization pass, in the q-inner
// product, processing inputs in order. A projected vector whose q-norm falls
// at or below tol * (largest input q-norm seen so far) is routed to the
// kernel residual list instead of the basis.
OrthonormalSystem gram_schmidt_onb(const HilbertianSeminorm& q,
                                   const std::vector<ModelVector>& dense_set,
                                   double tol = 1e-10);

struct HsInclusion {
  double value = 0.0;                 // sqrt(sum_j p(phi_j^q)^2)
  std::vector<double> tail_profile;   // tail_profile[m] = sum_{j>m} p(phi_j^q)^2
};

// Hilbert-Schmidt norm of the canonical inclusion (Phi, q) -> (Phi, p),
// computed over a q-orthonormal basis built from the reference basis in
// enumeration order. Requires p <= q; the value is basis-independent
// (trace of G_q^+ G_p on the range of G_q).
HsInclusion hs_inclusion_norm(const HilbertianSeminorm& p, const HilbertianSeminorm& q);

// Increasing family p_1 <= p_2 <= ... with optional attached tolerance levels
// (one positive, decreasing epsilon per member).
class SeminormChain {
 public:
  explicit SeminormChain(std::vector<HilbertianSeminorm> members,
                         std::vector<double> epsilons = {});

  std::size_t size() const { return members_.size(); }
  const HilbertianSeminorm& operator[](std::size_t i) const { return members_[i]; }
  const std::vector<double>& epsilons() const { return epsilons_; }

 private:
  std::vector<HilbertianSeminorm> members_;
  std::vector<double> epsilons_;
};

}  // namespace cylreg
