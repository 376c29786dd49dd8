#pragma once

#include "cylreg/regularize.hpp"
#include "cylreg/replica_sweep.hpp"
#include "cylreg/stats.hpp"

#include <string>
#include <vector>

namespace cylreg {

struct McConfig {
  std::size_t replicas = 10000;
  std::uint64_t seed = 20240801;
  int grid_resolution = 256;
  double alpha = 0.01;             // significance for KS / chi-square
  double stderr_multiplier = 5.0;  // moment and covariance comparisons
  ExecMode exec = ExecMode::parallel;

  void validate(bool distributional = false) const;
};

// pass semantics per check: either "statistic <= threshold" or
// "p-value >= alpha" -- stated in details
struct CheckResult {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string details;
  std::uint64_t seed = 0;
  std::size_t replicas = 0;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  bool overall_pass() const;
};

// --- version property ---------------------------------------------------
// max over replicas, probe directions and event times of
// |<Y_t, phi> - X_t(S phi)| / (1 + |X_t(S phi)|), over the reference basis
// plus random in-span directions. Out-of-span probes (possible when the
// truncation is below the system size) are reported as expected gaps unless
// strict_out_of_span is set.
CheckResult check_version(const Radonifier& rad, const McConfig& cfg,
                          bool strict_out_of_span = false);

// --- Q-Wiener covariance --------------------------------------------------
struct CovProbe {
  double s = 0.0, t = 0.0;
  ModelVector phi, psi;
};
std::vector<CovProbe> default_cov_probes(const Radonifier& rad, std::size_t count,
                                         std::uint64_t seed);
// E <Y_s,phi><Y_t,psi> against min(s,t) <S phi_m, S psi_m> with the target
// evaluated by two independent algebraic routes before any sampling.
CheckResult check_qwiener_covariance(const Radonifier& rad, const std::vector<CovProbe>& probes,
                                     const McConfig& cfg);

// --- Levy increment structure ----------------------------------------------
// (a) stationarity: two-sample KS between <Y_{t+h}-Y_t, phi> and <Y_h, phi>
//     over disjoint intervals; (b) independence: correlation of increments
//     over disjoint intervals within k/sqrt(n) of zero;
// (c) jump counts Poisson(rate*T) by chi-square when the driver jumps.
CheckResult check_levy_increments(const Radonifier& rad, const McConfig& cfg);

// --- cadlag structure -------------------------------------------------------
// structural right-continuity at jump times, finite left limits, piecewise
// constancy between jumps for pure-jump drivers, and for Gaussian drivers the
// decrease of the mean max qnorm grid increment under resolution doubling
// (coarser grids are subsampled from the finest path).
CheckResult check_cadlag(const Radonifier& rad, const McConfig& cfg);

// --- weak continuity at zero -------------------------------------------------
CheckResult check_weak_continuity_zero(const Radonifier& rad, std::vector<double> t_sequence,
                                       const McConfig& cfg);

// --- Sazonov continuity certificate ------------------------------------------
struct CertificateProbeRow {
  std::string label;
  double lhs = 0.0;         // MC estimate of E sup_t |1 - exp(i X_t(S phi))|
  double lhs_stderr = 0.0;
  double mapped_norm = 0.0; // |S phi|
  double margin = 0.0;      // eps + 2 c^2 |S phi|^2 + k se - lhs at the reported c
};
struct CertificateResult {
  CheckResult check;
  double epsilon = 0.0;
  double scale_c = 0.0;           // smallest admissible c (by bisection)
  bool admissible = false;
  double c_max = 0.0;
  double generator_hs_norm = 0.0; // Hilbert-Schmidt mass of c*S
  std::vector<CertificateProbeRow> probes;
};
// Posits the Sazonov-generator candidate p(phi) = c |S phi| and searches the
// smallest c such that every probe satisfies
//   E sup_t |1 - exp(i X_t(S phi))| <= eps + 2 p(phi)^2 + k stderr.
// Probes run over basis and random unit directions and dyadically shrunk
// multiples of each, which exercise continuity at the origin.
CertificateResult sazonov_certificate(const CylindricalLevy& process, const LinearOperator& op,
                                      double horizon, double epsilon, double c_max,
                                      const McConfig& cfg, std::size_t random_probes = 8);

// --- probability band ---------------------------------------------------------
// P( sup_t sum_{j<=m} |X_t(S phi_j)|^2 > R ) compared against
// band_constant * eps_n over an R sweep; the crossing R per level is reported.
double band_constant();    // sqrt(e)/(sqrt(e)-1)
double band_constant_2();  // 2 sqrt(e)/(sqrt(e)-1)
struct BandLevel {
  double epsilon = 0.0;
  double band = 0.0;
  bool crossed = false;
  double crossing_radius = 0.0;
  std::vector<std::pair<double, double>> curve;  // (R, estimate)
};
struct BandResult {
  CheckResult check;
  std::vector<BandLevel> levels;
};
BandResult probability_band_diagnostic(const Radonifier& rad, const std::vector<double>& epsilons,
                                       std::vector<double> radius_sweep, const McConfig& cfg);
// levels taken from the chain's attached epsilons
BandResult probability_band_diagnostic(const Radonifier& rad, const SeminormChain& chain,
                                       std::vector<double> radius_sweep, const McConfig& cfg);

// --- truncation moment bound ----------------------------------------------------
// E sup_t ( sum_{m<j<=2m} c_j(t)^2 )^{r/2} against the a priori tail bound at
// level m; skipped with a note for non-martingale drivers.
CheckResult check_moment_bound(const Radonifier& rad, Eigen::Index m, double r,
                               const McConfig& cfg);

}  // namespace cylreg
