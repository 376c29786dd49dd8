#pragma once

#include "cylreg/operators.hpp"
#include "cylreg/rng.hpp"
#include "cylreg/space.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace cylreg {

struct JumpLaw {
  enum class Kind { normal, constant, two_point };
  Kind kind = Kind::constant;
  double mu = 0.0, var = 1.0;        // normal(mu, var)
  double value = 1.0;                // constant(value)
  double magnitude = 1.0;            // two_point(+-magnitude, prob_up)
  double prob_up = 0.5;

  static JumpLaw normal(double mu, double var);
  static JumpLaw constant(double value);
  static JumpLaw two_point(double magnitude, double prob_up = 0.5);

  std::complex<double> char_fn(double u) const;  // E exp(iuJ)
  double mean() const;
  double second_moment() const;
  double sample(RngStream& rng) const;
};

struct CompoundPoissonSpec {
  double rate = 1.0;
  JumpLaw law;
};

struct StableSpec {
  double alpha = 1.5;  // in (0,2); alpha = 2 is rerouted to the Gaussian part
  double scale = 1.0;
};

using JumpPart = std::variant<std::monostate, CompoundPoissonSpec, StableSpec>;

// One real-valued Levy driver: drift + Brownian part + at most one jump
// component. The characteristic exponent is
//   psi(u) = i b u - var u^2 / 2 + rate (E exp(iuJ) - 1) - (scale|u|)^alpha.
struct LevyDriver {
  double drift = 0.0;
  double gaussian_var = 0.0;
  JumpPart jumps;

  static LevyDriver wiener();
  static LevyDriver compound_poisson(double rate, JumpLaw law);
  // alpha in (0,2]; alpha == 2 becomes a Gaussian driver with variance
  // 2*scale^2 per unit time (matching exp(-(scale|u|)^2) = exp(-2scale^2 u^2/2))
  static LevyDriver alpha_stable(double alpha, double scale);
  static LevyDriver composite(double drift, double gaussian_var, JumpPart jumps);

  std::complex<double> levy_exponent(double u) const;
  bool is_deterministic() const;
  bool is_martingale() const;               // centered and r=2-integrable shape
  bool has_finite_moment(double r) const;
  // E |beta_T|^r where analytically available (see moment_scale in regularize)
  double abs_moment(double r, double horizon) const;
  void validate() const;
};

// Exact-in-law realization of one driver on a fixed grid: Brownian (and
// drift) values at grid points, compound-Poisson jumps with exact times and
// sizes, stable increments as grid-time steps. Between grid points the
// continuous part is interpolated for display; all statistics are taken at
// grid and jump times.
struct DriverPath {
  std::vector<double> grid;             // 0 = t_0 < ... < t_K = T
  std::vector<double> continuous_part;  // b t_i + sigma B(t_i)
  std::vector<double> stable_part;      // cumulative stable steps, 0 at t_0
  std::vector<std::pair<double, double>> jump_list;  // (time, size), increasing

  double horizon() const { return grid.back(); }
  double value(double t) const;       // cadlag evaluation
  double left_limit(double t) const;
};

// Coordinate-driven cylindrical Levy process: X_t(phi) = sum_j phi_j beta_j(t)
// with independent drivers beta_j. Exactly linear in phi by construction.
struct CylindricalLevy {
  std::vector<LevyDriver> drivers;
  std::string label;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(drivers.size()); }
  // exp(t sum_j psi_j(phi_j))
  std::complex<double> char_function(const ModelVector& phi, double t) const;
};

CylindricalLevy make_cylindrical(const LevyDriver& driver, Eigen::Index dim,
                                 std::string label = "");
CylindricalLevy make_wiener(Eigen::Index dim, std::string label = "wiener");

// One sampled realization; a deterministic function of
// (seed, replica, grid, driver specs).
struct CylPathSample {
  std::vector<DriverPath> paths;
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
  double horizon = 0.0;
  std::vector<double> event_times;  // grid plus all jump times, sorted, unique

  Eigen::Index dim() const { return static_cast<Eigen::Index>(paths.size()); }
  double eval(const ModelVector& phi, double t) const;
  // dim x |times| table of driver values
  Eigen::MatrixXd values_table(const std::vector<double>& times) const;

  // hooks used by the series regularizer
  Eigen::Index dim_domain() const { return dim(); }
  ModelVector pullback(const ModelVector& phi) const { return phi; }
  const CylPathSample& base() const { return *this; }
};

CylPathSample sample_paths(const CylindricalLevy& process, double horizon,
                           int grid_resolution, std::uint64_t seed, std::uint64_t replica);

// The cylindrical process X o S: evaluation at phi defers to the base sample
// at S phi. Holds references; the sample and operator must outlive the view.
struct ComposedSample {
  const CylPathSample* sample = nullptr;
  const LinearOperator* op = nullptr;

  double horizon() const { return sample->horizon; }
  const std::vector<double>& event_times() const { return sample->event_times; }
  double eval(const ModelVector& phi, double t) const { return sample->eval(op->apply(phi), t); }

  Eigen::Index dim_domain() const { return op->cols(); }
  ModelVector pullback(const ModelVector& phi) const { return op->apply(phi); }
  const CylPathSample& base() const { return *sample; }
};

// Process-level composition, for characteristic functions and sampling.
struct ComposedProcess {
  CylindricalLevy process;
  LinearOperator op;

  Eigen::Index dim() const { return op.cols(); }
  std::complex<double> char_function(const ModelVector& phi, double t) const {
    return process.char_function(op.apply(phi), t);
  }
  CylPathSample sample(double horizon, int grid_resolution, std::uint64_t seed,
                       std::uint64_t replica) const {
    return sample_paths(process, horizon, grid_resolution, seed, replica);
  }
  ComposedSample view(const CylPathSample& s) const { return ComposedSample{&s, &op}; }
};

ComposedProcess compose(const CylindricalLevy& process, const LinearOperator& op);

// Componentwise evaluation of a sample along several directions, at the
// sample's event times. Returns one row per direction.
Eigen::MatrixXd project(const CylPathSample& sample, const std::vector<ModelVector>& dirs);

}  // namespace cylreg
