#include <doctest.h>

#include "cylreg/verify.hpp"

#include <cmath>

using namespace cylreg;

namespace {

Eigen::VectorXd inverse_index_diag(Eigen::Index n) {
  Eigen::VectorXd d(n);
  for (Eigen::Index j = 1; j <= n; ++j) d[j - 1] = 1.0 / static_cast<double>(j);
  return d;
}

Radonifier wiener_radonifier(Eigen::Index n, Eigen::Index m, int resolution = 64,
                             std::uint64_t seed = 4242) {
  return Radonifier(make_wiener(n), LinearOperator::diagonal(inverse_index_diag(n)),
                    HilbertianSeminorm::euclidean(n), m, 1.0, resolution, seed);
}

McConfig small_cfg(std::size_t replicas, int resolution = 64, std::uint64_t seed = 4242) {
  McConfig cfg;
  cfg.replicas = replicas;
  cfg.seed = seed;
  cfg.grid_resolution = resolution;
  return cfg;
}

}  // namespace

TEST_CASE("mc config validation") {
  McConfig cfg;
  cfg.replicas = 1;
  CHECK_THROWS_AS(cfg.validate(false), std::invalid_argument);
  cfg.replicas = 50;
  CHECK_NOTHROW(cfg.validate(false));
  CHECK_THROWS_AS(cfg.validate(true), std::invalid_argument);
  cfg.replicas = 200;
  cfg.alpha = 0.7;
  CHECK_THROWS_AS(cfg.validate(false), std::invalid_argument);
}

TEST_CASE("version check passes at full resolution and reports gaps below it") {
  const auto rad_full = wiener_radonifier(10, 10);
  const auto full = check_version(rad_full, small_cfg(50));
  CHECK(full.pass);
  CHECK(full.statistic <= 1e-10);

  const auto rad_cut = wiener_radonifier(10, 5);
  const auto lenient = check_version(rad_cut, small_cfg(50));
  CHECK(lenient.pass);  // out-of-span gaps reported, not asserted
  CHECK(lenient.details.find("out-of-span") != std::string::npos);

  const auto strict = check_version(rad_cut, small_cfg(50), true);
  CHECK_FALSE(strict.pass);
  CHECK(strict.statistic > 1e-10);
}

TEST_CASE("version check holds at full resolution for every driver kind") {
  const std::vector<LevyDriver> drivers = {
      LevyDriver::wiener(),
      LevyDriver::compound_poisson(2.0, JumpLaw::normal(0.0, 1.0)),
      LevyDriver::alpha_stable(1.3, 0.5),
      LevyDriver::composite(0.4, 0.25, CompoundPoissonSpec{1.0, JumpLaw::constant(-1.0)}),
  };
  for (std::size_t k = 0; k < drivers.size(); ++k) {
    const Eigen::Index n = 5;
    const Radonifier rad(make_cylindrical(drivers[k], n),
                         LinearOperator::diagonal(inverse_index_diag(n)),
                         HilbertianSeminorm::euclidean(n), n, 1.0, 32, 100 + k);
    const auto r = check_version(rad, small_cfg(30, 32, 100 + k));
    CHECK(r.pass);
    CHECK(r.statistic <= 1e-10);
  }
}

TEST_CASE("out-of-span version gap sits under the single-coordinate tail bound") {
  // truncation m leaves e_{m+1} unresolved; the deviation sup_t |<Y,e_{m+1}> -
  // X_t(S e_{m+1})| is exactly sup_t |sigma_{m+1} beta(t)|, whose second moment
  // is bounded by Doob: 4 sigma_{m+1}^2 E beta_T^2
  const Eigen::Index n = 8;
  const Eigen::Index m = 4;
  const auto rad = wiener_radonifier(n, m, 64, 2025);
  const double sigma = 1.0 / static_cast<double>(m + 1);
  const std::size_t replicas = 3000;
  std::vector<double> sq_gap(replicas);
  ModelVector probe = ModelVector::Zero(n);
  probe[m] = 1.0;
  for (std::size_t i = 0; i < replicas; ++i) {
    const auto s = rad.sample(i);
    const auto y = rad.from_sample(s);
    double sup = 0.0;
    for (std::size_t e = 0; e < y.times.size(); ++e) {
      const double lhs = y.eval_dual_pairing(probe, y.times[e]);
      const double rhs = s.eval(rad.op().apply(probe), y.times[e]);
      sup = std::max(sup, std::abs(lhs - rhs));
    }
    sq_gap[i] = sup * sup;
  }
  const auto ms = stats::mean_stderr(sq_gap);
  const double bound = 4.0 * sigma * sigma;  // Doob at r = 2, E beta_1^2 = 1
  CHECK(ms.mean <= bound + 5.0 * ms.stderror);
  CHECK(ms.mean > 0.0);
}

TEST_CASE("version check is deterministic given seed and config") {
  const auto rad = wiener_radonifier(6, 6);
  const auto a = check_version(rad, small_cfg(40));
  const auto b = check_version(rad, small_cfg(40));
  CHECK(a.statistic == b.statistic);
  CHECK(a.details == b.details);
  CHECK(a.pass == b.pass);
}

TEST_CASE("qwiener covariance check") {
  const auto rad = wiener_radonifier(6, 6);
  const auto probes = default_cov_probes(rad, 12, 4242);
  CHECK(probes.size() == 12);
  const auto r = check_qwiener_covariance(rad, probes, small_cfg(4000));
  CHECK(r.pass);
  CHECK(r.statistic <= r.threshold);

  // requires Brownian input
  const Radonifier cp_rad(
      make_cylindrical(LevyDriver::compound_poisson(2.0, JumpLaw::constant(1.0)), 4),
      LinearOperator::diagonal(inverse_index_diag(4)), HilbertianSeminorm::euclidean(4), 4, 1.0,
      32, 7);
  CHECK_THROWS_AS(check_qwiener_covariance(cp_rad, default_cov_probes(cp_rad, 4, 7), small_cfg(200)),
                  std::invalid_argument);
}

TEST_CASE("levy increment checks pass for Brownian, jump and deterministic drivers") {
  const auto wiener = check_levy_increments(wiener_radonifier(4, 4), small_cfg(3000));
  CHECK(wiener.pass);
  CHECK(wiener.statistic >= 0.01);

  const Radonifier cp_rad(
      make_cylindrical(LevyDriver::compound_poisson(3.0, JumpLaw::constant(1.0)), 4),
      LinearOperator::diagonal(inverse_index_diag(4)), HilbertianSeminorm::euclidean(4), 4, 2.0,
      64, 11);
  const auto cp = check_levy_increments(cp_rad, small_cfg(3000, 64, 11));
  CHECK(cp.pass);
  CHECK(cp.details.find("chi-square") != std::string::npos);

  // drift-only driver: increments are constant, KS is skipped with a note
  const Radonifier drift_rad(make_cylindrical(LevyDriver::composite(1.0, 0.0, {}), 3),
                             LinearOperator::diagonal(inverse_index_diag(3)),
                             HilbertianSeminorm::euclidean(3), 3, 1.0, 32, 5);
  const auto drift = check_levy_increments(drift_rad, small_cfg(500, 32, 5));
  CHECK(drift.pass);
  CHECK(drift.details.find("degenerate") != std::string::npos);

  // stable drivers keep the distribution-free KS but drop the correlation band
  const Radonifier stable_rad(make_cylindrical(LevyDriver::alpha_stable(1.4, 1.0), 3),
                              LinearOperator::diagonal(inverse_index_diag(3)),
                              HilbertianSeminorm::euclidean(3), 3, 1.0, 64, 29);
  const auto stable = check_levy_increments(stable_rad, small_cfg(2000, 64, 29));
  CHECK(stable.pass);
  CHECK(stable.details.find("infinite-variance") != std::string::npos);
}

TEST_CASE("cadlag check: pure-jump flatness and Brownian resolution decrease") {
  const Radonifier cp_rad(
      make_cylindrical(LevyDriver::compound_poisson(4.0, JumpLaw::normal(0.0, 1.0)), 3),
      LinearOperator::diagonal(inverse_index_diag(3)), HilbertianSeminorm::euclidean(3), 3, 1.0,
      32, 13);
  const auto cp = check_cadlag(cp_rad, small_cfg(400, 32, 13));
  CHECK(cp.pass);
  CHECK(cp.details.find("piecewise-constant") != std::string::npos);

  const auto wiener = check_cadlag(wiener_radonifier(6, 6, 128), small_cfg(800, 128));
  CHECK(wiener.pass);
  CHECK(wiener.details.find("resolution doubling") != std::string::npos);
}

TEST_CASE("weak continuity at zero") {
  const auto rad = wiener_radonifier(6, 6);
  const auto r = check_weak_continuity_zero(rad, {0.5, 0.25, 0.125, 0.0625}, small_cfg(3000));
  CHECK(r.pass);
  CHECK(r.statistic <= r.threshold);

  CHECK_THROWS_AS(check_weak_continuity_zero(rad, {0.25, 0.5}, small_cfg(200)),
                  std::invalid_argument);
}

TEST_CASE("sazonov certificate finds a small scale for an HS operator") {
  const auto process = make_wiener(8);
  const auto op = LinearOperator::diagonal(inverse_index_diag(8));
  const auto cert = sazonov_certificate(process, op, 1.0, 0.1, 8.0, small_cfg(600), 4);
  CHECK(cert.check.pass);
  CHECK(cert.admissible);
  CHECK(cert.scale_c <= 2.0);
  CHECK(cert.generator_hs_norm == doctest::Approx(cert.scale_c * op.hs_norm()).epsilon(1e-12));
  REQUIRE_FALSE(cert.probes.empty());
  for (const auto& row : cert.probes) CHECK(row.margin >= -1e-12);

  // monotone in epsilon: a larger epsilon never needs a larger scale
  const auto looser = sazonov_certificate(process, op, 1.0, 0.2, 8.0, small_cfg(600), 4);
  CHECK(looser.scale_c <= cert.scale_c + 1e-12);

  // epsilon >= 2 makes the certificate vacuous: |1 - exp(ix)| <= 2 pointwise
  const auto vacuous = sazonov_certificate(process, op, 1.0, 2.0, 8.0, small_cfg(200), 2);
  CHECK(vacuous.admissible);
  CHECK(vacuous.scale_c == 0.0);
}

TEST_CASE("certificate bisection agrees with the closed-form minimal scale") {
  const auto process = make_wiener(5);
  const auto op = LinearOperator::diagonal(inverse_index_diag(5));
  const double eps = 0.15;
  const McConfig cfg = small_cfg(500);
  const auto cert = sazonov_certificate(process, op, 1.0, eps, 16.0, cfg, 3);
  REQUIRE(cert.admissible);
  // closed form: c^2 = max over probes of (lhs - eps - k se) / (2 |S phi|^2).
  // Recover it from the reported rows at the found scale: every margin >= 0 and
  // the minimal scale makes some probe tight unless c = 0.
  if (cert.scale_c > 0.0) {
    double tightest = 1e300;
    for (const auto& row : cert.probes) tightest = std::min(tightest, row.margin);
    CHECK(tightest <= 1e-6);
  }
}

TEST_CASE("probability band diagnostic") {
  CHECK(std::abs(band_constant() - 2.54149) <= 1e-5);
  CHECK(std::abs(band_constant_2() - 5.08299) <= 1e-5);

  const auto rad = wiener_radonifier(8, 8);
  std::vector<double> sweep;
  for (double radius = 1.0 / 64.0; radius <= 4096.0; radius *= 2.0) sweep.push_back(radius);
  const auto band = probability_band_diagnostic(rad, {0.1, 0.05}, sweep, small_cfg(2000));
  CHECK(band.check.pass);
  REQUIRE(band.levels.size() == 2);
  for (const auto& level : band.levels) {
    CHECK(level.crossed);
    CHECK(level.crossing_radius > 0.0);
    // estimates are nonincreasing in R
    for (std::size_t i = 1; i < level.curve.size(); ++i) {
      CHECK(level.curve[i].second <= level.curve[i - 1].second + 1e-12);
    }
  }
  // the zero process has zero tail probability at every positive radius
  const Radonifier zero_rad(make_wiener(3), LinearOperator::zero(3, 3),
                            HilbertianSeminorm::euclidean(3), 3, 1.0, 16, 3);
  const auto zero_band = probability_band_diagnostic(zero_rad, {0.1}, {0.5, 1.0}, small_cfg(200));
  CHECK(zero_band.check.pass);
  CHECK(zero_band.levels[0].crossing_radius == 0.5);

  CHECK_THROWS_AS(probability_band_diagnostic(rad, {0.05, 0.1}, sweep, small_cfg(200)),
                  std::invalid_argument);

  // a seminorm chain carries the levels through its attached epsilons
  const SeminormChain chain({HilbertianSeminorm::euclidean(8),
                             HilbertianSeminorm::euclidean(8).scaled(2.0)},
                            {0.1, 0.05});
  const auto via_chain = probability_band_diagnostic(rad, chain, sweep, small_cfg(2000));
  CHECK(via_chain.check.statistic == band.check.statistic);
  CHECK_THROWS_AS(probability_band_diagnostic(
                      rad, SeminormChain({HilbertianSeminorm::euclidean(8)}), sweep,
                      small_cfg(200)),
                  std::invalid_argument);
}

TEST_CASE("moment bound check") {
  const auto rad = wiener_radonifier(20, 20);
  const auto r = check_moment_bound(rad, 5, 2.0, small_cfg(2000));
  CHECK(r.pass);
  CHECK(r.statistic <= r.threshold);

  // when m reaches the operator rank the gap coordinates vanish identically
  Eigen::VectorXd low_rank = Eigen::VectorXd::Zero(6);
  for (Eigen::Index j = 0; j < 3; ++j) low_rank[j] = 1.0 / static_cast<double>(j + 1);
  const Radonifier rank3(make_wiener(6), LinearOperator::diagonal(low_rank),
                         HilbertianSeminorm::euclidean(6), 6, 1.0, 32, 9);
  const auto all = check_moment_bound(rank3, 3, 2.0, small_cfg(200));
  CHECK(all.pass);
  CHECK(all.statistic == 0.0);

  // non-martingale drivers are skipped with a note
  const Radonifier cp_rad(
      make_cylindrical(LevyDriver::compound_poisson(2.0, JumpLaw::constant(1.0)), 8),
      LinearOperator::diagonal(inverse_index_diag(8)), HilbertianSeminorm::euclidean(8), 8, 1.0,
      32, 19);
  const auto skipped = check_moment_bound(cp_rad, 2, 2.0, small_cfg(200));
  CHECK(skipped.pass);
  CHECK(skipped.details.find("skipped") != std::string::npos);

  // centered two-point jumps are martingales with an r=2 moment scale
  const Radonifier mart_rad(
      make_cylindrical(LevyDriver::compound_poisson(2.0, JumpLaw::two_point(1.0, 0.5)), 8),
      LinearOperator::diagonal(inverse_index_diag(8)), HilbertianSeminorm::euclidean(8), 8, 1.0,
      64, 23);
  const auto mart = check_moment_bound(mart_rad, 2, 2.0, small_cfg(1500, 64, 23));
  CHECK(mart.pass);
  CHECK(mart.details.find("skipped") == std::string::npos);
}

TEST_CASE("dense seminorm and smoothing operator round the full pipeline") {
  const Eigen::Index n = 6;
  // full-rank dense q and a non-diagonal Hilbert-Schmidt operator
  RngStream rng(77, 0, 0);
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rng.gaussian();
  }
  const auto q = HilbertianSeminorm::dense(a.transpose() * a +
                                           Eigen::MatrixXd::Identity(n, n));
  const auto op = LinearOperator::gaussian_kernel(n, 1.5);
  const Radonifier rad(make_wiener(n), op, q, q.rank(), 1.0, 64, 88);
  CHECK(rad.domination_scale() > 0.0);

  const auto version = check_version(rad, small_cfg(40, 64, 88));
  CHECK(version.pass);
  CHECK(version.statistic <= 1e-10);

  const auto cov = check_qwiener_covariance(rad, default_cov_probes(rad, 8, 88),
                                            small_cfg(3000, 64, 88));
  CHECK(cov.pass);
}

TEST_CASE("verification report aggregates passes") {
  VerificationReport report;
  report.checks.push_back(CheckResult{"a", 0, 0, true, "", 0, 0});
  report.checks.push_back(CheckResult{"b", 0, 0, true, "", 0, 0});
  CHECK(report.overall_pass());
  report.checks.push_back(CheckResult{"c", 0, 0, false, "", 0, 0});
  CHECK_FALSE(report.overall_pass());
}
