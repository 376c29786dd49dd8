#include <doctest.h>

#include "cylreg/cylindrical.hpp"
#include "cylreg/stats.hpp"

#include <cmath>
#include <complex>

using namespace cylreg;

namespace {

ModelVector vec(std::initializer_list<double> xs) {
  ModelVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("driver factories and validation") {
  const auto w = make_wiener(3);
  CHECK(w.dim() == 3);
  for (const auto& d : w.drivers) {
    CHECK(d.gaussian_var == 1.0);
    CHECK(d.drift == 0.0);
    CHECK(std::holds_alternative<std::monostate>(d.jumps));
  }

  const auto cp = make_cylindrical(LevyDriver::compound_poisson(2.0, JumpLaw::constant(1.0)), 2);
  CHECK(cp.dim() == 2);
  CHECK(std::get<CompoundPoissonSpec>(cp.drivers[0].jumps).rate == 2.0);

  CHECK_THROWS_AS(LevyDriver::compound_poisson(-1.0, JumpLaw::constant(1.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(LevyDriver::alpha_stable(2.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(LevyDriver::alpha_stable(1.5, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_cylindrical(LevyDriver::wiener(), 0), std::invalid_argument);
}

TEST_CASE("alpha = 2 stable reduces to a Gaussian driver with variance 2 c^2 t") {
  const double c = 0.7;
  const auto d = LevyDriver::alpha_stable(2.0, c);
  CHECK(d.gaussian_var == doctest::Approx(2.0 * c * c));
  CHECK(std::holds_alternative<std::monostate>(d.jumps));
  // characteristic exponents agree with exp(-(c|u|)^2) on a u grid
  for (double u : {-2.0, -0.5, 0.0, 0.3, 1.0, 4.0}) {
    const std::complex<double> psi = d.levy_exponent(u);
    CHECK(psi.real() == doctest::Approx(-std::pow(c * std::abs(u), 2.0)).epsilon(1e-12));
    CHECK(psi.imag() == doctest::Approx(0.0));
  }
}

TEST_CASE("levy exponent symmetry: psi(0) = 0 and psi(-u) = conj(psi(u))") {
  const std::vector<LevyDriver> drivers = {
      LevyDriver::wiener(),
      LevyDriver::compound_poisson(3.0, JumpLaw::constant(1.0)),
      LevyDriver::compound_poisson(1.0, JumpLaw::normal(0.5, 2.0)),
      LevyDriver::compound_poisson(2.0, JumpLaw::two_point(1.5, 0.3)),
      LevyDriver::alpha_stable(1.2, 0.8),
      LevyDriver::composite(0.7, 0.5, CompoundPoissonSpec{1.0, JumpLaw::constant(-2.0)}),
  };
  for (const auto& d : drivers) {
    CHECK(std::abs(d.levy_exponent(0.0)) == doctest::Approx(0.0));
    for (double u : {0.25, 1.0, 3.0}) {
      const auto a = d.levy_exponent(-u);
      const auto b = std::conj(d.levy_exponent(u));
      CHECK(a.real() == doctest::Approx(b.real()).epsilon(1e-12));
      CHECK(a.imag() == doctest::Approx(b.imag()).epsilon(1e-12));
    }
  }
}

TEST_CASE("sampling is a pure function of seed and replica") {
  const auto x = make_cylindrical(
      LevyDriver::composite(0.1, 1.0, CompoundPoissonSpec{2.0, JumpLaw::normal(0.0, 1.0)}), 3);
  const auto s1 = sample_paths(x, 2.0, 16, 99, 7);
  const auto s2 = sample_paths(x, 2.0, 16, 99, 7);
  const auto s3 = sample_paths(x, 2.0, 16, 99, 8);
  REQUIRE(s1.paths.size() == 3);
  bool identical = true, distinct = false;
  for (std::size_t c = 0; c < 3; ++c) {
    identical = identical && s1.paths[c].continuous_part == s2.paths[c].continuous_part &&
                s1.paths[c].jump_list == s2.paths[c].jump_list;
    distinct = distinct || s1.paths[c].continuous_part != s3.paths[c].continuous_part;
  }
  CHECK(identical);
  CHECK(distinct);
  CHECK(s1.paths[0].value(0.0) == 0.0);
  for (const auto& p : s1.paths) {
    for (std::size_t k = 1; k < p.jump_list.size(); ++k) {
      CHECK(p.jump_list[k].first > p.jump_list[k - 1].first);
    }
    if (!p.jump_list.empty()) {
      CHECK(p.jump_list.front().first > 0.0);
      CHECK(p.jump_list.back().first <= 2.0);
    }
  }
}

TEST_CASE("terminal variance of a Brownian coordinate matches its law") {
  const auto x = make_wiener(1);
  const std::size_t n = 10000;
  std::vector<double> terminal(n);
  for (std::size_t i = 0; i < n; ++i) {
    terminal[i] = sample_paths(x, 1.0, 4, 2024, i).paths[0].value(1.0);
  }
  double mean = 0.0, sumsq = 0.0;
  for (double v : terminal) mean += v;
  mean /= static_cast<double>(n);
  for (double v : terminal) sumsq += (v - mean) * (v - mean);
  const double var = sumsq / static_cast<double>(n - 1);
  // CLT band for a variance estimate: sd ~ sqrt(2/n)
  CHECK(std::abs(var - 1.0) <= 5.0 * std::sqrt(2.0 / static_cast<double>(n)));
}

TEST_CASE("compound poisson jump counts have the right mean and law") {
  const auto x = make_cylindrical(LevyDriver::compound_poisson(3.0, JumpLaw::constant(1.0)), 1);
  const std::size_t n = 10000;
  std::vector<std::uint64_t> counts(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = sample_paths(x, 2.0, 4, 555, i);
    counts[i] = s.paths[0].jump_list.size();
    total += static_cast<double>(counts[i]);
  }
  const double mean = total / static_cast<double>(n);
  CHECK(std::abs(mean - 6.0) <= 5.0 * std::sqrt(6.0 / static_cast<double>(n)));
  CHECK(stats::chi_square_poisson_gof(counts, 6.0).p_value >= 0.01);
}

TEST_CASE("evaluation is exactly linear in the test direction") {
  const auto x = make_cylindrical(
      LevyDriver::composite(0.0, 1.0, CompoundPoissonSpec{1.0, JumpLaw::normal(0.0, 1.0)}), 4);
  const auto s = sample_paths(x, 1.0, 32, 77, 0);
  CHECK(s.eval(ModelVector::Zero(4), 0.73) == 0.0);
  for (Eigen::Index k = 0; k < 4; ++k) {
    ModelVector e = ModelVector::Zero(4);
    e[k] = 1.0;
    CHECK(s.eval(e, 0.5) == doctest::Approx(s.paths[static_cast<std::size_t>(k)].value(0.5))
                                .epsilon(1e-15));
  }
  const ModelVector phi = vec({0.2, -1.3, 0.0, 2.2});
  const ModelVector psi = vec({1.0, 0.4, -0.7, 0.1});
  for (double t : {0.0, 0.25, 0.9, 1.0}) {
    const double lhs = s.eval(2.0 * phi - 3.0 * psi, t);
    const double rhs = 2.0 * s.eval(phi, t) - 3.0 * s.eval(psi, t);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
  CHECK_THROWS_AS(s.eval(phi, 1.5), std::out_of_range);
}

TEST_CASE("projection agrees with eval and decorrelates orthogonal directions") {
  const auto x = make_wiener(2);
  const auto s = sample_paths(x, 1.0, 8, 31, 0);
  const ModelVector e1 = vec({1, 0});
  const auto proj = project(s, {e1, e1});
  for (Eigen::Index e = 0; e < proj.cols(); ++e) {
    CHECK(proj(0, e) == proj(1, e));
    CHECK(proj(0, e) == doctest::Approx(s.eval(e1, s.event_times[static_cast<std::size_t>(e)]))
                            .epsilon(1e-15));
  }

  const std::size_t n = 10000;
  const ModelVector u = vec({M_SQRT1_2, M_SQRT1_2});
  const ModelVector v = vec({M_SQRT1_2, -M_SQRT1_2});
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto si = sample_paths(x, 1.0, 4, 32, i);
    a[i] = si.eval(u, 1.0);
    b[i] = si.eval(v, 1.0);
  }
  const auto corr = stats::correlation(a, b);
  CHECK_FALSE(corr.degenerate);
  CHECK(std::abs(corr.rho) <= 5.0 * corr.null_stderr);
}

TEST_CASE("characteristic function: exact cases and the convolution semigroup") {
  const auto x = make_wiener(3);
  CHECK(std::abs(x.char_function(ModelVector::Zero(3), 2.0) - 1.0) == doctest::Approx(0.0));

  const ModelVector phi = vec({1.0, -0.5, 0.25});
  for (double t : {0.1, 1.0, 2.5}) {
    CHECK(std::abs(x.char_function(phi, t)) ==
          doctest::Approx(std::exp(-0.5 * t * phi.squaredNorm())).epsilon(1e-12));
  }

  const auto mixed = make_cylindrical(
      LevyDriver::composite(0.3, 0.7, CompoundPoissonSpec{2.0, JumpLaw::two_point(1.0, 0.4)}), 3);
  const double s = 0.6, t = 1.1;
  const auto lhs = mixed.char_function(phi, s + t);
  const auto rhs = mixed.char_function(phi, s) * mixed.char_function(phi, t);
  CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(lhs));
}

TEST_CASE("empirical characteristic function matches the analytic one") {
  const auto x = make_cylindrical(
      LevyDriver::composite(0.0, 1.0, CompoundPoissonSpec{1.5, JumpLaw::two_point(1.0)}), 2);
  const std::size_t n = 30000;
  const std::vector<ModelVector> phis = {vec({1.0, 0.0}), vec({0.3, -0.7}), vec({-1.2, 0.5})};
  const std::vector<double> ts = {0.5, 1.0};
  std::vector<std::complex<double>> acc(phis.size() * ts.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = sample_paths(x, 1.0, 8, 808, i);
    for (std::size_t p = 0; p < phis.size(); ++p) {
      for (std::size_t k = 0; k < ts.size(); ++k) {
        const double v = s.eval(phis[p], ts[k]);
        acc[p * ts.size() + k] += std::complex<double>(std::cos(v), std::sin(v));
      }
    }
  }
  for (std::size_t p = 0; p < phis.size(); ++p) {
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const auto emp = acc[p * ts.size() + k] / static_cast<double>(n);
      const auto ana = x.char_function(phis[p], ts[k]);
      CHECK(std::abs(emp - ana) <= 5.0 * std::sqrt(2.0 / static_cast<double>(n)));
    }
  }
}

TEST_CASE("increment stationarity and independence per coordinate") {
  const auto x = make_cylindrical(
      LevyDriver::composite(0.0, 1.0, CompoundPoissonSpec{2.0, JumpLaw::normal(0.0, 1.0)}), 1);
  const std::size_t n = 10000;
  const double h = 0.25;
  std::vector<double> early(n), late(n), first_quarter(n), third_quarter(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = sample_paths(x, 1.0, 8, 606, i);
    const auto& p = s.paths[0];
    early[i] = p.value(h);
    late[i] = p.value(0.5 + h) - p.value(0.5);
    first_quarter[i] = p.value(0.25);
    third_quarter[i] = p.value(0.75) - p.value(0.5);
  }
  CHECK(stats::ks_two_sample(early, late).p_value >= 0.01);
  const auto corr = stats::correlation(first_quarter, third_quarter);
  CHECK(std::abs(corr.rho) <= 5.0 * corr.null_stderr);
}

TEST_CASE("composition with an operator") {
  const auto x = make_wiener(4);
  Eigen::VectorXd d(4);
  for (Eigen::Index j = 0; j < 4; ++j) d[j] = 1.0 / static_cast<double>(j + 1);
  const auto diag = LinearOperator::diagonal(d);
  const auto comp = compose(x, diag);

  const auto s = sample_paths(x, 1.0, 16, 17, 3);
  const auto view = comp.view(s);
  const ModelVector phi = vec({0.5, -1.0, 2.0, 0.25});
  for (double t : {0.25, 0.5, 1.0}) {
    CHECK(view.eval(phi, t) == doctest::Approx(s.eval(diag.apply(phi), t)).epsilon(1e-14));
  }

  // identity composition is behaviorally identical
  const auto ident = compose(x, LinearOperator::identity(4));
  const auto iview = ident.view(s);
  for (double t : {0.25, 1.0}) {
    CHECK(iview.eval(phi, t) == doctest::Approx(s.eval(phi, t)).epsilon(1e-14));
  }

  // linearity survives composition
  const ModelVector psi = vec({1.0, 1.0, 0.0, -1.0});
  const double lhs = view.eval(phi + 2.0 * psi, 0.5);
  CHECK(lhs == doctest::Approx(view.eval(phi, 0.5) + 2.0 * view.eval(psi, 0.5)).epsilon(1e-12));

  // analytic CF of wiener composed with diag(1/j)
  for (double t : {0.5, 1.0}) {
    const double expo = 0.5 * t * diag.apply(phi).squaredNorm();
    CHECK(std::abs(comp.char_function(phi, t)) == doctest::Approx(std::exp(-expo)).epsilon(1e-12));
  }

  CHECK_THROWS_AS(compose(x, LinearOperator::identity(3)), std::invalid_argument);
}

TEST_CASE("stable driver paths step at grid times") {
  const auto x = make_cylindrical(LevyDriver::alpha_stable(1.5, 0.8), 1);
  const auto s = sample_paths(x, 1.0, 8, 515, 0);
  const auto& p = s.paths[0];
  REQUIRE(p.stable_part.size() == 9);
  CHECK(p.stable_part[0] == 0.0);
  // value holds the last grid step between grid points
  for (std::size_t i = 1; i < p.grid.size(); ++i) {
    CHECK(p.value(p.grid[i]) == doctest::Approx(p.stable_part[i]).epsilon(1e-14));
    const double mid = 0.5 * (p.grid[i - 1] + p.grid[i]);
    CHECK(p.value(mid) == doctest::Approx(p.stable_part[i - 1]).epsilon(1e-14));
    CHECK(p.left_limit(p.grid[i]) == doctest::Approx(p.stable_part[i - 1]).epsilon(1e-14));
  }
}

TEST_CASE("cadlag evaluation around jumps") {
  LevyDriver d = LevyDriver::compound_poisson(4.0, JumpLaw::constant(1.0));
  const auto x = make_cylindrical(d, 1);
  const auto s = sample_paths(x, 1.0, 8, 404, 2);
  const auto& p = s.paths[0];
  REQUIRE_FALSE(p.jump_list.empty());
  for (const auto& [time, size] : p.jump_list) {
    CHECK(p.value(time) - p.left_limit(time) == doctest::Approx(size).epsilon(1e-12));
  }
  // piecewise constant between jumps
  double prev_t = 0.0;
  double level = 0.0;
  for (const auto& [time, size] : p.jump_list) {
    const double mid = 0.5 * (prev_t + time);
    CHECK(p.value(mid) == doctest::Approx(level).epsilon(1e-14));
    level += size;
    prev_t = time;
  }
}
