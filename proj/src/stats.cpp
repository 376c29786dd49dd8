#include "cylreg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cylreg::stats {

MeanStderr mean_stderr(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("mean_stderr: need at least 2 samples");
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return MeanStderr{mean, std::sqrt(ss / (n - 1.0) / n), xs.size()};
}

Correlation correlation(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 3) {
    throw std::invalid_argument("correlation: need paired samples, n >= 3");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  Correlation c;
  c.null_stderr = 1.0 / std::sqrt(n);
  if (sxx <= 0.0 || syy <= 0.0) {
    c.degenerate = true;
    return c;
  }
  c.rho = sxy / std::sqrt(sxx * syy);
  return c;
}

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-12 * std::abs(sum) || term < 1e-300) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
  }
  const double ne = n1 * n2 / (n1 + n2);
  const double sq = std::sqrt(ne);
  KsResult r;
  r.statistic = d;
  r.p_value = kolmogorov_q((sq + 0.12 + 0.11 / sq) * d);
  r.n1 = a.size();
  r.n2 = b.size();
  return r;
}

namespace {

// series expansion of P(a,x), valid for x < a+1
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double term = sum;
  for (int n = 0; n < 1000; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// continued fraction for Q(a,x), valid for x >= a+1
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("gamma_p: need a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("gamma_q: need a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi_square_sf(double statistic, double dof) {
  if (statistic < 0.0 || !(dof > 0.0)) {
    throw std::invalid_argument("chi_square_sf: bad arguments");
  }
  return gamma_q(dof / 2.0, statistic / 2.0);
}

ChiSquareResult chi_square_poisson_gof(const std::vector<std::uint64_t>& counts, double mean) {
  if (counts.size() < 10) throw std::invalid_argument("chi_square_poisson_gof: too few samples");
  if (!(mean > 0.0)) throw std::invalid_argument("chi_square_poisson_gof: mean must be > 0");
  const double n = static_cast<double>(counts.size());

  std::uint64_t max_count = 0;
  for (auto c : counts) max_count = std::max(max_count, c);

  // expected bin masses under Poisson(mean)
  std::vector<double> expected;
  double pmf = std::exp(-mean);
  double cum = pmf;
  expected.push_back(n * pmf);
  for (std::uint64_t k = 1; k <= max_count; ++k) {
    pmf *= mean / static_cast<double>(k);
    cum += pmf;
    expected.push_back(n * pmf);
  }
  expected.push_back(n * std::max(1.0 - cum, 0.0));  // right tail

  std::vector<double> observed(expected.size(), 0.0);
  for (auto c : counts) observed[std::min<std::size_t>(c, observed.size() - 1)] += 1.0;

  // pool from the right until every bin expects at least 5
  std::size_t hi = expected.size();
  while (hi > 1 && expected[hi - 1] < 5.0) {
    expected[hi - 2] += expected[hi - 1];
    observed[hi - 2] += observed[hi - 1];
    --hi;
  }
  // pool from the left as well
  std::size_t lo = 0;
  while (lo + 1 < hi && expected[lo] < 5.0) {
    expected[lo + 1] += expected[lo];
    observed[lo + 1] += observed[lo];
    ++lo;
  }

  ChiSquareResult r;
  r.bins = hi - lo;
  if (r.bins < 2) {
    // distribution effectively degenerate at this sample size; report pass
    r.p_value = 1.0;
    r.dof = 0.0;
    return r;
  }
  for (std::size_t k = lo; k < hi; ++k) {
    const double diff = observed[k] - expected[k];
    r.statistic += diff * diff / expected[k];
  }
  r.dof = static_cast<double>(r.bins - 1);
  r.p_value = chi_square_sf(r.statistic, r.dof);
  return r;
}

}  // namespace cylreg::stats
