#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cylreg::stats {

struct MeanStderr {
  double mean = 0.0;
  double stderror = 0.0;
  std::size_t n = 0;
};

MeanStderr mean_stderr(std::span<const double> xs);

// Pearson correlation; stderr under the null of zero correlation is 1/sqrt(n).
struct Correlation {
  double rho = 0.0;
  double null_stderr = 0.0;
  bool degenerate = false;  // one of the samples has (numerically) zero variance
};

Correlation correlation(std::span<const double> xs, std::span<const double> ys);

// Survival function of the Kolmogorov distribution,
// Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

struct KsResult {
  double statistic = 0.0;  // sup |F1 - F2|
  double p_value = 1.0;
  std::size_t n1 = 0, n2 = 0;
};

// Two-sample Kolmogorov-Smirnov test with the Stephens small-sample
// correction on the asymptotic p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Regularized incomplete gamma functions P(a,x) and Q(a,x) = 1 - P(a,x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Survival function of the chi-square distribution with dof degrees of freedom.
double chi_square_sf(double statistic, double dof);

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  std::size_t bins = 0;
};

// Goodness-of-fit of observed nonnegative-integer counts against
// Poisson(mean); bins with expected count < 5 are pooled from the right.
ChiSquareResult chi_square_poisson_gof(const std::vector<std::uint64_t>& counts, double mean);

}  // namespace cylreg::stats
