#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace swlab {

/// Welford accumulator; merge() combines partial results in a fixed order.
class RunningStats {
 public:
  void add(double x);
  void merge(const RunningStats& other);

  std::int64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // unbiased sample variance
  double stderr_of_mean() const;
  double min() const { return min_; }
  double max() const { return max_; }

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double min_ = 0.0;
  double max_ = 0.0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
LinearFit fit_least_squares(std::span<const double> x, std::span<const double> y);

/// Upper critical value of the chi-square distribution: P(X > value) = alpha.
double chi_square_critical(double dof, double alpha);

/// Pearson statistic of observed counts against equal expected cells.
double chi_square_uniform_statistic(std::span<const std::uint64_t> observed);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test using the asymptotic Kolmogorov
/// distribution. Conservative for discrete samples.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// P(K > x) for the Kolmogorov distribution.
double kolmogorov_survival(double x);

}  // namespace swlab
