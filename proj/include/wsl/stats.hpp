#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace wsl {

struct SampleSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased; 0 when n == 1
  double min = 0.0;
  double max = 0.0;

  [[nodiscard]] double stderr_of_mean() const;
};

/// Streaming mean/variance (Welford).
class RunningStats {
 public:
  void push(double x);
  [[nodiscard]] std::size_t count() const { return n_; }
  [[nodiscard]] SampleSummary summary() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double min_ = 0.0;
  double max_ = 0.0;
};

/// Two-pass summary. Throws std::invalid_argument on empty input.
SampleSummary summarize(std::span<const double> xs);

class InsufficientReplicates : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void require_replicates(std::size_t n, std::size_t floor);

struct ComparisonResult {
  double mean_diff = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;   // one-sided lower bound at `level`
  double ci_high = 0.0;  // one-sided upper bound at `level`
  double p_value = 1.0;  // H0: E[diff] < 0 (evidence for E[diff] >= 0 is small p)
  double level = 0.99;
  std::size_t replicates = 0;
  bool degenerate = false;  // every difference identically zero
  double min_diff = 0.0;
  double max_diff = 0.0;

  /// The one-sided CI excludes negative values.
  [[nodiscard]] bool nonnegative() const { return ci_low >= 0.0; }
};

/// Normal-approximation one-sided test on paired differences. p_value is
/// P(Z > mean/se); an all-zero input reports p = 1 and degenerate = true.
ComparisonResult paired_one_sided_test(std::span<const double> diffs, double level = 0.99,
                                       std::size_t min_replicates = 100);

/// sup_x |F_n(x) - F(x)|.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Asymptotic one-sample critical values: c(alpha)/sqrt(n) with
/// c(0.05)=1.36, c(0.01)=1.63, c(0.001)=1.95.
double ks_critical(std::size_t n, double alpha);
double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha);

/// Pearson chi-square statistic of samples in [0, 1) against equal bins.
double chi_square_uniformity(std::span<const double> samples, std::size_t bins);

/// Anderson-Darling A^2 against a fully specified continuous CDF, with the
/// asymptotic p-value (Marsaglia & Marsaglia 2004 approximation).
struct AndersonDarling {
  double statistic = 0.0;
  double p_value = 1.0;
};
AndersonDarling anderson_darling(std::vector<double> samples,
                                 const std::function<double(double)>& cdf);

}  // namespace wsl
