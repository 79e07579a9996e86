#include "wsl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wsl/numerics.hpp"

namespace wsl {

double SampleSummary::stderr_of_mean() const {
  if (n == 0) return 0.0;
  return std::sqrt(variance / static_cast<double>(n));
}

void RunningStats::push(double x) {
  ++n_;
  if (n_ == 1) {
    min_ = max_ = x;
  } else {
    min_ = std::min(min_, x);
    max_ = std::max(max_, x);
  }
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

SampleSummary RunningStats::summary() const {
  if (n_ == 0) throw std::invalid_argument("summary of zero samples");
  const double var = n_ > 1 ? std::max(0.0, m2_ / static_cast<double>(n_ - 1)) : 0.0;
  return {n_, mean_, var, min_, max_};
}

SampleSummary summarize(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("summary of zero samples");
  double sum = 0.0;
  double lo = xs.front(), hi = xs.front();
  for (double x : xs) {
    sum += x;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  const double n = static_cast<double>(xs.size());
  const double mean = sum / n;
  double ss = 0.0, comp = 0.0;
  for (double x : xs) {
    ss += (x - mean) * (x - mean);
    comp += x - mean;
  }
  const double var = xs.size() > 1 ? std::max(0.0, (ss - comp * comp / n) / (n - 1.0)) : 0.0;
  return {xs.size(), mean, var, lo, hi};
}

void require_replicates(std::size_t n, std::size_t floor) {
  if (n < floor) {
    throw InsufficientReplicates("need at least " + std::to_string(floor) + " replicates, got " +
                                 std::to_string(n) + "; increase --replicates");
  }
}

ComparisonResult paired_one_sided_test(std::span<const double> diffs, double level,
                                       std::size_t min_replicates) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must be in (0,1)");
  require_replicates(diffs.size(), std::max<std::size_t>(min_replicates, 1));
  const SampleSummary s = summarize(diffs);
  ComparisonResult r;
  r.level = level;
  r.replicates = s.n;
  r.mean_diff = s.mean;
  r.min_diff = s.min;
  r.max_diff = s.max;
  r.std_error = s.stderr_of_mean();
  const double z = normal_quantile(level);
  r.ci_low = s.mean - z * r.std_error;
  r.ci_high = s.mean + z * r.std_error;
  if (s.min == 0.0 && s.max == 0.0) {
    r.degenerate = true;
    r.p_value = 1.0;
  } else if (r.std_error == 0.0) {
    r.p_value = s.mean > 0.0 ? 0.0 : 1.0;
  } else {
    r.p_value = 1.0 - normal_cdf(s.mean / r.std_error);
  }
  return r;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: empty samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

namespace {
double ks_coefficient(double alpha) {
  // c(alpha) = sqrt(-ln(alpha/2)/2), the Kolmogorov tail inverse.
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("ks alpha must be in (0,1)");
  return std::sqrt(-0.5 * std::log(0.5 * alpha));
}
}  // namespace

double ks_critical(std::size_t n, double alpha) {
  return ks_coefficient(alpha) / std::sqrt(static_cast<double>(n));
}

double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha) {
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return ks_coefficient(alpha) * std::sqrt((nn + mm) / (nn * mm));
}

double chi_square_uniformity(std::span<const double> samples, std::size_t bins) {
  if (samples.empty()) throw std::invalid_argument("chi_square_uniformity: empty samples");
  if (bins < 2) throw std::invalid_argument("chi_square_uniformity: need at least 2 bins");
  std::vector<double> counts(bins, 0.0);
  for (double u : samples) {
    if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("chi_square_uniformity: sample outside [0,1)");
    counts[std::min(bins - 1, static_cast<std::size_t>(u * static_cast<double>(bins)))] += 1.0;
  }
  const double expected = static_cast<double>(samples.size()) / static_cast<double>(bins);
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  return chi2;
}

namespace {

// Asymptotic P(A^2 < z), Marsaglia & Marsaglia (2004), "Evaluating the
// Anderson-Darling distribution", adinf().
double ad_inf_cdf(double z) {
  if (z < 2.0) {
    return std::exp(-1.2337141 / z) / std::sqrt(z) *
           (2.00012 + (0.247105 - (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * z) * z) * z) * z) * z);
  }
  return std::exp(-std::exp(1.0776 - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * z) * z) * z) * z) * z));
}

}  // namespace

AndersonDarling anderson_darling(std::vector<double> samples,
                                 const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("anderson_darling: empty samples");
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  const double eps = std::numeric_limits<double>::min();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double fi = std::clamp(cdf(samples[i]), eps, 1.0 - 1e-16);
    const double fr = std::clamp(cdf(samples[n - 1 - i]), eps, 1.0 - 1e-16);
    s += (2.0 * static_cast<double>(i) + 1.0) * (std::log(fi) + std::log1p(-fr));
  }
  const double nn = static_cast<double>(n);
  AndersonDarling out;
  out.statistic = -nn - s / nn;
  out.p_value = out.statistic <= 0.0 ? 1.0 : 1.0 - ad_inf_cdf(out.statistic);
  return out;
}

}  // namespace wsl
