#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace nht {

/// Streaming moments up to fourth order; merge() is exact, so reductions over
/// any partition of the samples agree up to rounding.
class Moments {
 public:
  void add(double x);
  void merge(const Moments& other);

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // unbiased
  double std_error() const;
  double skewness() const;  // sample g1
  double excess_kurtosis() const;  // sample g2
  double min() const { return min_; }
  double max() const { return max_; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0, m2_ = 0.0, m3_ = 0.0, m4_ = 0.0;
  double min_ = 0.0, max_ = 0.0;
};

struct Histogram {
  std::vector<double> edges;  // size bins + 1
  std::vector<std::size_t> counts;
  std::size_t underflow = 0;
  std::size_t overflow = 0;

  static Histogram linear(double lo, double hi, std::size_t bins);
  static Histogram logarithmic(double lo, double hi, std::size_t bins);
  void add(double x);
};

struct GaussianFit {
  double mean;
  double sigma;
};

/// Moment fit of a normal density (what the overlay curves use).
GaussianFit fit_gaussian(const std::vector<double>& x);

/// D'Agostino-Pearson omnibus test; returns the p-value of the normality hypothesis.
double normality_pvalue(const std::vector<double>& x);

/// Upper-tail probability Q(chi2; dof).
double chi2_upper_tail(double chi2, double dof);

/// Runs fn(i) for i in [0, count) on `workers` threads. Each index is handled by exactly
/// one call, so writing into slot i of a pre-sized vector is race free.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

/// Worker count from the NHT_WORKERS environment variable, else hardware concurrency.
int default_workers();

}  // namespace nht
