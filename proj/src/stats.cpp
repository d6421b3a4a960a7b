#include "nht/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <gsl/gsl_cdf.h>

namespace nht {

void Moments::add(double x) {
  Moments one;
  one.n_ = 1;
  one.mean_ = x;
  one.min_ = one.max_ = x;
  merge(one);
}

void Moments::merge(const Moments& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
  const double n = na + nb;
  const double d = o.mean_ - mean_;
  const double d2 = d * d, d3 = d2 * d, d4 = d2 * d2;
  const double mean = mean_ + d * nb / n;
  const double m2 = m2_ + o.m2_ + d2 * na * nb / n;
  const double m3 = m3_ + o.m3_ + d3 * na * nb * (na - nb) / (n * n) + 3.0 * d * (na * o.m2_ - nb * m2_) / n;
  const double m4 = m4_ + o.m4_ + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                    6.0 * d2 * (na * na * o.m2_ + nb * nb * m2_) / (n * n) + 4.0 * d * (na * o.m3_ - nb * m3_) / n;
  n_ += o.n_;
  mean_ = mean;
  m2_ = m2;
  m3_ = m3;
  m4_ = m4;
  min_ = std::min(min_, o.min_);
  max_ = std::max(max_, o.max_);
}

double Moments::variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

double Moments::std_error() const { return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

double Moments::skewness() const {
  if (n_ < 2 || m2_ <= 0.0) return 0.0;
  const double n = static_cast<double>(n_);
  return std::sqrt(n) * m3_ / std::pow(m2_, 1.5);
}

double Moments::excess_kurtosis() const {
  if (n_ < 2 || m2_ <= 0.0) return 0.0;
  const double n = static_cast<double>(n_);
  return n * m4_ / (m2_ * m2_) - 3.0;
}

Histogram Histogram::linear(double lo, double hi, std::size_t bins) {
  if (!(hi > lo) || bins == 0) throw std::invalid_argument("bad histogram range");
  Histogram h;
  for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins));
  h.counts.assign(bins, 0);
  return h;
}

Histogram Histogram::logarithmic(double lo, double hi, std::size_t bins) {
  if (!(lo > 0.0) || !(hi > lo) || bins == 0) throw std::invalid_argument("bad histogram range");
  Histogram h;
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(bins)));
  h.edges.front() = lo;
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  return h;
}

void Histogram::add(double x) {
  if (x < edges.front()) {
    ++underflow;
    return;
  }
  if (x >= edges.back()) {
    ++overflow;
    return;
  }
  const auto it = std::upper_bound(edges.begin(), edges.end(), x);
  ++counts[static_cast<std::size_t>(it - edges.begin()) - 1];
}

GaussianFit fit_gaussian(const std::vector<double>& x) {
  Moments m;
  for (double v : x) m.add(v);
  return {m.mean(), std::sqrt(m.variance())};
}

double normality_pvalue(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 20) throw std::invalid_argument("normality test needs at least 20 samples");
  Moments m;
  for (double v : x) m.add(v);
  const double b1 = m.skewness();
  const double b2 = m.excess_kurtosis() + 3.0;

  // Skewness transform.
  const double y = b1 * std::sqrt((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0)));
  const double beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0) /
                       ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
  const double w2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
  const double delta = 1.0 / std::sqrt(std::log(std::sqrt(w2)));
  const double alpha = std::sqrt(2.0 / (w2 - 1.0));
  const double ya = y / alpha;
  const double zs = delta * std::log(ya + std::sqrt(ya * ya + 1.0));

  // Kurtosis transform (Anscombe-Glynn).
  const double eb2 = 3.0 * (n - 1.0) / (n + 1.0);
  const double vb2 = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
  const double xk = (b2 - eb2) / std::sqrt(vb2);
  const double sb1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0)) *
                     std::sqrt(6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0)));
  const double a = 6.0 + 8.0 / sb1 * (2.0 / sb1 + std::sqrt(1.0 + 4.0 / (sb1 * sb1)));
  const double t = (1.0 - 2.0 / a) / (1.0 + xk * std::sqrt(2.0 / (a - 4.0)));
  const double zk = ((1.0 - 2.0 / (9.0 * a)) - std::cbrt(t)) / std::sqrt(2.0 / (9.0 * a));

  const double k2 = zs * zs + zk * zk;
  return std::exp(-0.5 * k2);
}

double chi2_upper_tail(double chi2, double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("chi-square needs positive degrees of freedom");
  if (chi2 <= 0.0) return 1.0;
  return gsl_cdf_chisq_Q(chi2, dof);
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_lock;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(error_lock);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

int default_workers() {
  if (const char* env = std::getenv("NHT_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

}  // namespace nht
