#pragma once

// Independent upper-tail chi-square probability Q(k/2, x/2) in long double:
// power series below a + 1, Lentz continued fraction above.
#include <cmath>

namespace oracle {

inline long double gamma_q(long double a, long double x) {
  if (x <= 0.0L) return 1.0L;
  const long double lg = std::lgamma(a);
  if (x < a + 1.0L) {
    long double term = 1.0L / a, sum = term;
    for (int n = 1; n < 100000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-21L) break;
    }
    return 1.0L - sum * std::exp(-x + a * std::log(x) - lg);
  }
  const long double tiny = 1e-4000L;
  long double b = x + 1.0L - a, c = 1.0L / tiny, d = 1.0L / b, h = d;
  for (int i = 1; i < 100000; ++i) {
    const long double an = -i * (i - a);
    b += 2.0L;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0L / d;
    const long double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0L) < 1e-21L) break;
  }
  return std::exp(-x + a * std::log(x) - lg) * h;
}

inline double chi2_q(double chi2, double dof) {
  return static_cast<double>(gamma_q(0.5L * dof, 0.5L * chi2));
}

}  // namespace oracle
