#pragma once

// Scaling function with every gauge coefficient free (b1[0] = 0 only), evaluated
// term by term; used to check the gauge-fixed parametrisation.
#include <cmath>
#include <vector>

namespace oracle {

struct FreeGaugeParams {
  double wc, nu, y;
  std::vector<double> b1, b2;            // b1[0] ignored
  std::vector<std::vector<double>> a;    // a[j1][j2]
};

inline double scaling_F(const FreeGaugeParams& p, double L, double W) {
  const double w = (W - p.wc) / p.wc;
  double u1 = 0.0, u2 = 0.0;
  for (std::size_t j = 1; j < p.b1.size(); ++j) u1 += p.b1[j] * std::pow(w, static_cast<double>(j));
  for (std::size_t j = 0; j < p.b2.size(); ++j) u2 += p.b2[j] * std::pow(w, static_cast<double>(j));
  const double phi1 = u1 * std::pow(L, 1.0 / p.nu);
  const double phi2 = u2 * std::pow(L, -p.y);
  double f = 0.0;
  for (std::size_t j1 = 0; j1 < p.a.size(); ++j1)
    for (std::size_t j2 = 0; j2 < p.a[j1].size(); ++j2)
      f += p.a[j1][j2] * std::pow(phi1, static_cast<double>(j1)) * std::pow(phi2, static_cast<double>(j2));
  return f;
}

}  // namespace oracle
