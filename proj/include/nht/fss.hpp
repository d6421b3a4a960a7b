#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nht {

enum class Observable { Lambda, ln_Lambda, ln_g };
std::string to_string(Observable o);
Observable observable_from_string(const std::string& s);

struct FssPoint {
  int L = 0;
  double W = 0.0;
  double gamma = 0.0;
  double sigma = 1.0;
};

struct FssDataset {
  std::vector<FssPoint> points;
  Observable observable = Observable::Lambda;

  /// sigma > 0, at least 2 distinct L and 4 distinct W.
  void validate() const;
  std::vector<int> sizes() const;
};

struct ExpansionOrder {
  int m1 = 1, n1 = 1, m2 = 0, n2 = 0;

  void validate() const;
  bool irrelevant() const { return n2 >= 1; }
  /// Number of free parameters after the gauge choice b_{1,1} = b_{2,0} = 1.
  int n_params() const;
  std::string str() const;
};

/// u1(w) = w + sum_{j=2}^{m1} b1[j] w^j, u2(w) = 1 + sum_{j=1}^{m2} b2[j] w^j,
/// F = sum a(j1, j2) phi1^j1 phi2^j2 with phi1 = u1 L^{1/nu}, phi2 = u2 L^{-y}, w = (W - Wc) / Wc.
/// b1[0], b1[1], b2[0] are stored but fixed (0, 1, 1).
struct FssParams {
  double wc = 1.0;
  double nu = 1.0;
  double y = 1.0;
  std::vector<double> b1;  // size m1 + 1
  std::vector<double> b2;  // size m2 + 1
  Eigen::MatrixXd a;       // (n1 + 1) x (n2 + 1)

  static FssParams zeros(const ExpansionOrder& order);
  /// Free parameters in a fixed order: Wc, nu, [y], b1[2..m1], [b2[1..m2]], a column-major.
  Eigen::VectorXd pack(const ExpansionOrder& order) const;
  static FssParams unpack(const ExpansionOrder& order, const Eigen::VectorXd& p);
  std::vector<std::string> names(const ExpansionOrder& order) const;
};

struct ScalingVars {
  double w, u1, u2, phi1, phi2;
};

ScalingVars scaling_vars(const FssParams& p, const ExpansionOrder& order, double L, double W);
double eval_F(const FssParams& p, const ExpansionOrder& order, double L, double W);
/// F evaluated with the irrelevant field switched off (phi2 = 0).
double eval_F_relevant(const FssParams& p, const ExpansionOrder& order, double L, double W);
/// Analytic gradient with respect to the packed free parameters.
Eigen::VectorXd grad_F(const FssParams& p, const ExpansionOrder& order, double L, double W);

struct Interval {
  double lo = 0.0, hi = 0.0;
};

struct FitResult {
  ExpansionOrder order;
  FssParams params;
  double chi2 = 0.0;
  int n_points = 0;
  int n_dof = 0;
  double gof = 0.0;
  double lambda_c = 0.0;  // F(0, 0) = a(0, 0)
  bool converged = false;
  bool degenerate = false;  // rank-deficient Jacobian at the optimum
  int starts = 0;
  int starts_converged = 0;
  // Filled by confidence_intervals.
  Interval ci_wc, ci_nu, ci_y, ci_lambda_c;
  std::vector<Interval> ci_params;
  bool ci_reliable = false;
  int ci_failed = 0;
};

struct FitOptions {
  int starts = 16;
  double jitter = 0.2;
  std::uint64_t seed = 1;
  int max_evals = 4000;
  std::optional<FssParams> init;  // otherwise the heuristic centre
  double nu0 = 1.2;
  double y0 = 2.0;
};

/// Critical-disorder guess from the crossing of the two largest-L curves.
double crossing_estimate(const FssDataset& data);

/// Least-squares for the a coefficients with the nonlinear parameters held fixed.
void solve_linear_coefficients(FssParams& p, const ExpansionOrder& order, const FssDataset& data);

double chi_square(const FssParams& p, const ExpansionOrder& order, const FssDataset& data);

FitResult fit(const FssDataset& data, const ExpansionOrder& order, const FitOptions& opt = {});

/// Single local refinement from p (used by the synthetic refits).
FitResult refine(const FssDataset& data, const ExpansionOrder& order, const FssParams& p, int max_evals = 4000);

double goodness_of_fit(double chi2, int n_dof);

struct CiOptions {
  int n_synthetic = 1000;
  std::uint64_t seed = 7;
  int workers = 1;
};

/// Percentile intervals from refits of data resampled around the fitted curve.
void confidence_intervals(FitResult& fit, const FssDataset& data, const CiOptions& opt = {});

/// Gaussian variate from a counter-based key (Box-Muller).
double normal_variate(std::uint64_t key);

struct CollapsePoint {
  int L;
  double W;
  double corrected;  // gamma - [F(phi1, phi2) - F(phi1, 0)]
  double sigma;
  double x;          // ln(L / xi), xi = xi_scale |u1|^-nu
  int branch;        // -1 for W < Wc, +1 for W > Wc, 0 at W = Wc (excluded)
};

struct CollapseResult {
  std::vector<CollapsePoint> points;
  double xi_scale = 1.0;
};

CollapseResult scaling_collapse(const FitResult& fit, const FssDataset& data, double xi_scale = 1.0);

/// RMS over the points of `b` of the vertical distance to the branch-matched piecewise-linear
/// interpolant of `a` (and vice versa), using only abscissae inside the other curve's range.
struct CollapseDistance {
  double rms = 0.0;
  double pooled_sigma = 0.0;
  int compared = 0;
};

CollapseDistance collapse_distance(const CollapseResult& a, const CollapseResult& b);

/// Golden-section search for the xi scale of `b` that minimises the distance to `a`.
double match_xi(const CollapseResult& a, const FitResult& fit_b, const FssDataset& data_b,
                double lo = 0.05, double hi = 20.0);

}  // namespace nht
