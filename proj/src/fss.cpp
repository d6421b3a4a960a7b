#include "nht/fss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <unsupported/Eigen/NonLinearOptimization>

#include "nht/rng.hpp"
#include "nht/stats.hpp"

namespace nht {

std::string to_string(Observable o) {
  switch (o) {
    case Observable::Lambda: return "Lambda";
    case Observable::ln_Lambda: return "ln_Lambda";
    case Observable::ln_g: return "ln_g";
  }
  return "?";
}

Observable observable_from_string(const std::string& s) {
  if (s == "Lambda") return Observable::Lambda;
  if (s == "ln_Lambda") return Observable::ln_Lambda;
  if (s == "ln_g") return Observable::ln_g;
  throw std::invalid_argument("unknown observable: " + s);
}

void FssDataset::validate() const {
  std::set<int> ls;
  std::set<double> ws;
  for (const auto& p : points) {
    if (!(p.sigma > 0.0)) throw std::invalid_argument("every point needs sigma > 0");
    if (p.L <= 0) throw std::invalid_argument("system sizes must be positive");
    if (!std::isfinite(p.gamma)) throw std::invalid_argument("non-finite observable");
    ls.insert(p.L);
    ws.insert(p.W);
  }
  if (ls.size() < 2) throw std::invalid_argument("need at least two system sizes");
  if (ws.size() < 4) throw std::invalid_argument("need at least four disorder values");
}

std::vector<int> FssDataset::sizes() const {
  std::set<int> ls;
  for (const auto& p : points) ls.insert(p.L);
  return {ls.begin(), ls.end()};
}

void ExpansionOrder::validate() const {
  if (m1 < 1 || n1 < 1 || m2 < 0 || n2 < 0) throw std::invalid_argument("invalid expansion order");
}

int ExpansionOrder::n_params() const {
  const int irr = irrelevant() ? 1 : 0;
  return 2 + irr + (m1 - 1) + irr * m2 + (n1 + 1) * (n2 + 1);
}

std::string ExpansionOrder::str() const {
  std::ostringstream os;
  os << "(" << m1 << "," << n1 << "," << m2 << "," << n2 << ")";
  return os.str();
}

FssParams FssParams::zeros(const ExpansionOrder& order) {
  FssParams p;
  p.b1.assign(static_cast<std::size_t>(order.m1 + 1), 0.0);
  p.b1[1] = 1.0;
  p.b2.assign(static_cast<std::size_t>(order.m2 + 1), 0.0);
  p.b2[0] = 1.0;
  p.a = Eigen::MatrixXd::Zero(order.n1 + 1, order.n2 + 1);
  return p;
}

Eigen::VectorXd FssParams::pack(const ExpansionOrder& order) const {
  Eigen::VectorXd v(order.n_params());
  int k = 0;
  v[k++] = wc;
  v[k++] = nu;
  if (order.irrelevant()) v[k++] = y;
  for (int j = 2; j <= order.m1; ++j) v[k++] = b1[static_cast<std::size_t>(j)];
  if (order.irrelevant())
    for (int j = 1; j <= order.m2; ++j) v[k++] = b2[static_cast<std::size_t>(j)];
  for (int c = 0; c <= order.n2; ++c)
    for (int r = 0; r <= order.n1; ++r) v[k++] = a(r, c);
  return v;
}

FssParams FssParams::unpack(const ExpansionOrder& order, const Eigen::VectorXd& v) {
  FssParams p = zeros(order);
  int k = 0;
  p.wc = v[k++];
  p.nu = v[k++];
  if (order.irrelevant()) p.y = v[k++];
  for (int j = 2; j <= order.m1; ++j) p.b1[static_cast<std::size_t>(j)] = v[k++];
  if (order.irrelevant())
    for (int j = 1; j <= order.m2; ++j) p.b2[static_cast<std::size_t>(j)] = v[k++];
  for (int c = 0; c <= order.n2; ++c)
    for (int r = 0; r <= order.n1; ++r) p.a(r, c) = v[k++];
  return p;
}

std::vector<std::string> FssParams::names(const ExpansionOrder& order) const {
  std::vector<std::string> out{"Wc", "nu"};
  if (order.irrelevant()) out.push_back("y");
  for (int j = 2; j <= order.m1; ++j) out.push_back("b1_" + std::to_string(j));
  if (order.irrelevant())
    for (int j = 1; j <= order.m2; ++j) out.push_back("b2_" + std::to_string(j));
  for (int c = 0; c <= order.n2; ++c)
    for (int r = 0; r <= order.n1; ++r) out.push_back("a_" + std::to_string(r) + "_" + std::to_string(c));
  return out;
}

ScalingVars scaling_vars(const FssParams& p, const ExpansionOrder& order, double L, double W) {
  ScalingVars s{};
  s.w = (W - p.wc) / p.wc;
  double wp = s.w;
  s.u1 = 0.0;
  for (int j = 1; j <= order.m1; ++j, wp *= s.w) s.u1 += p.b1[static_cast<std::size_t>(j)] * wp;
  s.u2 = 0.0;
  wp = 1.0;
  for (int j = 0; j <= order.m2; ++j, wp *= s.w) s.u2 += p.b2[static_cast<std::size_t>(j)] * wp;
  s.phi1 = s.u1 * std::pow(L, 1.0 / p.nu);
  s.phi2 = order.irrelevant() ? s.u2 * std::pow(L, -p.y) : 0.0;
  return s;
}

namespace {

double poly_F(const Eigen::MatrixXd& a, double phi1, double phi2) {
  double f = 0.0;
  double p2 = 1.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c, p2 *= phi2) {
    double p1 = 1.0;
    for (Eigen::Index r = 0; r < a.rows(); ++r, p1 *= phi1) f += a(r, c) * p1 * p2;
  }
  return f;
}

}  // namespace

double eval_F(const FssParams& p, const ExpansionOrder& order, double L, double W) {
  const ScalingVars s = scaling_vars(p, order, L, W);
  return poly_F(p.a, s.phi1, s.phi2);
}

double eval_F_relevant(const FssParams& p, const ExpansionOrder& order, double L, double W) {
  const ScalingVars s = scaling_vars(p, order, L, W);
  return poly_F(p.a, s.phi1, 0.0);
}

Eigen::VectorXd grad_F(const FssParams& p, const ExpansionOrder& order, double L, double W) {
  const ScalingVars s = scaling_vars(p, order, L, W);
  const bool irr = order.irrelevant();
  const double lnu = std::pow(L, 1.0 / p.nu);
  const double ly = irr ? std::pow(L, -p.y) : 0.0;
  const double logL = std::log(L);

  double dphi1 = 0.0, dphi2 = 0.0;
  {
    double p2 = 1.0;
    for (int c = 0; c <= order.n2; ++c, p2 *= s.phi2) {
      double p1 = 1.0;
      for (int r = 1; r <= order.n1; ++r, p1 *= s.phi1) dphi1 += r * p.a(r, c) * p1 * p2;
    }
    double p1 = 1.0;
    for (int r = 0; r <= order.n1; ++r, p1 *= s.phi1) {
      double q2 = 1.0;
      for (int c = 1; c <= order.n2; ++c, q2 *= s.phi2) dphi2 += c * p.a(r, c) * p1 * q2;
    }
  }
  double du1 = 0.0, du2 = 0.0, wp = 1.0;
  for (int j = 1; j <= order.m1; ++j, wp *= s.w) du1 += j * p.b1[static_cast<std::size_t>(j)] * wp;
  wp = 1.0;
  for (int j = 1; j <= order.m2; ++j, wp *= s.w) du2 += j * p.b2[static_cast<std::size_t>(j)] * wp;
  const double dw = -W / (p.wc * p.wc);

  Eigen::VectorXd g(order.n_params());
  int k = 0;
  g[k++] = dphi1 * du1 * dw * lnu + (irr ? dphi2 * du2 * dw * ly : 0.0);
  g[k++] = dphi1 * s.phi1 * logL * (-1.0 / (p.nu * p.nu));
  if (irr) g[k++] = dphi2 * (-logL) * s.phi2;
  wp = s.w * s.w;
  for (int j = 2; j <= order.m1; ++j, wp *= s.w) g[k++] = dphi1 * wp * lnu;
  if (irr) {
    wp = s.w;
    for (int j = 1; j <= order.m2; ++j, wp *= s.w) g[k++] = dphi2 * wp * ly;
  }
  double p2 = 1.0;
  for (int c = 0; c <= order.n2; ++c, p2 *= s.phi2) {
    double p1 = 1.0;
    for (int r = 0; r <= order.n1; ++r, p1 *= s.phi1) g[k++] = p1 * p2;
  }
  return g;
}

double chi_square(const FssParams& p, const ExpansionOrder& order, const FssDataset& data) {
  double c = 0.0;
  for (const auto& pt : data.points) {
    const double r = (pt.gamma - eval_F(p, order, pt.L, pt.W)) / pt.sigma;
    c += r * r;
  }
  return c;
}

double goodness_of_fit(double chi2, int n_dof) { return chi2_upper_tail(chi2, static_cast<double>(n_dof)); }

double crossing_estimate(const FssDataset& data) {
  const auto ls = data.sizes();
  if (ls.size() < 2) throw std::invalid_argument("need two sizes for a crossing");
  const int la = ls[ls.size() - 1], lb = ls[ls.size() - 2];
  std::vector<std::pair<double, double>> ca, cb;
  for (const auto& p : data.points) {
    if (p.L == la) ca.emplace_back(p.W, p.gamma);
    if (p.L == lb) cb.emplace_back(p.W, p.gamma);
  }
  std::sort(ca.begin(), ca.end());
  std::sort(cb.begin(), cb.end());
  auto interp = [](const std::vector<std::pair<double, double>>& c, double w) {
    if (w <= c.front().first) return c.front().second;
    if (w >= c.back().first) return c.back().second;
    auto it = std::lower_bound(c.begin(), c.end(), std::make_pair(w, -std::numeric_limits<double>::infinity()));
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    return lo.second + (hi.second - lo.second) * (w - lo.first) / (hi.first - lo.first);
  };
  double best_w = ca.front().first, best_d = std::numeric_limits<double>::infinity();
  double prev_w = 0.0, prev_d = 0.0;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    const double w = ca[i].first;
    const double d = ca[i].second - interp(cb, w);
    if (i > 0 && ((prev_d < 0.0) != (d < 0.0))) return prev_w + (w - prev_w) * prev_d / (prev_d - d);
    if (std::abs(d) < best_d) {
      best_d = std::abs(d);
      best_w = w;
    }
    prev_w = w;
    prev_d = d;
  }
  return best_w;
}

void solve_linear_coefficients(FssParams& p, const ExpansionOrder& order, const FssDataset& data) {
  const int na = (order.n1 + 1) * (order.n2 + 1);
  const Eigen::Index n = static_cast<Eigen::Index>(data.points.size());
  Eigen::MatrixXd x(n, na);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& pt = data.points[static_cast<std::size_t>(i)];
    const ScalingVars s = scaling_vars(p, order, pt.L, pt.W);
    int k = 0;
    double p2 = 1.0;
    for (int c = 0; c <= order.n2; ++c, p2 *= s.phi2) {
      double p1 = 1.0;
      for (int r = 0; r <= order.n1; ++r, p1 *= s.phi1) x(i, k++) = p1 * p2 / pt.sigma;
    }
    rhs[i] = pt.gamma / pt.sigma;
  }
  const Eigen::VectorXd sol = x.colPivHouseholderQr().solve(rhs);
  int k = 0;
  for (int c = 0; c <= order.n2; ++c)
    for (int r = 0; r <= order.n1; ++r) p.a(r, c) = sol[k++];
}

namespace {

// Internal coordinates: nu and y enter through their logarithms so they stay positive.
struct Coordinates {
  const ExpansionOrder& order;

  Eigen::VectorXd to_internal(const FssParams& p) const {
    Eigen::VectorXd v = p.pack(order);
    v[1] = std::log(p.nu);
    if (order.irrelevant()) v[2] = std::log(p.y);
    return v;
  }
  FssParams from_internal(const Eigen::VectorXd& x) const {
    Eigen::VectorXd v = x;
    v[1] = std::exp(x[1]);
    if (order.irrelevant()) v[2] = std::exp(x[2]);
    return FssParams::unpack(order, v);
  }
};

struct Residuals {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const FssDataset& data;
  Coordinates coords;

  int inputs() const { return coords.order.n_params(); }
  int values() const { return static_cast<int>(data.points.size()); }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    if (!(x[0] > 0.0) || !std::isfinite(x[1]) || std::abs(x[1]) > 5.0) {
      f.setConstant(1e10);
      return 0;
    }
    const FssParams p = coords.from_internal(x);
    for (int i = 0; i < values(); ++i) {
      const auto& pt = data.points[static_cast<std::size_t>(i)];
      f[i] = (eval_F(p, coords.order, pt.L, pt.W) - pt.gamma) / pt.sigma;
    }
    return 0;
  }

  int df(const Eigen::VectorXd& x, Eigen::MatrixXd& j) const {
    const FssParams p = coords.from_internal(x);
    for (int i = 0; i < values(); ++i) {
      const auto& pt = data.points[static_cast<std::size_t>(i)];
      Eigen::VectorXd g = grad_F(p, coords.order, pt.L, pt.W);
      g[1] *= p.nu;
      if (coords.order.irrelevant()) g[2] *= p.y;
      j.row(i) = g.transpose() / pt.sigma;
    }
    return 0;
  }
};

struct LocalResult {
  Eigen::VectorXd x;
  double chi2 = std::numeric_limits<double>::infinity();
  bool ok = false;
};

double chi2_internal(const Residuals& r, const Eigen::VectorXd& x) {
  Eigen::VectorXd f(r.values());
  r(x, f);
  return f.squaredNorm();
}

LocalResult run_lm(const Residuals& r, Eigen::VectorXd x, int max_evals) {
  Residuals functor = r;
  Eigen::LevenbergMarquardt<Residuals> lm(functor);
  lm.parameters.maxfev = max_evals;
  lm.parameters.ftol = 1e-14;
  lm.parameters.xtol = 1e-14;
  lm.parameters.gtol = 0.0;
  const auto status = lm.minimize(x);
  LocalResult out;
  out.x = x;
  out.chi2 = chi2_internal(r, x);
  using namespace Eigen::LevenbergMarquardtSpace;
  out.ok = std::isfinite(out.chi2) && out.chi2 < 1e19 && status != TooManyFunctionEvaluation &&
           status != ImproperInputParameters;
  return out;
}

double simplex_objective(const gsl_vector* v, void* ctx) {
  const auto* r = static_cast<const Residuals*>(ctx);
  Eigen::VectorXd x(static_cast<Eigen::Index>(v->size));
  for (std::size_t i = 0; i < v->size; ++i) x[static_cast<Eigen::Index>(i)] = gsl_vector_get(v, i);
  const double c = chi2_internal(*r, x);
  return std::isfinite(c) ? c : 1e300;
}

LocalResult run_simplex(const Residuals& r, const Eigen::VectorXd& x0) {
  const std::size_t dim = static_cast<std::size_t>(x0.size());
  gsl_multimin_function fn{&simplex_objective, dim, const_cast<Residuals*>(&r)};
  gsl_vector* x = gsl_vector_alloc(dim);
  gsl_vector* step = gsl_vector_alloc(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    gsl_vector_set(x, i, x0[static_cast<Eigen::Index>(i)]);
    gsl_vector_set(step, i, 0.05 * std::abs(x0[static_cast<Eigen::Index>(i)]) + 0.01);
  }
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim);
  gsl_multimin_fminimizer_set(s, &fn, x, step);
  for (int it = 0; it < 20000; ++it) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-10) == GSL_SUCCESS) break;
  }
  LocalResult out;
  out.x.resize(x0.size());
  for (std::size_t i = 0; i < dim; ++i) out.x[static_cast<Eigen::Index>(i)] = gsl_vector_get(s->x, i);
  out.chi2 = s->fval;
  out.ok = std::isfinite(out.chi2) && out.chi2 < 1e299;
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(step);
  gsl_vector_free(x);
  return out;
}

// LM, with a simplex pass when LM stalls; then a second LM pass as the convergence test.
LocalResult local_fit(const Residuals& r, const Eigen::VectorXd& x0, int max_evals, bool& converged) {
  LocalResult a = run_lm(r, x0, max_evals);
  if (!a.ok) {
    LocalResult s = run_simplex(r, x0);
    if (s.ok) a = run_lm(r, s.x, max_evals);
  }
  converged = false;
  if (a.ok) {
    const LocalResult b = run_lm(r, a.x, max_evals);
    if (b.ok) {
      converged = std::abs(b.chi2 - a.chi2) <= 1e-10 * std::max(1.0, a.chi2);
      if (b.chi2 <= a.chi2) a = b;
    }
  }
  return a;
}

FitResult finish(const FssDataset& data, const ExpansionOrder& order, const Residuals& r, const LocalResult& best,
                 bool converged) {
  FitResult out;
  out.order = order;
  out.params = r.coords.from_internal(best.x);
  out.chi2 = chi_square(out.params, order, data);
  out.n_points = static_cast<int>(data.points.size());
  out.n_dof = out.n_points - order.n_params();
  out.gof = out.n_dof > 0 ? goodness_of_fit(out.chi2, out.n_dof) : 0.0;
  out.lambda_c = out.params.a(0, 0);
  out.converged = converged && out.params.wc > 0.0;
  Eigen::MatrixXd jac(r.values(), r.inputs());
  r.df(best.x, jac);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(jac);
  qr.setThreshold(1e-12);
  out.degenerate = qr.rank() < r.inputs();
  return out;
}

}  // namespace

FitResult refine(const FssDataset& data, const ExpansionOrder& order, const FssParams& p, int max_evals) {
  const Residuals r{data, Coordinates{order}};
  bool conv = false;
  const LocalResult res = local_fit(r, r.coords.to_internal(p), max_evals, conv);
  FitResult out = finish(data, order, r, res, conv);
  out.starts = 1;
  out.starts_converged = conv ? 1 : 0;
  return out;
}

FitResult fit(const FssDataset& data, const ExpansionOrder& order, const FitOptions& opt) {
  data.validate();
  order.validate();
  if (order.n_params() >= static_cast<int>(data.points.size()))
    throw std::invalid_argument("more parameters than data points");

  FssParams centre;
  if (opt.init) {
    centre = *opt.init;
  } else {
    centre = FssParams::zeros(order);
    centre.wc = crossing_estimate(data);
    centre.nu = opt.nu0;
    centre.y = opt.y0;
  }

  const Residuals r{data, Coordinates{order}};
  LocalResult best;
  bool best_conv = false;
  int n_conv = 0;
  const int starts = std::max(1, opt.starts);
  for (int s = 0; s < starts; ++s) {
    FssParams p = centre;
    if (s > 0) {
      auto jit = [&](int c) {
        return 1.0 + opt.jitter * (2.0 * uniform01(hash_words({opt.seed, static_cast<std::uint64_t>(s),
                                                               static_cast<std::uint64_t>(c)})) - 1.0);
      };
      p.wc *= jit(0);
      p.nu *= jit(1);
      p.y *= jit(2);
    }
    if (!opt.init || s > 0) solve_linear_coefficients(p, order, data);
    bool conv = false;
    const LocalResult res = local_fit(r, r.coords.to_internal(p), opt.max_evals, conv);
    if (conv) ++n_conv;
    // Prefer converged optima; among them the smallest chi-square.
    const bool better = (conv && !best_conv) || (conv == best_conv && res.chi2 < best.chi2);
    if (res.ok && better) {
      best = res;
      best_conv = conv;
    }
  }
  if (best.x.size() == 0) best.x = r.coords.to_internal(centre);
  FitResult out = finish(data, order, r, best, best_conv);
  out.starts = starts;
  out.starts_converged = n_conv;
  return out;
}

double normal_variate(std::uint64_t key) {
  const double u1 = uniform01(hash_words({key, 1}));
  const double u2 = uniform01(hash_words({key, 2}));
  return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(std::floor(pos));
  const double f = pos - static_cast<double>(i);
  if (i + 1 >= v.size()) return v.back();
  return v[i] + f * (v[i + 1] - v[i]);
}

}  // namespace

void confidence_intervals(FitResult& result, const FssDataset& data, const CiOptions& opt) {
  if (!result.converged) throw std::invalid_argument("confidence intervals need a converged fit");
  const ExpansionOrder order = result.order;
  const std::size_t ns = static_cast<std::size_t>(opt.n_synthetic);
  std::vector<double> model(data.points.size());
  for (std::size_t k = 0; k < data.points.size(); ++k)
    model[k] = eval_F(result.params, order, data.points[k].L, data.points[k].W);

  std::vector<FitResult> refits(ns);
  parallel_for(ns, opt.workers, [&](std::size_t s) {
    FssDataset syn = data;
    for (std::size_t k = 0; k < syn.points.size(); ++k)
      syn.points[k].gamma = model[k] + syn.points[k].sigma * normal_variate(hash_words({opt.seed, s, k}));
    refits[s] = refine(syn, order, result.params);
  });

  const int np = order.n_params();
  std::vector<std::vector<double>> cols(static_cast<std::size_t>(np));
  std::vector<double> lc;
  int failed = 0;
  for (const auto& f : refits) {
    if (!f.converged) {
      ++failed;
      continue;
    }
    const Eigen::VectorXd v = f.params.pack(order);
    for (int i = 0; i < np; ++i) cols[static_cast<std::size_t>(i)].push_back(v[i]);
    lc.push_back(f.lambda_c);
  }
  result.ci_failed = failed;
  result.ci_reliable = static_cast<double>(failed) <= 0.05 * static_cast<double>(ns);
  result.ci_params.clear();
  if (lc.empty()) return;
  for (const auto& c : cols) result.ci_params.push_back({percentile(c, 0.025), percentile(c, 0.975)});
  result.ci_wc = result.ci_params[0];
  result.ci_nu = result.ci_params[1];
  if (order.irrelevant()) result.ci_y = result.ci_params[2];
  result.ci_lambda_c = {percentile(lc, 0.025), percentile(lc, 0.975)};
}

CollapseResult scaling_collapse(const FitResult& fit, const FssDataset& data, double xi_scale) {
  CollapseResult out;
  out.xi_scale = xi_scale;
  for (const auto& pt : data.points) {
    const ScalingVars s = scaling_vars(fit.params, fit.order, pt.L, pt.W);
    CollapsePoint c;
    c.L = pt.L;
    c.W = pt.W;
    c.sigma = pt.sigma;
    c.corrected = pt.gamma - (eval_F(fit.params, fit.order, pt.L, pt.W) -
                              eval_F_relevant(fit.params, fit.order, pt.L, pt.W));
    c.branch = s.w > 0.0 ? 1 : (s.w < 0.0 ? -1 : 0);
    c.x = c.branch == 0 || s.u1 == 0.0
              ? std::numeric_limits<double>::quiet_NaN()
              : std::log(static_cast<double>(pt.L)) - std::log(xi_scale) + fit.params.nu * std::log(std::abs(s.u1));
    if (!std::isfinite(c.x)) c.branch = 0;
    out.points.push_back(c);
  }
  return out;
}

namespace {

void one_way(const CollapseResult& ref, const CollapseResult& probe, double& ss, double& var, int& count) {
  for (int br : {-1, 1}) {
    std::vector<std::pair<double, double>> curve;
    for (const auto& p : ref.points)
      if (p.branch == br) curve.emplace_back(p.x, p.corrected);
    if (curve.size() < 2) continue;
    std::sort(curve.begin(), curve.end());
    for (const auto& p : probe.points) {
      if (p.branch != br || p.x < curve.front().first || p.x > curve.back().first) continue;
      auto it = std::lower_bound(curve.begin(), curve.end(),
                                 std::make_pair(p.x, -std::numeric_limits<double>::infinity()));
      double y;
      if (it == curve.begin()) {
        y = it->second;
      } else {
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        y = hi.first == lo.first ? 0.5 * (hi.second + lo.second)
                                 : lo.second + (hi.second - lo.second) * (p.x - lo.first) / (hi.first - lo.first);
      }
      const double d = p.corrected - y;
      ss += d * d;
      var += p.sigma * p.sigma;
      ++count;
    }
  }
}

}  // namespace

CollapseDistance collapse_distance(const CollapseResult& a, const CollapseResult& b) {
  double ss = 0.0, var = 0.0;
  int count = 0;
  one_way(a, b, ss, var, count);
  one_way(b, a, ss, var, count);
  CollapseDistance d;
  d.compared = count;
  if (count == 0) {
    d.rms = std::numeric_limits<double>::infinity();
    return d;
  }
  d.rms = std::sqrt(ss / count);
  d.pooled_sigma = std::sqrt(var / count);
  return d;
}

double match_xi(const CollapseResult& a, const FitResult& fit_b, const FssDataset& data_b, double lo, double hi) {
  // Require a usable overlap: at least a quarter of the probe points must be compared.
  const int need = std::max(4, static_cast<int>(data_b.points.size()) / 4);
  auto cost = [&](double lx) {
    const auto d = collapse_distance(a, scaling_collapse(fit_b, data_b, std::exp(lx)));
    return d.compared >= need ? d.rms : std::numeric_limits<double>::infinity();
  };
  const double la = std::log(lo), lb = std::log(hi);
  const int grid = 120;
  int best = 0;
  double best_c = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) {
    const double c = cost(la + (lb - la) * i / grid);
    if (c < best_c) {
      best_c = c;
      best = i;
    }
  }
  double x0 = la + (lb - la) * std::max(0, best - 1) / grid;
  double x3 = la + (lb - la) * std::min(grid, best + 1) / grid;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = x3 - phi * (x3 - x0), x2 = x0 + phi * (x3 - x0);
  double f1 = cost(x1), f2 = cost(x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      x3 = x2;
      x2 = x1;
      f2 = f1;
      x1 = x3 - phi * (x3 - x0);
      f1 = cost(x1);
    } else {
      x0 = x1;
      x1 = x2;
      f1 = f2;
      x2 = x0 + phi * (x3 - x0);
      f2 = cost(x2);
    }
  }
  const double xm = 0.5 * (x0 + x3);
  return cost(xm) <= best_c ? std::exp(xm) : std::exp(la + (lb - la) * best / grid);
}

}  // namespace nht
