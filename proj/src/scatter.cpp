#include "nht/scatter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nht/rng.hpp"

namespace nht {

namespace {

using Mat = Eigen::MatrixXcd;

void check_energy(const ModelSpec& spec, const ScatterOptions& opt) {
  // Complex energies are only meaningful for the metric-weighted construction,
  // where S(E) is paired with S(E*).
  if (!opt.tilde && spec.energy.imag() != 0.0)
    throw std::invalid_argument("conductance needs a real energy");
  if (spec.energy.imag() == 0.0 && std::abs(spec.energy.real()) >= 2.0)
    throw std::invalid_argument("no propagating lead channel for |E| >= 2");
}

// Kernel of layer iz with the right-lead contact and optional metric weights.
LayerKernel<cd> scatter_kernel(const ModelSpec& spec, const SliceOperator& sl, const ScatterOptions& opt) {
  LayerKernel<cd> k = LayerKernel<cd>::from_slice(sl, spec.energy);
  const bool last = sl.layer == spec.lz - 1;
  if (last) {
    k.inv_fwd.setOnes();
    k.bwd.setOnes();
  }
  if (opt.tilde) {
    k.eta_this = sublattice_metric(spec, sl.layer).cast<cd>();
    // The contact coupling is real, so the lead layer carries the metric of the last layer.
    k.eta_next = sublattice_metric(spec, last ? sl.layer : sl.layer + 1).cast<cd>();
  }
  return k;
}

Mat lead_basis(int n, cd e) {
  Mat r(2 * n, 2 * n);
  r << Mat::Identity(n, n), e * Mat::Identity(n, n), e * Mat::Identity(n, n), Mat::Identity(n, n);
  return r;
}

}  // namespace

Eigen::MatrixXcd SMatrix::full() const {
  const Eigen::Index n = t.rows();
  Mat s(2 * n, 2 * n);
  s << r, tp, t, rp;
  return s;
}

double max_abs(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

cd lead_momentum(cd energy) { return std::acos(energy / 2.0); }

SMatrix extract_S(const Eigen::MatrixXcd& x, double* rcond) {
  const Eigen::Index n = x.rows() / 2;
  Eigen::PartialPivLU<Mat> lu(x.topLeftCorner(n, n));
  if (rcond) *rcond = lu.rcond();
  SMatrix s;
  s.t = lu.inverse();
  s.rp = -s.t * x.topRightCorner(n, n);
  s.r = x.bottomLeftCorner(n, n) * s.t;
  s.tp = x.bottomRightCorner(n, n) + x.bottomLeftCorner(n, n) * s.rp;
  return s;
}

Eigen::MatrixXcd assemble_from_S(const SMatrix& s) {
  const Eigen::Index n = s.t.rows();
  Eigen::PartialPivLU<Mat> lu(s.t);
  const Mat tinv = lu.inverse();
  Mat x(2 * n, 2 * n);
  x << tinv, -tinv * s.rp, s.r * tinv, s.tp - s.r * tinv * s.rp;
  return x;
}

SMatrix star(const SMatrix& a, const SMatrix& b) {
  const Eigen::Index n = a.t.rows();
  const Mat id = Mat::Identity(n, n);
  Eigen::PartialPivLU<Mat> k(id - b.rp * a.r);   // (1 - r'_b r_a)
  Eigen::PartialPivLU<Mat> kp(id - a.r * b.rp);  // (1 - r_a r'_b)
  SMatrix s;
  s.t = a.t * k.solve(b.t);
  s.rp = a.rp + a.t * k.solve(b.rp * a.tp);
  s.r = b.r + b.tp * kp.solve(a.r * b.t);
  s.tp = b.tp * kp.solve(a.tp);
  return s;
}

TMatrix assemble_T(const ModelSpec& spec, const ScatterOptions& opt) {
  check_energy(spec, opt);
  const int n = spec.n();
  const cd k = lead_momentum(spec.energy);
  const cd ep = std::exp(cd{0.0, 1.0} * k);
  const cd em = std::exp(cd{0.0, -1.0} * k);

  SliceStream stream(spec, opt.transform);
  Mat m = Mat::Identity(2 * n, 2 * n);
  for (int iz = 0; iz < spec.lz; ++iz) scatter_kernel(spec, stream.next(), opt).apply(m);

  Mat sy = Mat::Zero(2 * n, 2 * n);
  sy.topRightCorner(n, n).diagonal().setConstant(cd{0.0, -1.0});
  sy.bottomLeftCorner(n, n).diagonal().setConstant(cd{0.0, 1.0});
  TMatrix out;
  out.kz = k;
  out.t = lead_basis(n, em) * sy * m * lead_basis(n, ep) / (2.0 * std::sin(k));
  // Sign of the outgoing rows chosen so that a transposition-symmetric H gives S = S^T.
  out.t.bottomRows(n) *= -1.0;
  return out;
}

SMatrix scattering_matrix(const ModelSpec& spec, const ScatterOptions& opt, double* min_rcond) {
  check_energy(spec, opt);
  const int n = spec.n();
  const int q = std::max(1, opt.block_layers);
  const cd k = lead_momentum(spec.energy);
  const cd e = std::exp(cd{0.0, 1.0} * k);
  const cd norm = 1.0 / (1.0 - e * e);

  // Each block contributes R^-1 M_block R; the lead sandwich telescopes between blocks.
  SliceStream stream(spec, opt.transform);
  SMatrix total;
  bool first = true;
  double worst = 1.0;
  const Mat basis = lead_basis(n, e);
  for (int start = 0; start < spec.lz; start += q) {
    Mat p = basis;
    const int stop = std::min(spec.lz, start + q);
    for (int iz = start; iz < stop; ++iz) scatter_kernel(spec, stream.next(), opt).apply(p);
    Mat x(2 * n, 2 * n);
    x.topRows(n) = norm * (p.topRows(n) - e * p.bottomRows(n));
    x.bottomRows(n) = norm * (p.bottomRows(n) - e * p.topRows(n));
    double rc = 1.0;
    SMatrix block = extract_S(x, &rc);
    worst = std::min(worst, rc);
    total = first ? std::move(block) : star(total, block);
    first = false;
  }
  if (min_rcond) *min_rcond = worst;
  return total;
}

ConductanceSample conductance(const ModelSpec& spec, const ScatterOptions& opt, bool deficits) {
  ConductanceSample c;
  const SMatrix s = scattering_matrix(spec, opt, &c.min_rcond);
  c.g_left = s.t.squaredNorm();
  c.g_right = s.tp.squaredNorm();
  c.ln_g = std::log(c.g_left);
  if (deficits) {
    const Mat full = s.full();
    const Eigen::Index dim = full.rows();
    c.symmetry_deficit = max_abs(full - full.transpose());
    c.unitarity_deficit = max_abs(full.adjoint() * full - Mat::Identity(dim, dim));
    ScatterOptions dag = opt;
    dag.transform.conjugate = !dag.transform.conjugate;
    const SMatrix sd = scattering_matrix(spec, dag);
    const Eigen::Index n = s.t.rows();
    c.paired_deficit = max_abs(s.r.adjoint() * sd.r + s.t.adjoint() * sd.t - Mat::Identity(n, n));
  }
  return c;
}

std::uint64_t sample_seed(std::uint64_t base, std::uint64_t index) {
  return hash_words({base, 0x636f6e64ULL, index});
}

ConductanceEnsemble conductance_ensemble(const ModelSpec& spec, int n_samples, int workers,
                                         const ScatterOptions& opt, std::size_t bins,
                                         bool deficits) {
  if (n_samples < 1) throw std::invalid_argument("need at least one sample");
  ConductanceEnsemble out;
  const std::size_t count = static_cast<std::size_t>(n_samples);
  out.seeds.resize(count);
  out.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) out.seeds[i] = sample_seed(spec.seed, i);
  parallel_for(count, workers, [&](std::size_t i) {
    ModelSpec s = spec;
    s.seed = out.seeds[i];
    out.samples[i] = conductance(s, opt, deficits);
  });

  Moments lng, g;
  std::size_t tail = 0;
  for (const auto& c : out.samples) {
    lng.add(c.ln_g);
    g.add(c.g_left);
    if (c.g_left > static_cast<double>(spec.n())) ++tail;
  }
  out.mean_ln_g = lng.mean();
  out.se_ln_g = lng.std_error();
  out.mean_g = g.mean();
  out.skewness_g = g.skewness();
  out.max_g = g.max();
  out.tail_fraction = static_cast<double>(tail) / static_cast<double>(count);
  const double lo = g.min() > 0.0 ? g.min() : 1e-300;
  const double hi = std::max(g.max(), lo * 1.0001) * 1.0001;
  out.histogram = Histogram::logarithmic(lo, hi, bins);
  for (const auto& c : out.samples) out.histogram.add(c.g_left);
  return out;
}

}  // namespace nht
