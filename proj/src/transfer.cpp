#include "nht/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <type_traits>

namespace nht {

TransferMatrix build_transfer(const SliceOperator& slice, cd energy) {
  const int n = static_cast<int>(slice.v_fwd.size());
  for (int k = 0; k < n; ++k)
    if (slice.v_fwd[k] == cd{0.0, 0.0}) throw std::domain_error("singular forward coupling");
  const Eigen::VectorXcd inv = slice.v_fwd.cwiseInverse();
  TransferMatrix t;
  t.m = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  Eigen::MatrixXcd eh = -slice.dense_h();
  eh.diagonal().array() += energy;
  t.m.topLeftCorner(n, n) = inv.asDiagonal() * eh;
  t.m.topRightCorner(n, n) = -Eigen::MatrixXcd(inv.asDiagonal());
  t.m.bottomLeftCorner(n, n) = slice.v_bwd.asDiagonal();
  return t;
}

SliceStream::SliceStream(const ModelSpec& spec, FieldTransform transform) : spec_(spec), tf_(transform) {
  spec_.validate();
  if (tf_.bipartite && spec_.energy != cd{0.0, 0.0})
    throw std::invalid_argument("sublattice rotation is an identity only at E = 0");
}

SliceOperator SliceStream::next() {
  if (layer_ >= spec_.lz) throw std::out_of_range("slice stream exhausted");
  DisorderField f = sample_disorder(spec_, layer_, 1);
  if (tf_.conjugate) conjugate_potentials(f);
  if (tf_.negate_phases) negate_phases(f);
  if (tf_.bipartite) bipartite_rotate(f);
  if (tf_.gauge_fix && f.has_phases()) f = gauge_fix_u1(f, &gauge_);
  return build_slice(spec_, f, layer_++);
}

template <class Scalar>
LayerKernel<Scalar> LayerKernel<Scalar>::from_slice(const SliceOperator& sl, cd energy) {
  LayerKernel k;
  if constexpr (std::is_same_v<Scalar, double>) {
    k.h = sl.h.real();
    k.inv_fwd = sl.v_fwd.cwiseInverse().real();
    k.bwd = sl.v_bwd.real();
    k.energy = energy.real();
  } else {
    k.h = sl.h;
    k.inv_fwd = sl.v_fwd.cwiseInverse();
    k.bwd = sl.v_bwd;
    k.energy = energy;
  }
  return k;
}

template <class Scalar>
void LayerKernel<Scalar>::apply(Mat& x) const {
  const Eigen::Index n = bwd.size();
  if (eta_this.size() == n) x.bottomRows(n) = eta_this.asDiagonal() * x.bottomRows(n);
  Mat top = x.topRows(n);
  Mat next = energy * top;
  next.noalias() -= h * top;
  next -= x.bottomRows(n);
  x.topRows(n).noalias() = inv_fwd.asDiagonal() * next;
  if (eta_next.size() == n)
    x.bottomRows(n).noalias() = (eta_next.cwiseProduct(bwd)).asDiagonal() * top;
  else
    x.bottomRows(n).noalias() = bwd.asDiagonal() * top;
}

template <class Scalar>
PropagationStateT<Scalar>::PropagationStateT(int two_n, int k)
    : q(Mat::Identity(two_n, k)), logsum(Eigen::VectorXd::Zero(k)), window_start(Eigen::VectorXd::Zero(k)) {}

namespace {
constexpr double kMaxCancellation = 1e8;
}

template <class Scalar>
void PropagationStateT<Scalar>::reorthonormalize() {
  const Eigen::Index k = q.cols();
  Eigen::VectorXd norms(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    norms[j] = q.col(j).norm();
    if (!std::isfinite(norms[j]) || norms[j] > 1e250)
      throw OverflowError("transfer-matrix product overflowed between QR steps; lower q_interval");
  }
  Eigen::HouseholderQR<Mat> qr(q);
  const auto& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < k; ++j) {
    const double d = std::abs(r(j, j));
    if (!(d > 1e-290) || !std::isfinite(d))
      throw OverflowError("transfer-matrix product lost a direction between QR steps; lower q_interval");
    // A column that grew 1e8 times more than its orthogonal part keeps only ~8 digits of it.
    if (since_qr > 1 && norms[j] > kMaxCancellation * d)
      throw OverflowError("QR interval too long for the exponent spread; lower q_interval");
    logsum[j] += std::log(d);
  }
  Mat thin = Mat::Identity(q.rows(), k);
  qr.householderQ().applyThisOnTheLeft(thin);
  q.swap(thin);
  since_qr = 0;
}

template <class Scalar>
void propagate(PropagationStateT<Scalar>& state, const LayerKernel<Scalar>& layer, int q_interval) {
  layer.apply(state.q);
  ++state.layers_done;
  if (++state.since_qr >= q_interval) state.reorthonormalize();
}

template struct LayerKernel<double>;
template struct LayerKernel<cd>;
template struct PropagationStateT<double>;
template struct PropagationStateT<cd>;
template void propagate(PropagationStateT<double>&, const LayerKernel<double>&, int);
template void propagate(PropagationStateT<cd>&, const LayerKernel<cd>&, int);

namespace {

bool real_arithmetic_ok(const ModelSpec& spec, const FieldTransform& tf) {
  if (tf.conjugate && spec.wi != 0.0) return false;
  if (tf.bipartite) return false;
  if (spec.energy.imag() != 0.0) return false;
  if (spec.kind == ModelKind::anderson) return spec.wi == 0.0;
  return spec.kind == ModelKind::hatano_nelson;
}

double window_se(const std::vector<Eigen::VectorXd>& windows, Eigen::Index j, double window_len) {
  const std::size_t m = windows.size();
  if (m < 2) return std::numeric_limits<double>::infinity();
  double mean = 0.0;
  for (const auto& w : windows) mean += w[j] / window_len;
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (const auto& w : windows) {
    const double d = w[j] / window_len - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(m - 1) / static_cast<double>(m));
}

template <class Scalar>
LyapunovSpectrum run_lyapunov(const ModelSpec& spec, const LyapunovOptions& opt, int q) {
  const int n = spec.n();
  const int k = opt.channels == Channels::half ? n : 2 * n;
  const long lz = spec.lz;
  long window = opt.window;
  if (window <= 0) window = std::min<long>(1000, std::max<long>(1, lz / 100));
  window = std::max<long>(q, (window + q / 2) / q * q);

  SliceStream stream(spec, opt.transform);
  PropagationStateT<Scalar> st(2 * n, k);
  Eigen::Index track = k - 1;

  while (st.layers_done < lz) {
    const auto kernel = LayerKernel<Scalar>::from_slice(stream.next(), spec.energy);
    propagate(st, kernel, q);
    if (st.since_qr == 0 && st.layers_done % window == 0) {
      st.windows.push_back(st.logsum - st.window_start);
      st.window_start = st.logsum;
      if (opt.target_rel_se > 0.0 && static_cast<int>(st.windows.size()) >= opt.min_windows) {
        st.logsum.minCoeff(&track);
        const double g = st.logsum[track] / static_cast<double>(st.layers_done);
        const double se = window_se(st.windows, track, static_cast<double>(window));
        if (g > 0.0 && se / g <= opt.target_rel_se) break;
      }
    }
  }
  if (st.since_qr > 0) st.reorthonormalize();

  LyapunovSpectrum out;
  out.lz_used = st.layers_done;
  out.q_used = q;
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return st.logsum[a] > st.logsum[b]; });
  for (int j : order) {
    out.gammas.push_back(st.logsum[j] / static_cast<double>(st.layers_done));
    out.se.push_back(window_se(st.windows, j, static_cast<double>(window)));
  }
  const double tol = 1e-8 * std::max(1e-300, std::abs(out.gammas.front()));
  for (int i = 0; i + 1 < k; ++i)
    if (std::abs(out.gammas[static_cast<std::size_t>(i)] - out.gammas[static_cast<std::size_t>(i + 1)]) < tol)
      out.degenerate.push_back(i);

  out.gamma1 = out.gammas[static_cast<std::size_t>(n - 1)];
  out.gamma1_se = out.se[static_cast<std::size_t>(n - 1)];
  out.delocalized = !(out.gamma1 > 2.0 * out.gamma1_se);
  out.lambda = out.gamma1 > 0.0 ? 1.0 / out.gamma1 : std::numeric_limits<double>::infinity();
  out.Lambda = out.lambda / static_cast<double>(spec.lx);
  out.Lambda_se = out.gamma1 > 0.0 ? out.Lambda * out.gamma1_se / out.gamma1 : std::numeric_limits<double>::infinity();
  if (opt.target_rel_se > 0.0)
    out.converged = out.gamma1 > 0.0 && out.gamma1_se / out.gamma1 <= opt.target_rel_se;
  else
    out.converged = static_cast<int>(st.windows.size()) >= opt.min_windows;
  return out;
}

}  // namespace

LyapunovSpectrum lyapunov_spectrum(const ModelSpec& spec_in, LyapunovOptions opt) {
  ModelSpec spec = spec_in;
  if (opt.max_lz > 0) spec.lz = static_cast<int>(opt.max_lz);
  spec.validate();
  if (spec.kind == ModelKind::u1) opt.transform.gauge_fix = true;
  int q = std::max(1, opt.q_interval);
  const bool real = opt.allow_real && real_arithmetic_ok(spec, opt.transform);
  for (;;) {
    try {
      return real ? run_lyapunov<double>(spec, opt, q) : run_lyapunov<cd>(spec, opt, q);
    } catch (const OverflowError&) {
      if (q == 1) throw;
      q /= 2;
    }
  }
}

NormalizedLength normalized_loc_length(const ModelSpec& spec, LyapunovOptions opt) {
  if (spec.lx != spec.ly) throw std::invalid_argument("normalized length needs a square cross-section");
  LyapunovSpectrum s = lyapunov_spectrum(spec, opt);
  return {s.Lambda, s.Lambda_se, std::move(s)};
}

namespace {

// One pass through the product (or its adjoint in reverse), QR every q layers.
Eigen::VectorXd sweep(const std::vector<Eigen::MatrixXcd>& layers, Eigen::MatrixXcd& q, bool adjoint, int qint) {
  Eigen::VectorXd logs = Eigen::VectorXd::Zero(q.cols());
  const std::size_t lz = layers.size();
  int pending = 0;
  for (std::size_t i = 0; i < lz; ++i) {
    const auto& m = adjoint ? layers[lz - 1 - i] : layers[i];
    if (adjoint)
      q = m.adjoint() * q;
    else
      q = m * q;
    if (++pending == qint || i + 1 == lz) {
      Eigen::HouseholderQR<Eigen::MatrixXcd> qr(q);
      for (Eigen::Index j = 0; j < q.cols(); ++j) logs[j] += std::log(std::abs(qr.matrixQR()(j, j)));
      Eigen::MatrixXcd thin = Eigen::MatrixXcd::Identity(q.rows(), q.cols());
      qr.householderQ().applyThisOnTheLeft(thin);
      q.swap(thin);
      pending = 0;
    }
  }
  return logs;
}

}  // namespace

ExactSpectrum exact_spectrum(const std::vector<Eigen::MatrixXcd>& layers, ExactOptions opt) {
  if (layers.empty()) throw std::invalid_argument("empty product");
  const Eigen::Index dim = layers.front().rows();
  const double lz = static_cast<double>(layers.size());
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Identity(dim, dim);
  Eigen::VectorXd prev = sweep(layers, q, false, opt.q_interval);
  ExactSpectrum out;
  out.sweeps = 1;
  Eigen::VectorXd cur = prev;
  for (int s = 0; s < opt.max_sweeps; ++s) {
    sweep(layers, q, true, opt.q_interval);
    cur = sweep(layers, q, false, opt.q_interval);
    ++out.sweeps;
    const double scale = std::max(1.0, cur.cwiseAbs().maxCoeff());
    if ((cur - prev).cwiseAbs().maxCoeff() <= opt.tol * scale) {
      out.converged = true;
      break;
    }
    prev = cur;
  }
  for (Eigen::Index j = 0; j < dim; ++j) out.gammas.push_back(cur[j] / lz);
  std::sort(out.gammas.begin(), out.gammas.end(), std::greater<>());
  return out;
}

std::vector<Eigen::MatrixXcd> dense_layers(const ModelSpec& spec, FieldTransform transform) {
  SliceStream stream(spec, transform);
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(static_cast<std::size_t>(spec.lz));
  for (int i = 0; i < spec.lz; ++i) out.push_back(build_transfer(stream.next(), spec.energy).m);
  return out;
}

}  // namespace nht
