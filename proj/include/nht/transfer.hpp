#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "nht/model.hpp"

namespace nht {

/// Dense layer transfer matrix [[V_f^-1 (E - H), -V_f^-1], [V_b, 0]].
struct TransferMatrix {
  Eigen::MatrixXcd m;
};

TransferMatrix build_transfer(const SliceOperator& slice, cd energy);

/// Field rewrites applied to every generated layer.
struct FieldTransform {
  bool conjugate = false;    // H -> H^dagger
  bool negate_phases = false;  // H -> H^T for phase models
  bool bipartite = false;    // E = 0 sublattice rotation
  bool gauge_fix = false;    // U(1): remove z-bond phases
};

/// Generates the slices of one realization layer by layer, so long bars never
/// materialise the whole field. The U(1) gauge phase is carried across layers.
class SliceStream {
 public:
  SliceStream(const ModelSpec& spec, FieldTransform transform = {});
  /// Slice at the next layer; throws past the last layer.
  SliceOperator next();
  /// Layer that next() will return.
  int layer() const { return layer_; }
  const ModelSpec& spec() const { return spec_; }

 private:
  ModelSpec spec_;
  FieldTransform tf_;
  int layer_ = 0;
  std::vector<double> gauge_;
};

/// Applies one layer to the 2n x k block X = [X_top; X_bot] in place: O(n k).
template <class Scalar>
struct LayerKernel {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Eigen::SparseMatrix<Scalar, Eigen::RowMajor> h;
  Vec inv_fwd;
  Vec bwd;
  Scalar energy;
  Vec eta_next;  // optional tilde rescaling of the bottom block (empty = none)
  Vec eta_this;

  static LayerKernel from_slice(const SliceOperator& sl, cd energy);
  void apply(Mat& x) const;
};

/// Accumulated QR factorisation of a transfer-matrix product.
template <class Scalar>
struct PropagationStateT {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat q;                       // 2n x k orthonormal block
  Eigen::VectorXd logsum;      // accumulated log|R_jj|, one per column
  long layers_done = 0;
  int since_qr = 0;
  std::vector<Eigen::VectorXd> windows;  // per-window logsum increments
  Eigen::VectorXd window_start;
  long window_layers = 0;

  PropagationStateT(int two_n, int k);
  /// Re-orthonormalises and accumulates; throws OverflowError if norms left the safe range
  /// or the interval was long enough to cancel more than eight digits of a kept direction.
  void reorthonormalize();
};

using PropagationState = PropagationStateT<cd>;

struct OverflowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Advances by one layer; QR every q_interval layers.
template <class Scalar>
void propagate(PropagationStateT<Scalar>& state, const LayerKernel<Scalar>& layer, int q_interval);

enum class Channels { half, full };

struct LyapunovOptions {
  int q_interval = 4;
  Channels channels = Channels::half;
  double target_rel_se = 0.0;  // 0 disables early stopping
  long max_lz = 0;             // 0 means spec.lz
  long window = 0;             // 0 picks min(1000, max_lz/100) rounded to q
  int min_windows = 100;
  FieldTransform transform{};
  bool allow_real = true;
};

struct LyapunovSpectrum {
  std::vector<double> gammas;  // descending
  std::vector<double> se;
  long lz_used = 0;
  int q_used = 0;
  double gamma1 = 0.0;  // smallest positive exponent
  double gamma1_se = 0.0;
  double lambda = 0.0;  // 1 / gamma1
  double Lambda = 0.0;  // lambda / L
  double Lambda_se = 0.0;
  bool converged = false;
  bool delocalized = false;  // gamma1 within 2 se of zero
  std::vector<int> degenerate;  // indices i with |g_i - g_{i+1}| below the pairing tolerance
};

/// Production estimate: one forward pass from an identity start, gauge-fixed for U(1).
LyapunovSpectrum lyapunov_spectrum(const ModelSpec& spec, LyapunovOptions opt = {});

struct NormalizedLength {
  double Lambda;
  double se;
  LyapunovSpectrum spectrum;
};

NormalizedLength normalized_loc_length(const ModelSpec& spec, LyapunovOptions opt = {});

/// Exact finite-Lz spectrum ln(sigma_i(M))/Lz of the full product (2n values, descending).
/// Alternating sweeps with M and M^dagger refine the accumulated QR basis until the
/// log-sums stop moving, so the result equals the eigenvalues of ln(M M^dagger)/(2 Lz).
struct ExactOptions {
  int q_interval = 1;
  int max_sweeps = 400;
  double tol = 1e-14;
};

struct ExactSpectrum {
  std::vector<double> gammas;  // descending, length 2n
  int sweeps = 0;
  bool converged = false;
};

ExactSpectrum exact_spectrum(const std::vector<Eigen::MatrixXcd>& layers, ExactOptions opt = {});

/// Dense layer matrices of one realization (small instances).
std::vector<Eigen::MatrixXcd> dense_layers(const ModelSpec& spec, FieldTransform transform = {});

}  // namespace nht
