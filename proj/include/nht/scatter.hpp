#pragma once

#include <vector>

#include <Eigen/Dense>

#include "nht/model.hpp"
#include "nht/stats.hpp"
#include "nht/transfer.hpp"

namespace nht {

/// Blocks of S = [[r, t'], [t, r']] mapping incoming (1, 3) to outgoing (2, 4).
struct SMatrix {
  Eigen::MatrixXcd r, tp, t, rp;

  Eigen::MatrixXcd full() const;
  int n() const { return static_cast<int>(t.rows()); }
};

struct TMatrix {
  Eigen::MatrixXcd t;
  cd kz;  // E = 2 cos kz
};

/// Lead momentum with Re k in (0, pi); conj(E) maps to conj(k).
cd lead_momentum(cd energy);

/// Splits a 2x2-block transfer-type matrix X into scattering blocks
/// (t = X11^-1, r' = -X11^-1 X12, r = X21 X11^-1, t' = X22 - X21 X11^-1 X12).
SMatrix extract_S(const Eigen::MatrixXcd& x, double* rcond = nullptr);
/// Inverse of extract_S.
Eigen::MatrixXcd assemble_from_S(const SMatrix& s);
/// Scattering matrix of X_b X_a (a acts first, i.e. sits on the left lead side).
SMatrix star(const SMatrix& a, const SMatrix& b);

struct ScatterOptions {
  int block_layers = 4;
  FieldTransform transform{};
  bool tilde = false;  // pseudo-Hermitian metric-weighted transfer matrices
};

/// Direct product route: T = (2 sin k)^-1 Z [[1, e^-ik], [e^-ik, 1]] sigma_y M [[1, e^ik], [e^ik, 1]], Z = diag(1, -1).
/// Loses accuracy once M is ill conditioned; use for small instances and cross-checks.
TMatrix assemble_T(const ModelSpec& spec, const ScatterOptions& opt = {});

/// Stable route: per-block scattering matrices combined with the star product.
/// The bond from the last layer into the right lead is a unit hopping.
SMatrix scattering_matrix(const ModelSpec& spec, const ScatterOptions& opt = {}, double* min_rcond = nullptr);

struct ConductanceSample {
  double g_left = 0.0;   // Tr t t^dagger
  double g_right = 0.0;  // Tr t' t'^dagger
  double ln_g = 0.0;
  double symmetry_deficit = 0.0;   // max |S - S^T|
  double unitarity_deficit = 0.0;  // max |S^dagger S - 1|
  double paired_deficit = 0.0;     // max |r^dagger(H) r(H^dagger) + t^dagger(H) t(H^dagger) - 1|
  double min_rcond = 1.0;
};

ConductanceSample conductance(const ModelSpec& spec, const ScatterOptions& opt = {}, bool deficits = false);

struct ConductanceEnsemble {
  std::vector<std::uint64_t> seeds;
  std::vector<ConductanceSample> samples;
  double mean_ln_g = 0.0;
  double se_ln_g = 0.0;
  double mean_g = 0.0;
  double skewness_g = 0.0;
  double max_g = 0.0;
  double tail_fraction = 0.0;  // fraction with g > n
  Histogram histogram;         // log-spaced in g
};

std::uint64_t sample_seed(std::uint64_t base, std::uint64_t index);

ConductanceEnsemble conductance_ensemble(const ModelSpec& spec, int n_samples, int workers = 1,
                                         const ScatterOptions& opt = {}, std::size_t bins = 60,
                                         bool deficits = false);

double max_abs(const Eigen::MatrixXcd& m);

}  // namespace nht
