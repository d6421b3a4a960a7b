#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nht/model.hpp"
#include "nht/scatter.hpp"
#include "nht/transfer.hpp"

namespace nht {

enum class Relation {
  transfer_transpose,          // sigma_y M^T sigma_y = M^-1 per layer
  transfer_adjoint,            // sigma_y M^dagger sigma_y = M^-1 per layer (Hermitian)
  transfer_transpose_pair,     // sigma_y M^T(H) sigma_y = M^-1(H^T) per layer
  transfer_pseudo_hermitian,   // (sigma_y x eta) M^dagger(E) (sigma_y x eta') = M^-1(E*)
  lyapunov_pairing,            // gamma_k = -gamma_{2n+1-k} in one realization
  lyapunov_transpose_pairing,  // gamma_k(H) = -gamma_{2n+1-k}(H^T)
  lyapunov_conjugate_energy,   // gamma_k(E) = -gamma_{2n+1-k}(E*)
  lyapunov_gauge,              // spectrum unchanged by the U(1) gauge fix
  lyapunov_tilde,              // metric-weighted transfer matrices give the same spectrum
  bipartite_swap,              // E = 0: Wr <-> Wi rotation leaves the spectrum unchanged
  s_symmetric,                 // S = S^T
  s_transpose_pair,            // S^T(H) = S(H^T)
  s_unitary,                   // S^dagger S = 1
  s_paired_unitary,            // r^dagger(H) r(H^dagger) + t^dagger(H) t(H^dagger) = 1
  s_pseudo_unitary,            // S^dagger(E) S(E*) = 1 with metric-weighted transfer matrices
  g_reciprocal,                // g_L = g_R
  g_flux_reciprocal,           // g_L(Phi) = g_R(-Phi)
};

std::string to_string(Relation r);

struct SymmetryReport {
  Relation relation;
  std::string model;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  bool expect_pass = true;  // false for relations the model is known to break
  std::uint64_t spec_hash = 0;
  std::uint64_t seed = 0;
};

/// Hash of every ModelSpec field except the seed.
std::uint64_t spec_hash(const ModelSpec& spec);

/// Per-layer algebraic identities of the transfer matrix.
SymmetryReport check_transfer_identity(const ModelSpec& spec, Relation relation, double tol = 1e-12);

/// Anderson / Hatano-Nelson: pairing inside one realization.
/// U(1) / Peierls: pairing of H against H^T. Pseudo-Hermitian: E against E*.
SymmetryReport check_transposition_pairing(const ModelSpec& spec, double rel_tol = 1e-8);

/// E = 0 only; throws std::invalid_argument otherwise.
SymmetryReport check_bipartite_swap(const ModelSpec& spec, double tol = 1e-10);

/// Lyapunov spectrum with and without the U(1) gauge fix (exact finite-Lz route).
SymmetryReport check_gauge_invariance(const ModelSpec& spec, double tol = 1e-10);

/// Metric-weighted layers diag(1, eta_{iz+1}) M_iz diag(1, eta_iz).
std::vector<Eigen::MatrixXcd> tilde_layers(const ModelSpec& spec);
SymmetryReport check_tilde_spectrum(const ModelSpec& spec, double tol = 1e-8);

/// Scattering relations; each builds the partner matrix it needs.
SymmetryReport check_scattering(const ModelSpec& spec, Relation relation, double tol = 1e-8,
                                const ScatterOptions& opt = {});

/// g_L(Phi) against g_R(-Phi) on the same realization.
SymmetryReport check_peierls_reciprocity(const ModelSpec& spec, double tol = 1e-8);

/// All relations that apply to spec.kind.
std::vector<SymmetryReport> verify_all(const ModelSpec& spec);

}  // namespace nht
