#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace nht {

using cd = std::complex<double>;

enum class ModelKind { anderson, u1, peierls, hatano_nelson, pseudo_hermitian };
enum class Boundary { periodic, open };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);
std::string to_string(Boundary bc);
Boundary boundary_from_string(const std::string& name);

/// Flux per plaquette in units of the flux quantum, kept as an exact fraction.
struct Flux {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double turns() const { return static_cast<double>(num) / static_cast<double>(den); }
  Flux negated() const { return {-num, den}; }
  bool operator==(const Flux&) const = default;
};

struct ModelSpec {
  ModelKind kind = ModelKind::anderson;
  int lx = 1;
  int ly = 1;
  int lz = 1;
  cd energy{0.0, 0.0};
  double wr = 0.0;
  double wi = 0.0;
  Boundary bc = Boundary::periodic;
  std::uint64_t seed = 0;
  Flux flux;         // Peierls only
  double g = 0.0;    // Hatano-Nelson asymmetry

  int n() const { return lx * ly; }
  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;
};

/// Site is on sublattice A when ix+iy+iz is even, counting from 1.
inline bool on_sublattice_a(int ix, int iy, int iz) { return ((ix + iy + iz + 3) & 1) == 0; }

/// On-site potentials and bond phases for a contiguous range of layers.
/// Indices are zero based; layer iz covers sites iz*n .. iz*n+n-1 relative to first_layer.
/// theta_{x,y,z}[s] is the phase (in turns) of the bond from s to its +x/+y/+z neighbour.
struct DisorderField {
  int lx = 1;
  int ly = 1;
  int first_layer = 0;
  int layers = 0;
  std::vector<cd> eps;
  std::vector<double> theta_x;
  std::vector<double> theta_y;
  std::vector<double> theta_z;

  int n() const { return lx * ly; }
  std::size_t index(int ix, int iy, int iz) const {
    return static_cast<std::size_t>(iz - first_layer) * static_cast<std::size_t>(n()) +
           static_cast<std::size_t>(iy) * static_cast<std::size_t>(lx) + static_cast<std::size_t>(ix);
  }
  bool has_phases() const { return !theta_z.empty(); }
};

/// Draws layers [first_layer, first_layer + layers) of the realization selected by spec.seed.
/// layers < 0 means all of them.
DisorderField sample_disorder(const ModelSpec& spec, int first_layer = 0, int layers = -1);

/// Removes all z-bond phases by a site-diagonal gauge transformation.
/// phase_in holds the gauge phase (turns) of the first layer; on return it holds the phase
/// of the layer after the last one, so consecutive chunks can be fixed independently.
DisorderField gauge_fix_u1(const DisorderField& field, std::vector<double>* phase_in = nullptr);

/// Plaquette fluxes (turns, reduced to [0,1)) for every xy, yz and zx plaquette inside the field.
std::vector<double> plaquette_fluxes(const DisorderField& field, Boundary bc);

struct SliceOperator {
  int layer = 0;
  Eigen::SparseMatrix<cd, Eigen::RowMajor> h;  // n x n intra-slice part
  Eigen::VectorXcd v_fwd;                       // diagonal of V_{iz,iz+1}
  Eigen::VectorXcd v_bwd;                       // diagonal of V_{iz+1,iz}

  Eigen::MatrixXcd dense_h() const { return Eigen::MatrixXcd(h); }
};

/// Builds the slice at layer iz (zero based, inside the field's layer range).
SliceOperator build_slice(const ModelSpec& spec, const DisorderField& field, int iz);

/// Diagonal of the pseudo-Hermiticity metric for layer iz (+1 on A, -1 on B).
Eigen::VectorXd sublattice_metric(const ModelSpec& spec, int iz);

/// Full lattice Hamiltonian (N x N, open along z). Intended for small instances.
Eigen::MatrixXcd dense_hamiltonian(const ModelSpec& spec, const DisorderField& field);

/// Field rewrites used by the symmetry checks; all act on one realization.
void conjugate_potentials(DisorderField& field);      // H -> H^dagger for Anderson, U(1), Peierls
void negate_phases(DisorderField& field);             // H -> H^T for U(1)/Peierls
void bipartite_rotate(DisorderField& field);          // eps -> +i eps on A, -i eps on B

/// Hatano-Nelson chain: 2x2 transfer factor of site iz.
Eigen::Matrix2cd hatano_nelson_factor(const ModelSpec& spec, const DisorderField& field, int iz);

}  // namespace nht
