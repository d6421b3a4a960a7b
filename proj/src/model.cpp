#include "nht/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nht/rng.hpp"

namespace nht {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double frac(double x) {
  double f = x - std::floor(x);
  return f >= 1.0 ? 0.0 : f;
}

cd phase(double turns) { return std::polar(1.0, two_pi * turns); }

// Periodic wrap is only applied for three or more sites; for two sites it would
// double the single bond.
int next_site(int i, int len, Boundary bc) {
  if (i + 1 < len) return i + 1;
  if (bc == Boundary::periodic && len > 2) return 0;
  return -1;
}

bool uses_phases(ModelKind kind) { return kind == ModelKind::u1 || kind == ModelKind::peierls; }

cd hopping(const ModelSpec& spec, const DisorderField& field, const std::vector<double>& theta,
           std::size_t s) {
  switch (spec.kind) {
    case ModelKind::pseudo_hermitian:
      return {0.0, 1.0};
    case ModelKind::u1:
    case ModelKind::peierls:
      return field.has_phases() ? phase(theta[s]) : cd{1.0, 0.0};
    default:
      return {1.0, 0.0};
  }
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::anderson: return "anderson";
    case ModelKind::u1: return "u1";
    case ModelKind::peierls: return "peierls";
    case ModelKind::hatano_nelson: return "hatano_nelson";
    case ModelKind::pseudo_hermitian: return "pseudo_hermitian";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "anderson") return ModelKind::anderson;
  if (name == "u1") return ModelKind::u1;
  if (name == "peierls") return ModelKind::peierls;
  if (name == "hatano_nelson") return ModelKind::hatano_nelson;
  if (name == "pseudo_hermitian") return ModelKind::pseudo_hermitian;
  throw std::invalid_argument("unknown model kind: " + name);
}

std::string to_string(Boundary bc) { return bc == Boundary::periodic ? "periodic" : "open"; }

Boundary boundary_from_string(const std::string& name) {
  if (name == "periodic") return Boundary::periodic;
  if (name == "open") return Boundary::open;
  throw std::invalid_argument("unknown boundary condition: " + name);
}

void ModelSpec::validate() const {
  if (lx < 1 || ly < 1 || lz < 1) throw std::invalid_argument("lattice dimensions must be positive");
  if (!(wr >= 0.0) || !(wi >= 0.0)) throw std::invalid_argument("disorder widths must be non-negative");
  if (kind == ModelKind::hatano_nelson) {
    if (lx != 1 || ly != 1) throw std::invalid_argument("Hatano-Nelson chain needs lx = ly = 1");
    if (wi != 0.0) throw std::invalid_argument("Hatano-Nelson chain takes real disorder only");
  }
  if (kind == ModelKind::pseudo_hermitian && wi != 0.0)
    throw std::invalid_argument("pseudo-Hermitian test model takes real disorder only");
  if (kind == ModelKind::peierls && flux.den <= 0)
    throw std::invalid_argument("flux denominator must be positive");
}

DisorderField sample_disorder(const ModelSpec& spec, int first_layer, int layers) {
  spec.validate();
  if (layers < 0) layers = spec.lz - first_layer;
  if (first_layer < 0 || layers < 0 || first_layer + layers > spec.lz)
    throw std::out_of_range("layer range outside the lattice");

  DisorderField f;
  f.lx = spec.lx;
  f.ly = spec.ly;
  f.first_layer = first_layer;
  f.layers = layers;
  const std::size_t n = static_cast<std::size_t>(spec.n());
  const std::size_t count = n * static_cast<std::size_t>(layers);
  const std::uint64_t base = static_cast<std::uint64_t>(first_layer) * n;
  f.eps.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::uint64_t site = base + k;
    double re = spec.wr > 0.0 ? (site_uniform(spec.seed, Stream::real_potential, site) - 0.5) * spec.wr : 0.0;
    double im = spec.wi > 0.0 ? (site_uniform(spec.seed, Stream::imag_potential, site) - 0.5) * spec.wi : 0.0;
    f.eps[k] = {re, im};
  }

  if (spec.kind == ModelKind::u1) {
    f.theta_x.resize(count);
    f.theta_y.resize(count);
    f.theta_z.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
      const std::uint64_t site = base + k;
      f.theta_x[k] = site_uniform(spec.seed, Stream::bond_x, site);
      f.theta_y[k] = site_uniform(spec.seed, Stream::bond_y, site);
      f.theta_z[k] = site_uniform(spec.seed, Stream::bond_z, site);
    }
  } else if (spec.kind == ModelKind::peierls) {
    f.theta_x.assign(count, 0.0);
    f.theta_y.assign(count, 0.0);
    f.theta_z.resize(count);
    const std::int64_t den = spec.flux.den;
    for (int iz = 0; iz < layers; ++iz)
      for (int iy = 0; iy < spec.ly; ++iy)
        for (int ix = 0; ix < spec.lx; ++ix) {
          // Reduce the numerator exactly before converting to turns.
          std::int64_t k = (spec.flux.num * (ix + 1)) % den;
          if (k < 0) k += den;
          f.theta_z[f.index(ix, iy, first_layer + iz)] = static_cast<double>(k) / static_cast<double>(den);
        }
  }
  return f;
}

DisorderField gauge_fix_u1(const DisorderField& field, std::vector<double>* phase_in) {
  DisorderField out = field;
  if (!field.has_phases()) return out;
  const int n = field.n();
  std::vector<double> phi(static_cast<std::size_t>(n), 0.0);
  if (phase_in && phase_in->size() == phi.size()) phi = *phase_in;

  for (int iz = field.first_layer; iz < field.first_layer + field.layers; ++iz) {
    for (int iy = 0; iy < field.ly; ++iy)
      for (int ix = 0; ix < field.lx; ++ix) {
        const std::size_t s = field.index(ix, iy, iz);
        const std::size_t local = static_cast<std::size_t>(iy * field.lx + ix);
        // theta' = theta + phi_i - phi_j; the wrap bond is included even when unused.
        const int jx = (ix + 1) % field.lx;
        const int jy = (iy + 1) % field.ly;
        out.theta_x[s] = frac(field.theta_x[s] + phi[local] - phi[static_cast<std::size_t>(iy * field.lx + jx)]);
        out.theta_y[s] = frac(field.theta_y[s] + phi[local] - phi[static_cast<std::size_t>(jy * field.lx + ix)]);
      }
    for (int k = 0; k < n; ++k) {
      const std::size_t s = field.index(0, 0, iz) + static_cast<std::size_t>(k);
      phi[static_cast<std::size_t>(k)] = frac(phi[static_cast<std::size_t>(k)] + field.theta_z[s]);
      out.theta_z[s] = 0.0;
    }
  }
  if (phase_in) *phase_in = phi;
  return out;
}

std::vector<double> plaquette_fluxes(const DisorderField& field, Boundary bc) {
  std::vector<double> out;
  if (!field.has_phases()) return out;
  const int last = field.first_layer + field.layers;
  for (int iz = field.first_layer; iz < last; ++iz)
    for (int iy = 0; iy < field.ly; ++iy)
      for (int ix = 0; ix < field.lx; ++ix) {
        const std::size_t s = field.index(ix, iy, iz);
        const int jx = next_site(ix, field.lx, bc);
        const int jy = next_site(iy, field.ly, bc);
        const bool up = iz + 1 < last;
        if (jx >= 0 && jy >= 0) {
          out.push_back(frac(field.theta_x[s] + field.theta_y[field.index(jx, iy, iz)] -
                             field.theta_x[field.index(ix, jy, iz)] - field.theta_y[s]));
        }
        if (jy >= 0 && up) {
          out.push_back(frac(field.theta_y[s] + field.theta_z[field.index(ix, jy, iz)] -
                             field.theta_y[field.index(ix, iy, iz + 1)] - field.theta_z[s]));
        }
        if (jx >= 0 && up) {
          out.push_back(frac(field.theta_z[s] + field.theta_x[field.index(ix, iy, iz + 1)] -
                             field.theta_z[field.index(jx, iy, iz)] - field.theta_x[s]));
        }
      }
  return out;
}

SliceOperator build_slice(const ModelSpec& spec, const DisorderField& field, int iz) {
  if (iz < field.first_layer || iz >= field.first_layer + field.layers)
    throw std::out_of_range("layer outside the sampled field");
  const int n = field.n();
  SliceOperator sl;
  sl.layer = iz;

  std::vector<Eigen::Triplet<cd>> trip;
  trip.reserve(static_cast<std::size_t>(5 * n));
  for (int iy = 0; iy < field.ly; ++iy)
    for (int ix = 0; ix < field.lx; ++ix) {
      const std::size_t s = field.index(ix, iy, iz);
      const int a = iy * field.lx + ix;
      trip.emplace_back(a, a, field.eps[s]);
      const int jx = next_site(ix, field.lx, spec.bc);
      if (jx >= 0) {
        const int b = iy * field.lx + jx;
        const cd t = hopping(spec, field, field.theta_x, s);
        trip.emplace_back(a, b, t);
        trip.emplace_back(b, a, spec.kind == ModelKind::pseudo_hermitian ? t : std::conj(t));
      }
      const int jy = next_site(iy, field.ly, spec.bc);
      if (jy >= 0) {
        const int b = jy * field.lx + ix;
        const cd t = hopping(spec, field, field.theta_y, s);
        trip.emplace_back(a, b, t);
        trip.emplace_back(b, a, spec.kind == ModelKind::pseudo_hermitian ? t : std::conj(t));
      }
    }
  sl.h.resize(n, n);
  sl.h.setFromTriplets(trip.begin(), trip.end());
  sl.h.makeCompressed();

  sl.v_fwd.resize(n);
  sl.v_bwd.resize(n);
  for (int k = 0; k < n; ++k) {
    const std::size_t s = field.index(0, 0, iz) + static_cast<std::size_t>(k);
    switch (spec.kind) {
      case ModelKind::hatano_nelson:
        sl.v_fwd[k] = std::exp(-spec.g);
        sl.v_bwd[k] = std::exp(spec.g);
        break;
      case ModelKind::pseudo_hermitian:
        sl.v_fwd[k] = cd{0.0, 1.0};
        sl.v_bwd[k] = cd{0.0, 1.0};
        break;
      default: {
        const cd t = uses_phases(spec.kind) && field.has_phases() ? phase(field.theta_z[s]) : cd{1.0, 0.0};
        sl.v_fwd[k] = t;
        sl.v_bwd[k] = std::conj(t);
      }
    }
  }
  return sl;
}

Eigen::VectorXd sublattice_metric(const ModelSpec& spec, int iz) {
  Eigen::VectorXd eta(spec.n());
  for (int iy = 0; iy < spec.ly; ++iy)
    for (int ix = 0; ix < spec.lx; ++ix) eta[iy * spec.lx + ix] = on_sublattice_a(ix, iy, iz) ? 1.0 : -1.0;
  return eta;
}

Eigen::MatrixXcd dense_hamiltonian(const ModelSpec& spec, const DisorderField& field) {
  const int n = field.n();
  const int layers = field.layers;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n * layers, n * layers);
  for (int l = 0; l < layers; ++l) {
    const SliceOperator sl = build_slice(spec, field, field.first_layer + l);
    h.block(l * n, l * n, n, n) = sl.dense_h();
    if (l + 1 < layers) {
      h.block(l * n, (l + 1) * n, n, n) = sl.v_fwd.asDiagonal();
      h.block((l + 1) * n, l * n, n, n) = sl.v_bwd.asDiagonal();
    }
  }
  return h;
}

void conjugate_potentials(DisorderField& field) {
  for (auto& e : field.eps) e = std::conj(e);
}

void negate_phases(DisorderField& field) {
  for (auto* th : {&field.theta_x, &field.theta_y, &field.theta_z})
    for (auto& t : *th) t = frac(-t);
}

void bipartite_rotate(DisorderField& field) {
  for (int iz = field.first_layer; iz < field.first_layer + field.layers; ++iz)
    for (int iy = 0; iy < field.ly; ++iy)
      for (int ix = 0; ix < field.lx; ++ix) {
        auto& e = field.eps[field.index(ix, iy, iz)];
        e *= on_sublattice_a(ix, iy, iz) ? cd{0.0, 1.0} : cd{0.0, -1.0};
      }
}

Eigen::Matrix2cd hatano_nelson_factor(const ModelSpec& spec, const DisorderField& field, int iz) {
  if (spec.kind != ModelKind::hatano_nelson) throw std::invalid_argument("not a Hatano-Nelson spec");
  const SliceOperator sl = build_slice(spec, field, iz);
  const cd vf = sl.v_fwd[0];
  Eigen::Matrix2cd m;
  m << (spec.energy - field.eps[field.index(0, 0, iz)]) / vf, -1.0 / vf, sl.v_bwd[0], 0.0;
  return m;
}

}  // namespace nht
