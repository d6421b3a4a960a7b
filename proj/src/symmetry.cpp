#include "nht/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "nht/rng.hpp"

namespace nht {

namespace {

using Mat = Eigen::MatrixXcd;

Mat sigma_y(Eigen::Index n, const Eigen::VectorXd* eta = nullptr) {
  Mat s = Mat::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = eta ? (*eta)[i] : 1.0;
    s(i, n + i) = cd{0.0, -e};
    s(n + i, i) = cd{0.0, e};
  }
  return s;
}

std::uint64_t bits(double x) {
  std::uint64_t b;
  std::memcpy(&b, &x, sizeof b);
  return b;
}

SymmetryReport make(const ModelSpec& spec, Relation rel, double residual, double tol, bool expect = true) {
  SymmetryReport r;
  r.relation = rel;
  r.model = to_string(spec.kind);
  r.residual = residual;
  r.tolerance = tol;
  r.pass = residual < tol;
  r.expect_pass = expect;
  r.spec_hash = spec_hash(spec);
  r.seed = spec.seed;
  return r;
}

std::vector<double> exact(const std::vector<Mat>& layers) { return exact_spectrum(layers).gammas; }

double pair_residual(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t m = a.size();
  double res = 0.0;
  for (std::size_t k = 0; k < m; ++k) res = std::max(res, std::abs(a[k] + b[m - 1 - k]));
  return res;
}

double diff_residual(const std::vector<double>& a, const std::vector<double>& b) {
  double res = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) res = std::max(res, std::abs(a[k] - b[k]));
  return res;
}

double scale_of(const std::vector<double>& g) {
  double s = 0.0;
  for (double v : g) s = std::max(s, std::abs(v));
  return std::max(s, 1e-300);
}

bool hermitian_limit(const ModelSpec& spec) {
  return spec.wi == 0.0 && spec.energy.imag() == 0.0 && spec.kind != ModelKind::pseudo_hermitian &&
         spec.kind != ModelKind::hatano_nelson;
}

bool bipartite_lattice(const ModelSpec& spec) {
  if (spec.bc == Boundary::open) return true;
  auto ok = [](int l) { return l <= 2 || l % 2 == 0; };
  return ok(spec.lx) && ok(spec.ly);
}

bool has_lead_channel(const ModelSpec& spec) {
  return spec.energy.imag() == 0.0 && std::abs(spec.energy.real()) < 2.0;
}

}  // namespace

std::string to_string(Relation r) {
  switch (r) {
    case Relation::transfer_transpose: return "transfer_transpose";
    case Relation::transfer_adjoint: return "transfer_adjoint";
    case Relation::transfer_transpose_pair: return "transfer_transpose_pair";
    case Relation::transfer_pseudo_hermitian: return "transfer_pseudo_hermitian";
    case Relation::lyapunov_pairing: return "lyapunov_pairing";
    case Relation::lyapunov_transpose_pairing: return "lyapunov_transpose_pairing";
    case Relation::lyapunov_conjugate_energy: return "lyapunov_conjugate_energy";
    case Relation::lyapunov_gauge: return "lyapunov_gauge";
    case Relation::lyapunov_tilde: return "lyapunov_tilde";
    case Relation::bipartite_swap: return "bipartite_swap";
    case Relation::s_symmetric: return "s_symmetric";
    case Relation::s_transpose_pair: return "s_transpose_pair";
    case Relation::s_unitary: return "s_unitary";
    case Relation::s_paired_unitary: return "s_paired_unitary";
    case Relation::s_pseudo_unitary: return "s_pseudo_unitary";
    case Relation::g_reciprocal: return "g_reciprocal";
    case Relation::g_flux_reciprocal: return "g_flux_reciprocal";
  }
  return "?";
}

std::uint64_t spec_hash(const ModelSpec& s) {
  return hash_words({static_cast<std::uint64_t>(s.kind), static_cast<std::uint64_t>(s.lx),
                     static_cast<std::uint64_t>(s.ly), static_cast<std::uint64_t>(s.lz), bits(s.energy.real()),
                     bits(s.energy.imag()), bits(s.wr), bits(s.wi), static_cast<std::uint64_t>(s.bc),
                     static_cast<std::uint64_t>(s.flux.num), static_cast<std::uint64_t>(s.flux.den), bits(s.g)});
}

SymmetryReport check_transfer_identity(const ModelSpec& spec, Relation relation, double tol) {
  const Eigen::Index n = spec.n();
  const Mat id = Mat::Identity(2 * n, 2 * n);
  const Mat sy = sigma_y(n);
  const auto layers = dense_layers(spec);
  double res = 0.0;
  bool expect = true;
  switch (relation) {
    case Relation::transfer_transpose:
      expect = spec.kind == ModelKind::anderson;
      for (const auto& m : layers) res = std::max(res, max_abs(sy * m.transpose() * sy * m - id));
      break;
    case Relation::transfer_adjoint:
      expect = hermitian_limit(spec);
      for (const auto& m : layers) res = std::max(res, max_abs(sy * m.adjoint() * sy * m - id));
      break;
    case Relation::transfer_transpose_pair: {
      FieldTransform tf;
      tf.negate_phases = true;
      const auto partner = dense_layers(spec, tf);
      for (std::size_t i = 0; i < layers.size(); ++i)
        res = std::max(res, max_abs(sy * layers[i].transpose() * sy * partner[i] - id));
      break;
    }
    case Relation::transfer_pseudo_hermitian: {
      ModelSpec conj = spec;
      conj.energy = std::conj(spec.energy);
      const auto partner = dense_layers(conj);
      for (std::size_t i = 0; i < layers.size(); ++i) {
        const Eigen::VectorXd eta = sublattice_metric(spec, static_cast<int>(i));
        const Eigen::VectorXd eta_next = sublattice_metric(spec, static_cast<int>(i) + 1);
        res = std::max(res, max_abs(sigma_y(n, &eta) * layers[i].adjoint() * sigma_y(n, &eta_next) * partner[i] - id));
      }
      break;
    }
    default:
      throw std::invalid_argument("not a transfer-matrix identity: " + to_string(relation));
  }
  return make(spec, relation, res, tol, expect);
}

SymmetryReport check_transposition_pairing(const ModelSpec& spec, double rel_tol) {
  const auto g = exact(dense_layers(spec));
  switch (spec.kind) {
    case ModelKind::anderson:
    case ModelKind::hatano_nelson:
      return make(spec, Relation::lyapunov_pairing, pair_residual(g, g), rel_tol * scale_of(g),
                  spec.kind == ModelKind::anderson);
    case ModelKind::u1:
    case ModelKind::peierls: {
      FieldTransform tf;
      tf.negate_phases = true;
      const auto gt = exact(dense_layers(spec, tf));
      return make(spec, Relation::lyapunov_transpose_pairing, pair_residual(g, gt), rel_tol * scale_of(g));
    }
    case ModelKind::pseudo_hermitian: {
      ModelSpec conj = spec;
      conj.energy = std::conj(spec.energy);
      const auto gc = exact(dense_layers(conj));
      return make(spec, Relation::lyapunov_conjugate_energy, pair_residual(g, gc), rel_tol * scale_of(g));
    }
  }
  throw std::logic_error("unhandled model kind");
}

SymmetryReport check_bipartite_swap(const ModelSpec& spec, double tol) {
  if (spec.energy != cd{0.0, 0.0}) throw std::invalid_argument("the Wr <-> Wi exchange holds only at E = 0");
  if (!bipartite_lattice(spec)) throw std::invalid_argument("periodic wrap with odd width breaks the bipartition");
  FieldTransform tf;
  tf.bipartite = true;
  const auto a = exact(dense_layers(spec));
  const auto b = exact(dense_layers(spec, tf));
  return make(spec, Relation::bipartite_swap, diff_residual(a, b), tol);
}

SymmetryReport check_gauge_invariance(const ModelSpec& spec, double tol) {
  FieldTransform tf;
  tf.gauge_fix = true;
  const auto a = exact(dense_layers(spec));
  const auto b = exact(dense_layers(spec, tf));
  return make(spec, Relation::lyapunov_gauge, diff_residual(a, b), tol);
}

std::vector<Eigen::MatrixXcd> tilde_layers(const ModelSpec& spec) {
  auto layers = dense_layers(spec);
  const Eigen::Index n = spec.n();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Eigen::VectorXd eta = sublattice_metric(spec, static_cast<int>(i));
    const Eigen::VectorXd eta_next = sublattice_metric(spec, static_cast<int>(i) + 1);
    layers[i].rightCols(n) = layers[i].rightCols(n) * eta.cast<cd>().asDiagonal();
    layers[i].bottomRows(n) = eta_next.cast<cd>().asDiagonal() * layers[i].bottomRows(n);
  }
  return layers;
}

SymmetryReport check_tilde_spectrum(const ModelSpec& spec, double tol) {
  const auto a = exact(dense_layers(spec));
  const auto b = exact(tilde_layers(spec));
  return make(spec, Relation::lyapunov_tilde, diff_residual(a, b), tol);
}

SymmetryReport check_scattering(const ModelSpec& spec, Relation relation, double tol, const ScatterOptions& opt) {
  double res = 0.0;
  bool expect = true;
  switch (relation) {
    case Relation::s_symmetric: {
      expect = spec.kind == ModelKind::anderson;
      const Mat s = scattering_matrix(spec, opt).full();
      res = max_abs(s - s.transpose()) / std::max(1.0, max_abs(s));
      break;
    }
    case Relation::s_transpose_pair: {
      ScatterOptions o = opt;
      o.transform.negate_phases = !o.transform.negate_phases;
      const Mat s = scattering_matrix(spec, opt).full();
      const Mat st = scattering_matrix(spec, o).full();
      res = max_abs(s.transpose() - st) / std::max(1.0, max_abs(s));
      break;
    }
    case Relation::s_unitary: {
      expect = hermitian_limit(spec);
      const Mat s = scattering_matrix(spec, opt).full();
      res = max_abs(s.adjoint() * s - Mat::Identity(s.rows(), s.cols()));
      break;
    }
    case Relation::s_paired_unitary:
      res = conductance(spec, opt, true).paired_deficit;
      break;
    case Relation::s_pseudo_unitary: {
      ScatterOptions o = opt;
      o.tilde = true;
      ModelSpec conj = spec;
      conj.energy = std::conj(spec.energy);
      const Mat s = scattering_matrix(spec, o).full();
      const Mat sc = scattering_matrix(conj, o).full();
      res = max_abs(s.adjoint() * sc - Mat::Identity(s.rows(), s.cols()));
      break;
    }
    case Relation::g_reciprocal: {
      expect = spec.kind == ModelKind::anderson || hermitian_limit(spec);
      const auto c = conductance(spec, opt);
      res = std::abs(c.g_left - c.g_right) / std::max(1.0, c.g_left);
      break;
    }
    default:
      throw std::invalid_argument("not a scattering relation: " + to_string(relation));
  }
  return make(spec, relation, res, tol, expect);
}

SymmetryReport check_peierls_reciprocity(const ModelSpec& spec, double tol) {
  ScatterOptions plus, minus;
  minus.transform.negate_phases = true;
  const auto a = conductance(spec, plus);
  const auto b = conductance(spec, minus);
  return make(spec, Relation::g_flux_reciprocal, std::abs(a.g_left - b.g_right) / std::max(1.0, a.g_left), tol);
}

std::vector<SymmetryReport> verify_all(const ModelSpec& spec) {
  std::vector<SymmetryReport> out;
  const bool leads = has_lead_channel(spec);
  const bool herm = hermitian_limit(spec);
  switch (spec.kind) {
    case ModelKind::anderson:
      out.push_back(check_transfer_identity(spec, Relation::transfer_transpose));
      if (herm) out.push_back(check_transfer_identity(spec, Relation::transfer_adjoint));
      out.push_back(check_transposition_pairing(spec));
      if (spec.energy == cd{0.0, 0.0} && bipartite_lattice(spec)) out.push_back(check_bipartite_swap(spec));
      if (leads) {
        out.push_back(check_scattering(spec, Relation::s_symmetric));
        out.push_back(check_scattering(spec, Relation::g_reciprocal));
        out.push_back(check_scattering(spec, Relation::s_paired_unitary));
        if (herm) out.push_back(check_scattering(spec, Relation::s_unitary, 1e-10));
      }
      break;
    case ModelKind::u1:
    case ModelKind::peierls:
      out.push_back(check_transfer_identity(spec, Relation::transfer_transpose_pair));
      if (herm) out.push_back(check_transfer_identity(spec, Relation::transfer_adjoint));
      out.push_back(check_transposition_pairing(spec));
      if (spec.kind == ModelKind::u1) out.push_back(check_gauge_invariance(spec));
      if (spec.energy == cd{0.0, 0.0} && bipartite_lattice(spec)) out.push_back(check_bipartite_swap(spec));
      if (leads) {
        out.push_back(check_scattering(spec, Relation::s_transpose_pair));
        out.push_back(check_peierls_reciprocity(spec));
        out.push_back(check_scattering(spec, Relation::s_paired_unitary));
        if (herm) out.push_back(check_scattering(spec, Relation::s_unitary, 1e-10));
      }
      break;
    case ModelKind::hatano_nelson:
      out.push_back(check_transposition_pairing(spec));
      break;
    case ModelKind::pseudo_hermitian:
      out.push_back(check_transfer_identity(spec, Relation::transfer_pseudo_hermitian));
      out.push_back(check_transposition_pairing(spec));
      out.push_back(check_tilde_spectrum(spec));
      if (std::abs(spec.energy.real()) < 2.0) out.push_back(check_scattering(spec, Relation::s_pseudo_unitary));
      break;
  }
  return out;
}

}  // namespace nht
