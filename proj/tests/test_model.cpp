#include <doctest.h>

#include <cmath>

#include "nht/model.hpp"
#include "nht/rng.hpp"

using namespace nht;

namespace {

ModelSpec cube(ModelKind kind, int L, int lz, double wr, double wi, std::uint64_t seed) {
  ModelSpec s;
  s.kind = kind;
  s.lx = s.ly = L;
  s.lz = lz;
  s.wr = wr;
  s.wi = wi;
  s.seed = seed;
  s.flux = {1, 4};
  return s;
}

double frac(double x) { return x - std::floor(x); }

}  // namespace

TEST_CASE("counter-based generator is a pure function of its key") {
  CHECK(site_uniform(7, Stream::real_potential, 11) == site_uniform(7, Stream::real_potential, 11));
  CHECK(site_uniform(7, Stream::real_potential, 11) != site_uniform(7, Stream::imag_potential, 11));
  CHECK(hash_words({1, 2}) != hash_words({2, 1}));
  double lo = 1.0, hi = 0.0, sum = 0.0;
  for (std::uint64_t k = 0; k < 100000; ++k) {
    const double u = uniform01(k);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("disorder is reproducible and bounded") {
  const ModelSpec s = cube(ModelKind::u1, 4, 6, 6.0, 2.0, 42);
  const DisorderField a = sample_disorder(s), b = sample_disorder(s);
  CHECK(a.eps == b.eps);
  CHECK(a.theta_z == b.theta_z);
  for (const cd& e : a.eps) {
    CHECK(std::abs(e.real()) <= 3.0);
    CHECK(std::abs(e.imag()) <= 1.0);
  }
  for (double t : a.theta_x) CHECK((t >= 0.0 && t < 1.0));
  ModelSpec other = s;
  other.seed = 43;
  CHECK(sample_disorder(other).eps != a.eps);
}

TEST_CASE("a layer chunk reproduces the same sites as the full field") {
  const ModelSpec s = cube(ModelKind::u1, 3, 10, 5.0, 5.0, 9);
  const DisorderField all = sample_disorder(s);
  const DisorderField part = sample_disorder(s, 4, 3);
  for (int iz = 4; iz < 7; ++iz)
    for (int iy = 0; iy < 3; ++iy)
      for (int ix = 0; ix < 3; ++ix) {
        CHECK(part.eps[part.index(ix, iy, iz)] == all.eps[all.index(ix, iy, iz)]);
        CHECK(part.theta_y[part.index(ix, iy, iz)] == all.theta_y[all.index(ix, iy, iz)]);
      }
}

TEST_CASE("model invariants are validated") {
  ModelSpec hn = cube(ModelKind::hatano_nelson, 2, 10, 4.0, 0.0, 1);
  CHECK_THROWS_AS(hn.validate(), std::invalid_argument);
  hn.lx = hn.ly = 1;
  CHECK_NOTHROW(hn.validate());
  hn.wi = 1.0;
  CHECK_THROWS_AS(hn.validate(), std::invalid_argument);
  ModelSpec ph = cube(ModelKind::pseudo_hermitian, 2, 4, 3.0, 1.0, 1);
  CHECK_THROWS_AS(ph.validate(), std::invalid_argument);
  ModelSpec bad = cube(ModelKind::anderson, 0, 4, 3.0, 1.0, 1);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  ModelSpec neg = cube(ModelKind::anderson, 2, 4, -1.0, 1.0, 1);
  CHECK_THROWS_AS(neg.validate(), std::invalid_argument);
}

TEST_CASE("Hamiltonian symmetries") {
  SUBCASE("Anderson is complex symmetric") {
    const ModelSpec s = cube(ModelKind::anderson, 3, 4, 5.0, 5.0, 3);
    const Eigen::MatrixXcd h = dense_hamiltonian(s, sample_disorder(s));
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("U(1) with real disorder is Hermitian but not symmetric") {
    const ModelSpec s = cube(ModelKind::u1, 3, 4, 5.0, 0.0, 3);
    const Eigen::MatrixXcd h = dense_hamiltonian(s, sample_disorder(s));
    CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() > 0.1);
  }
  SUBCASE("negating phases transposes the U(1) Hamiltonian") {
    const ModelSpec s = cube(ModelKind::u1, 3, 4, 5.0, 2.0, 3);
    DisorderField f = sample_disorder(s);
    const Eigen::MatrixXcd h = dense_hamiltonian(s, f);
    negate_phases(f);
    CHECK((dense_hamiltonian(s, f) - h.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("conjugating potentials gives the adjoint") {
    const ModelSpec s = cube(ModelKind::peierls, 4, 4, 5.0, 2.0, 3);
    DisorderField f = sample_disorder(s);
    const Eigen::MatrixXcd h = dense_hamiltonian(s, f);
    conjugate_potentials(f);
    CHECK((dense_hamiltonian(s, f) - h.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("pseudo-Hermitian test model satisfies eta H eta = H^dagger") {
    ModelSpec s = cube(ModelKind::pseudo_hermitian, 4, 4, 5.0, 0.0, 3);
    const Eigen::MatrixXcd h = dense_hamiltonian(s, sample_disorder(s));
    Eigen::VectorXd eta(h.rows());
    for (int iz = 0; iz < s.lz; ++iz) eta.segment(iz * s.n(), s.n()) = sublattice_metric(s, iz);
    const Eigen::MatrixXcd lhs = eta.asDiagonal() * h * eta.asDiagonal();
    CHECK((lhs - h.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() > 0.5);
  }
}

TEST_CASE("sublattice parity counts from one") {
  CHECK_FALSE(on_sublattice_a(0, 0, 0));
  CHECK(on_sublattice_a(1, 0, 0));
  CHECK(on_sublattice_a(0, 1, 1) == on_sublattice_a(1, 0, 1));
}

TEST_CASE("Peierls phases thread the requested flux") {
  ModelSpec s = cube(ModelKind::peierls, 4, 3, 1.0, 0.0, 5);
  s.bc = Boundary::open;
  const DisorderField f = sample_disorder(s);
  for (int iz = 0; iz + 1 < s.lz; ++iz)
    for (int iy = 0; iy < 4; ++iy)
      for (int ix = 0; ix + 1 < 4; ++ix) {
        const double phi = f.theta_z[f.index(ix, iy, iz)] - f.theta_z[f.index(ix + 1, iy, iz)];
        CHECK(frac(phi + 1e-12) == doctest::Approx(frac(-0.25 + 1e-12)).epsilon(1e-12));
      }
}

TEST_CASE("U(1) gauge fix keeps every plaquette flux") {
  for (Boundary bc : {Boundary::periodic, Boundary::open}) {
    ModelSpec s = cube(ModelKind::u1, 4, 5, 5.0, 5.0, 17);
    s.bc = bc;
    const DisorderField f = sample_disorder(s);
    const DisorderField g = gauge_fix_u1(f);
    for (double t : g.theta_z) CHECK(std::abs(std::remainder(t, 1.0)) < 1e-12);
    const auto pf = plaquette_fluxes(f, bc), pg = plaquette_fluxes(g, bc);
    REQUIRE(pf.size() == pg.size());
    REQUIRE(!pf.empty());
    for (std::size_t i = 0; i < pf.size(); ++i) CHECK(std::abs(std::remainder(pf[i] - pg[i], 1.0)) < 1e-12);
  }
}

TEST_CASE("gauge fix of chunks equals gauge fix of the whole bar") {
  const ModelSpec s = cube(ModelKind::u1, 3, 8, 5.0, 5.0, 21);
  const DisorderField whole = gauge_fix_u1(sample_disorder(s));
  std::vector<double> phase;
  gauge_fix_u1(sample_disorder(s, 0, 5), &phase);  // advances the carried phase
  const DisorderField b = gauge_fix_u1(sample_disorder(s, 5, 3), &phase);
  for (int iz = 5; iz < 8; ++iz)
    for (int iy = 0; iy < 3; ++iy)
      for (int ix = 0; ix < 3; ++ix) {
        CHECK(std::abs(std::remainder(b.theta_x[b.index(ix, iy, iz)] - whole.theta_x[whole.index(ix, iy, iz)], 1.0)) < 1e-12);
        CHECK(std::abs(std::remainder(b.theta_y[b.index(ix, iy, iz)] - whole.theta_y[whole.index(ix, iy, iz)], 1.0)) < 1e-12);
      }
}

TEST_CASE("bipartite rotation multiplies potentials by +-i") {
  const ModelSpec s = cube(ModelKind::anderson, 2, 3, 5.0, 3.0, 2);
  const DisorderField f = sample_disorder(s);
  DisorderField g = f;
  bipartite_rotate(g);
  for (int iz = 0; iz < 3; ++iz)
    for (int iy = 0; iy < 2; ++iy)
      for (int ix = 0; ix < 2; ++ix) {
        const std::size_t i = f.index(ix, iy, iz);
        const cd factor = on_sublattice_a(ix, iy, iz) ? cd{0.0, 1.0} : cd{0.0, -1.0};
        CHECK(std::abs(g.eps[i] - factor * f.eps[i]) < 1e-15);
      }
}

TEST_CASE("slice operator layout") {
  ModelSpec s = cube(ModelKind::anderson, 3, 2, 0.0, 0.0, 1);
  const SliceOperator sl = build_slice(s, sample_disorder(s), 0);
  const Eigen::MatrixXcd h = sl.dense_h();
  // Clean periodic 3x3 layer: every site has four unit neighbours.
  for (Eigen::Index i = 0; i < h.rows(); ++i) CHECK(h.row(i).cwiseAbs().sum() == doctest::Approx(4.0));
  s.bc = Boundary::open;
  const Eigen::MatrixXcd ho = build_slice(s, sample_disorder(s), 0).dense_h();
  CHECK(ho.row(4).cwiseAbs().sum() == doctest::Approx(4.0));  // centre
  CHECK(ho.row(0).cwiseAbs().sum() == doctest::Approx(2.0));  // corner
  // Two sites per direction: no double bond from the periodic wrap.
  ModelSpec two = cube(ModelKind::anderson, 2, 2, 0.0, 0.0, 1);
  const Eigen::MatrixXcd h2 = build_slice(two, sample_disorder(two), 0).dense_h();
  CHECK(h2.row(0).cwiseAbs().sum() == doctest::Approx(2.0));
}
