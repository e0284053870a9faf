#include "doctest.h"
#include "oracles.hpp"

#include <random>

#include "optomech/fock.hpp"

using namespace optomech;

TEST_CASE("ladder operators") {
  const CMatrix a2 = fock::annihilation(2).matrix();
  CHECK(a2(0, 0) == cplx(0.0));
  CHECK(a2(0, 1) == cplx(1.0));
  CHECK(a2(1, 0) == cplx(0.0));
  CHECK(a2(1, 1) == cplx(0.0));
  CHECK(std::abs(fock::annihilation(3)(1, 2) - std::sqrt(2.0)) < 1e-15);
  CHECK((fock::creation(7).matrix() - fock::annihilation(7).matrix().adjoint()).norm() == 0.0);
  CHECK(fock::number(5)(3, 3) == cplx(3.0));
}

TEST_CASE("commutator corner defect") {
  const int dim = 30;
  const CMatrix c = fock::commutator(fock::annihilation(dim), fock::creation(dim)).matrix();
  for (int i = 0; i < dim - 1; ++i) CHECK(std::abs(c(i, i) - 1.0) < 1e-12);
  CHECK(std::abs(c(dim - 1, dim - 1) + 29.0) < 1e-12);
  CHECK((c - c.diagonal().asDiagonal().toDenseMatrix()).norm() < 1e-12);
}

TEST_CASE("mode tags are enforced") {
  CHECK_THROWS_AS(fock::number(4, Mode::cavity) + fock::number(4, Mode::mirror), Error);
  CHECK_THROWS_AS(fock::number(4) + fock::number(5), Error);
}

TEST_CASE("coherent states") {
  const auto vac = fock::coherent_state(0.0, 5);
  CHECK(std::abs(vac.amplitudes(0) - 1.0) < 1e-15);
  CHECK(vac.amplitudes.tail(4).norm() == 0.0);

  // Poisson weight before renormalization; the dim = 30 tail is ~1e-17.
  const auto c = fock::coherent_state(2.0, 30);
  const double poisson = std::exp(-4.0) * std::pow(4.0, 4) / 24.0;
  CHECK(std::abs(std::norm(c.amplitudes(4)) - poisson) < 1e-12);
  CHECK(std::abs(poisson - 0.1954) < 1e-4);

  double tail = 0.0;
  for (int n = 10; n < 200; ++n) tail += std::norm(oracle::coherent(2.0, n));
  CHECK(std::abs(fock::coherent_tail_mass(2.0, 10) - tail) < 1e-14);
  CHECK(tail > 1e-10);
  try {
    fock::coherent_state(2.0, 10, 1e-10);
    FAIL("expected a truncation error");
  } catch (const TruncationError& e) {
    CHECK(e.kind() == ErrorKind::truncation_insufficient);
    CHECK(fock::coherent_tail_mass(2.0, e.suggested()) < 1e-10);
    CHECK(fock::coherent_tail_mass(2.0, e.suggested() - 1) >= 1e-10);
  }
}

TEST_CASE("displacement operator") {
  CHECK((fock::displacement_operator(0.0, 6).matrix() - CMatrix::Identity(6, 6)).norm() < 1e-15);
  CHECK(std::abs(fock::displacement_operator(0.5, 25)(0, 0) - std::exp(-0.125)) < 1e-12);

  const CMatrix d = fock::displacement_operator(1.3, 40).matrix();
  CHECK((d.col(0) - oracle::coherent_vector(1.3, 40)).cwiseAbs().maxCoeff() < 1e-10);

  // Exact for the truncated generator.
  const cplx f(0.4, -0.7);
  const CMatrix a = oracle::lower(12);
  const CMatrix ref = oracle::expm(f * a.adjoint() - std::conj(f) * a);
  CHECK((fock::displacement_operator(f, 12).matrix() - ref).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(fock::unitarity_defect(fock::displacement_operator(f, 12).matrix()) < 1e-12);

  const auto gen = fock::displacement_generator(12);
  CHECK((gen->matrix(f) - ref).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(fock::displacement_generator(12) == gen);
}

TEST_CASE("tensor product") {
  const CMatrix id = fock::tensor(fock::identity(3), fock::identity(4, Mode::mirror)).matrix();
  CHECK((id - CMatrix::Identity(12, 12)).norm() == 0.0);

  const ModeOperator n_c = fock::tensor(fock::number(4), fock::identity(5, Mode::mirror));
  const BipartiteState s = BipartiteState::basis(2, 3, 4, 5);
  CHECK((n_c.matrix() * s.amplitudes() - 2.0 * s.amplitudes()).norm() < 1e-15);

  std::mt19937 rng(7);
  std::normal_distribution<double> gauss;
  CMatrix a(3, 3), b(4, 4);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = {gauss(rng), gauss(rng)};
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = {gauss(rng), gauss(rng)};
  const CMatrix t = fock::tensor(ModeOperator(a, Mode::cavity), ModeOperator(b, Mode::mirror)).matrix();
  REQUIRE(t.rows() == 12);
  std::uniform_int_distribution<int> pick3(0, 2), pick4(0, 3);
  for (int trial = 0; trial < 5; ++trial) {
    const int k = pick3(rng), kp = pick3(rng), j = pick4(rng), jp = pick4(rng);
    CHECK(std::abs(t(k * 4 + j, kp * 4 + jp) - a(k, kp) * b(j, jp)) < 1e-15);
  }
  CHECK((t - oracle::kron(a, b)).norm() < 1e-13);
}

TEST_CASE("spectral propagation") {
  const TruncationSpec tr{4, 6};
  const ModeOperator h = fock::tensor(fock::identity(4), fock::number(6, Mode::mirror));
  const BipartiteState psi0 = BipartiteState::basis(0, 1, 4, 6);
  const BipartiteState same = fock::propagate_numeric(h, psi0, 0.0);
  CHECK((same.amplitudes() - psi0.amplitudes()).norm() < 1e-15);
  const double t = 0.83;
  const BipartiteState out = fock::propagate_numeric(h, psi0, t);
  CHECK(std::abs(out.amplitude(0, 1) - std::exp(cplx(0.0, -t))) < 1e-14);
  CHECK(std::abs(out.norm() - 1.0) < 1e-14);

  // Complex Hermitian generator against the Pade exponential.
  const CMatrix a = oracle::lower(8);
  const ModeOperator g(0.3 * a.adjoint() * a + cplx(0.0, 0.2) * (a.adjoint() - a) + 0.05 * a.adjoint() * a.adjoint() * a * a +
                           cplx(0.1, 0.04) * a * a + cplx(0.1, -0.04) * a.adjoint() * a.adjoint(),
                       Mode::cavity);
  const fock::HermitianSpectrum spec = fock::diagonalize(g);
  CHECK((spec.propagator(1.7) - oracle::expm(cplx(0.0, -1.7) * g.matrix())).cwiseAbs().maxCoeff() < 1e-12);
  const fock::HermitianSpectrum gauged = fock::diagonalize(g, 1);
  CHECK((gauged.propagator(1.7) - spec.propagator(1.7)).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(fock::diagonalize(ModeOperator(a, Mode::cavity)), Error);
}

TEST_CASE("partial traces") {
  const BipartiteState prod = BipartiteState::basis(2, 3, 4, 5);
  const CMatrix rm = fock::reduced_density(prod, Mode::mirror).matrix();
  CMatrix proj = CMatrix::Zero(5, 5);
  proj(3, 3) = 1.0;
  CHECK((rm - proj).norm() < 1e-15);

  CVector bell = CVector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const DensityMatrix rc = fock::reduced_density(BipartiteState(bell, 2, 2), Mode::cavity);
  CHECK((rc.matrix() - 0.5 * CMatrix::Identity(2, 2)).norm() < 1e-15);
  CHECK(std::abs(rc.purity() - 0.5) < 1e-15);

  // Purities of both reductions of a pure state agree (same Schmidt spectrum).
  std::mt19937 rng(3);
  std::normal_distribution<double> gauss;
  CVector v(6 * 9);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = {gauss(rng), gauss(rng)};
  const BipartiteState r = BipartiteState(v, 6, 9).normalized();
  const DensityMatrix a = fock::reduced_density(r, Mode::cavity);
  const DensityMatrix b = fock::reduced_density(r, Mode::mirror);
  CHECK(a.purity() > 0.0);
  CHECK(a.purity() <= 1.0 + 1e-14);
  CHECK(std::abs(a.purity() - b.purity()) < 1e-13);
  a.validate();
  b.validate();
}

TEST_CASE("truncation diagnostics") {
  const BipartiteState top = BipartiteState::basis(3, 0, 4, 4);
  CHECK(top.top_population(Mode::cavity) == doctest::Approx(1.0));
  CHECK_THROWS_AS(fock::check_truncation(top, 1e-8, "test"), TruncationError);
  CHECK_NOTHROW(fock::check_truncation(BipartiteState::basis(1, 1, 4, 4), 1e-8, "test"));

  const BipartiteState e = fock::embed(BipartiteState::basis(1, 2, 3, 3), 5, 6);
  CHECK(e.amplitude(1, 2) == cplx(1.0));
  CHECK(std::abs(e.norm() - 1.0) < 1e-15);

  CHECK_THROWS_AS((TruncationSpec{1, 4}.validate()), Error);
  CHECK_THROWS_AS((TruncationSpec{4, 4, 2.0}.validate()), Error);
}
