#include "doctest.h"
#include "oracles.hpp"

#include "optomech/fock.hpp"
#include "optomech/specfun.hpp"

using namespace optomech;
namespace sf = optomech::specfun;

TEST_CASE("laguerre polynomials") {
  for (double x : {0.0, 0.3, 2.5, 17.0}) CHECK(sf::laguerre(0, 0, x) == 1.0);
  CHECK(sf::laguerre(1, 0, 0.25) == doctest::Approx(0.75).epsilon(1e-15));

  const double ref = oracle::laguerre_series(5, 2, 1.7);
  CHECK(std::abs(sf::laguerre(5, 2, 1.7) - ref) <= 1e-12 * std::abs(ref));

  // 50-digit reference values.
  struct Ref {
    int n, a;
    double x, value;
  };
  static const Ref table[] = {
    {3, 0, 0.04, 0.88238933333333333333},
    {3, 0, 0.81, -0.5344235},
    {3, 0, 3.3, 1.4455},
    {3, 0, 17.5, -485.35416666666666667},
    {3, 1, 0.04, 3.7631893333333333333},
    {3, 1, 0.81, 0.3636265},
    {3, 1, 3.3, -0.0095},
    {3, 1, 17.5, -381.72916666666666667},
    {3, 4, 0.04, 34.165589333333333333},
    {3, 4, 0.81, 20.1977765},
    {3, 4, 3.3, -2.1745},
    {3, 4, 17.5, -153.85416666666666667},
    {3, 9, 0.04, 217.36958933333333333},
    {3, 9, 0.81, 170.3880265},
    {3, 9, 3.3, 61.5505},
    {3, 9, 17.5, 9.2708333333333333333},
    {8, 0, 0.04, 0.7018100857056956546},
    {8, 0, 0.81, -0.15127839992241274444},
    {8, 0, 3.3, -1.2824752073013392857},
    {8, 0, 17.5, -957.18279690212673611},
    {8, 1, 0.04, 7.6258693685245075911},
    {8, 1, 0.81, -1.7344654971127329052},
    {8, 1, 3.3, -1.1244521346227678571},
    {8, 1, 17.5, -110.03918796115451389},
    {8, 4, 0.04, 464.0508046126417434},
    {8, 4, 0.81, 94.712479683826981613},
    {8, 4, 3.3, 5.9619846584129464286},
    {8, 4, 17.5, 328.06937323676215278},
    {8, 9, 0.04, 23541.915047953839803},
    {8, 9, 0.81, 12109.738716590378756},
    {8, 9, 3.3, 228.52247289680580357},
    {8, 9, 17.5, -104.93328518337673611},
    {15, 0, 0.04, 0.47928973237140932004},
    {15, 0, 0.81, 0.45024304687330059722},
    {15, 0, 3.3, 0.76216431700475593472},
    {15, 0, 17.5, 603.7097878457297844},
    {15, 1, 0.04, 11.629045817837698761},
    {15, 1, 0.81, 0.33350938072907057615},
    {15, 1, 3.3, 2.1478060715491422888},
    {15, 1, 17.5, -281.04877866307051037},
    {15, 4, 0.04, 3432.0561117738526667},
    {15, 4, 0.81, 15.187991007190713131},
    {15, 4, 3.3, -18.981380531574278609},
    {15, 4, 17.5, 84.854374382503558913},
    {15, 9, 0.04, 1231022.0954585026058},
    {15, 9, 0.81, 337783.59842784818092},
    {15, 9, 3.3, -3062.7966569639222588},
    {15, 9, 17.5, -1564.4717108014103116},
    {30, 0, 0.04, 0.10749824089475954385},
    {30, 0, 0.81, -0.36365943348545561446},
    {30, 0, 3.3, 0.88231716787100157433},
    {30, 0, 17.5, 733.9201219057829195},
    {30, 1, 0.04, 15.677883586372177347},
    {30, 1, 0.81, 0.37796144937200309187},
    {30, 1, 3.3, 1.422520054300662304},
    {30, 1, 17.5, 660.08281672844095279},
    {30, 4, 0.04, 36266.193269449647103},
    {30, 4, 0.81, -430.77648622561863235},
    {30, 4, 3.3, 18.28423084864984924},
    {30, 4, 17.5, -1064.3530666860499263},
    {30, 9, 0.04, 187785299.48429205733},
    {30, 9, 0.81, 10614027.622134165995},
    {30, 9, 3.3, -19100.421249960639041},
    {30, 9, 17.5, -16106.109361965609154},
    {60, 0, 0.04, -0.30138676521407458715},
    {60, 0, 0.81, 0.25803290134006032952},
    {60, 0, 3.3, -0.50633198694722728316},
    {60, 0, 17.5, 500.45745134552048193},
    {60, 1, 0.04, 11.615129616383130235},
    {60, 1, 0.81, 1.840415167022159742},
    {60, 1, 3.3, 2.2556480597229197397},
    {60, 1, 17.5, 959.6630640043659147},
    {60, 4, 0.04, 384198.1694251224859},
    {60, 4, 0.81, 278.9241405397908088},
    {60, 4, 3.3, -277.98835317564372715},
    {60, 4, 17.5, -2307.7840846064949607},
    {60, 9, 0.04, 44439791666.571189058},
    {60, 9, 0.81, -100938800.62569598798},
    {60, 9, 3.3, -525479.47597597322629},
    {60, 9, 17.5, -111795.14486765112212},
  };
  for (const Ref& r : table) {
    CAPTURE(r.n);
    CAPTURE(r.a);
    CAPTURE(r.x);
    CHECK(std::abs(sf::laguerre(r.n, r.a, r.x) - r.value) <= 1e-11 * std::max(1.0, std::abs(r.value)));
    const sf::ScaledValue sv = sf::laguerre_scaled(r.n, r.a, r.x);
    CHECK(std::abs(sv.value() - r.value) <= 1e-11 * std::max(1.0, std::abs(r.value)));
  }

  // Large orders stay finite through the scaled form.
  const sf::ScaledValue big = sf::laguerre_scaled(400, 300, 0.5);
  CHECK(std::isfinite(big.mantissa));
  CHECK(big.log_scale > 100.0);

  CHECK_THROWS_AS(sf::laguerre(-1, 0, 1.0), Error);
  CHECK_THROWS_AS(sf::laguerre(2, 0, -1.0), Error);
}

TEST_CASE("terminating Tricomi function") {
  for (int b : {-3, 0, 1, 5}) CHECK(sf::tricomi_u(0.0, b, 2.2) == 1.0);
  CHECK(sf::tricomi_u(-1.0, 3.0, 1.2) == doctest::Approx(1.2 - 3.0).epsilon(1e-15));

  // U(-k, m + 1, z) = (-1)^k k! L_k^{(m)}(z)
  const double ref = 24.0 * oracle::laguerre_series(4, 2, 1.2);
  CHECK(std::abs(sf::tricomi_u(-4.0, 3.0, 1.2) - ref) <= 1e-12 * std::abs(ref));
  CHECK(sf::tricomi_poly(4, 3, 1.2) == doctest::Approx(ref).epsilon(1e-12));

  CHECK_THROWS_AS(sf::tricomi_u(-1.5, 2.0, 1.0), Error);
  CHECK_THROWS_AS(sf::tricomi_u(2.0, 2.0, 1.0), Error);
  CHECK_THROWS_AS(sf::tricomi_u(-2.0, 2.5, 1.0), Error);
}

TEST_CASE("displaced Fock elements") {
  for (int n = 0; n < 5; ++n)
    for (int k = 0; k < 5; ++k) CHECK(sf::displaced_fock_element(n, k, 0.0) == cplx(n == k ? 1.0 : 0.0));
  CHECK(std::abs(sf::displaced_fock_element(1, 1, 1.0)) < 1e-15);
  CHECK(std::abs(sf::displaced_fock_element(2, 2, 0.7) - std::exp(-0.245) * oracle::laguerre_series(2, 0, 0.49)) < 1e-14);

  const CMatrix ref = fock::displacement_operator(0.8, 30).matrix();
  CHECK(std::abs(sf::displaced_fock_element(3, 1, 0.8) - ref(3, 1)) < 1e-10);

  for (cplx f : {cplx(0.3, 0.0), cplx(0.0, 0.8), cplx(1.5, 0.0), cplx(-0.6, 1.1)}) {
    const CMatrix d = oracle::displacement(f, 21);
    const CMatrix m = sf::displaced_fock_matrix(f, 21, 21);
    double worst = 0.0;
    for (int n = 0; n <= 20; ++n)
      for (int k = 0; k <= 20; ++k) worst = std::max(worst, std::abs(sf::displaced_fock_element(n, k, f) - d(n, k)));
    CHECK(worst < 1e-10);
    CHECK((m - d).cwiseAbs().maxCoeff() < 1e-10);
  }

  // Rectangular blocks are slices of the square one.
  const CMatrix sq = sf::displaced_fock_matrix(cplx(0.9, -0.2), 30, 30);
  CHECK((sf::displaced_fock_matrix(cplx(0.9, -0.2), 12, 30) - sq.topRows(12)).norm() == 0.0);

  // Deep elements remain accurate where direct factorials overflow.
  const cplx deep = sf::displaced_fock_element(600, 550, 3.0);
  CHECK(std::isfinite(deep.real()));
  CHECK(std::abs(deep) <= 1.0);
}

TEST_CASE("coherent amplitudes and windows") {
  const cplx alpha(1.4, -2.1);
  const CVector c = sf::coherent_amplitudes(alpha, 40);
  CHECK((c - oracle::coherent_vector(alpha, 40)).cwiseAbs().maxCoeff() < 1e-14);

  const cplx big(30.0, 12.0);
  const sf::CoherentWindow w = sf::coherent_window(big, 3000);
  CHECK(w.first > 0);
  CHECK(std::abs(w.values.squaredNorm() - 1.0) < 1e-12);
  const int mid = w.first + static_cast<int>(w.values.size()) / 2;
  CHECK(std::abs(w.values(mid - w.first) - oracle::coherent(big, mid)) < 1e-13);

  const sf::CoherentWindow clip = sf::coherent_window(big, mid, mid + 4);
  REQUIRE(clip.values.size() == 5);
  CHECK(clip.first == mid);
  CHECK((clip.values - w.values.segment(mid - w.first, 5)).norm() < 1e-12 * clip.values.norm());
  CHECK(sf::coherent_window(big, 0, 10).values.size() == 0);
  CHECK(sf::coherent_window(0.0, 0, 10).values.size() == 1);
}

TEST_CASE("log factorial") {
  CHECK(sf::log_factorial(0) == 0.0);
  CHECK(sf::log_factorial(10) == doctest::Approx(std::log(3628800.0)).epsilon(1e-15));
  CHECK(sf::log_factorial(100000) == doctest::Approx(std::lgamma(100001.0)).epsilon(1e-15));
}
