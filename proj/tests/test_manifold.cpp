#include <random>

#include "doctest.h"
#include "lagot/error.hpp"
#include "lagot/manifold.hpp"

using namespace lagot;

TEST_CASE("wrap reduces each coordinate mod 1") {
  CHECK(wrap(Vec(1.25))[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(wrap(Vec(-0.1))[0] == doctest::Approx(0.9).epsilon(1e-15));
  const TorusPoint p = wrap(Vec(0.5, 2.0));
  CHECK(p[0] == 0.5);
  CHECK(p[1] == 0.0);
  CHECK(wrap(Vec(-1e-18))[0] < 1.0);
  CHECK(wrap(p.coords()) == p);
}

TEST_CASE("wrap rejects non-finite input") {
  CHECK_THROWS_AS(wrap(Vec(std::nan(""))), InvalidInput);
  CHECK_THROWS_AS(wrap(Vec(0.0, INFINITY)), InvalidInput);
}

TEST_CASE("displacement lifts through the winding") {
  Winding w0{{0, 0}, 1};
  Winding wm{{-1, 0}, 1};
  Winding wp{{1, 0}, 1};
  CHECK(displacement(wrap(Vec(0.2)), wrap(Vec(0.7)), w0).v[0] ==
        doctest::Approx(0.5));
  CHECK(displacement(wrap(Vec(0.2)), wrap(Vec(0.7)), wm).v[0] ==
        doctest::Approx(-0.5));
  CHECK(displacement(wrap(Vec(0.9)), wrap(Vec(0.1)), wp).v[0] ==
        doctest::Approx(0.2));
}

TEST_CASE("distance goes the short way around") {
  CHECK(distance(wrap(Vec(0.0)), wrap(Vec(0.4))) == doctest::Approx(0.4));
  CHECK(distance(wrap(Vec(0.0)), wrap(Vec(0.7))) == doctest::Approx(0.3));
  CHECK(distance(wrap(Vec(0.3)), wrap(Vec(0.3))) == 0.0);
  CHECK(distance(wrap(Vec(0.1, 0.9)), wrap(Vec(0.9, 0.1))) ==
        doctest::Approx(std::sqrt(0.08)));
}

TEST_CASE("distance is a metric on random triples") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int dim = 1; dim <= 2; ++dim) {
    for (int n = 0; n < 1000; ++n) {
      auto draw = [&] {
        return dim == 1 ? wrap(Vec(u(rng))) : wrap(Vec(u(rng), u(rng)));
      };
      const TorusPoint x = draw(), y = draw(), z = draw();
      CHECK(distance(x, y) == distance(y, x));
      CHECK(distance(x, x) == 0.0);
      CHECK(distance(x, z) <= distance(x, y) + distance(y, z) + 1e-15);
      if (!(x == y)) CHECK(distance(x, y) > 0.0);
    }
  }
}

TEST_CASE("wrapping a lifted displacement recovers the target") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 0; n < 200; ++n) {
    const TorusPoint x = wrap(Vec(u(rng), u(rng)));
    const TorusPoint y = wrap(Vec(u(rng), u(rng)));
    for (const Winding& w : windings_in_range(2, 2)) {
      const TorusPoint back = wrap(displacement(x, y, w).v + x.coords());
      CHECK(distance(back, y) <= 1e-12);
    }
  }
}

TEST_CASE("windings are enumerated in lexicographic order") {
  const auto ws = windings_in_range(2, 1);
  REQUIRE(ws.size() == 9);
  for (std::size_t i = 1; i < ws.size(); ++i) CHECK(ws[i - 1] < ws[i]);
  CHECK(windings_in_range(1, 2).size() == 5);
}

TEST_CASE("grid nodes and neighbors") {
  GridSpec g1(8, 1);
  CHECK(g1.size() == 8);
  CHECK(g1.node(3)[0] == doctest::Approx(0.375));
  CHECK(g1.nearest(wrap(Vec(0.99))) == 0);
  CHECK(g1.neighbor(0, 0, -1) == 7);
  GridSpec g2(4, 2);
  CHECK(g2.size() == 16);
  CHECK(g2.node(6)[0] == doctest::Approx(0.25));
  CHECK(g2.node(6)[1] == doctest::Approx(0.5));
  CHECK(g2.nearest(g2.node(13)) == 13);
  CHECK(g2.neighbor(3, 1, 1) == 0);
  CHECK(g2.neighbor(12, 0, 1) == 0);
  CHECK_THROWS_AS(GridSpec(1, 1), InvalidInput);
}
