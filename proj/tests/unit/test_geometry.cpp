#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "covstein/errors.hpp"
#include "covstein/geometry.hpp"
#include "covstein/rng.hpp"
#include "test_support.hpp"

using namespace covstein;

TEST_CASE("model parameters and validity flags") {
  const ModelParams p(2, 100, 1.0);
  CHECK(p.side() == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(p.phi() == doctest::Approx(M_PI).epsilon(1e-15));
  CHECK(p.validity().mean_formulas);
  CHECK(p.validity().variance_formulas);
  CHECK_FALSE(p.validity().theorem_V);  // 36 pi > 100
  CHECK(p.validity().theorem_S);        // 9 pi < 100

  try {
    p.require_theorem_V();
    FAIL("expected ValidityError");
  } catch (const ValidityError& e) {
    CHECK(e.inequality() == "n > 6^d*phi");
  }

  const ModelParams tight(1, 6, 1.0);  // 4 rho < 6 but 2 rho < 6 too
  CHECK(tight.validity().variance_formulas);
  const ModelParams small(1, 4, 1.0);  // 4 rho == side
  CHECK(small.validity().mean_formulas);
  CHECK_FALSE(small.validity().variance_formulas);
  try {
    small.require_variance_formulas();
    FAIL("expected ValidityError");
  } catch (const ValidityError& e) {
    CHECK(e.inequality() == "4*rho < n^(1/d)");
  }

  CHECK_THROWS_AS(ModelParams(1, 3, 1.0), DomainError);
  CHECK_THROWS_AS(ModelParams(0, 10, 1.0), DomainError);
  CHECK_THROWS_AS(ModelParams(6, 10, 1.0), DomainError);
  CHECK_NOTHROW(ModelParams(6, 10, 0.1, true));
  CHECK_THROWS_AS(ModelParams(9, 10, 0.1, true), DomainError);
  CHECK_THROWS_AS(ModelParams(2, 10, 0.0), DomainError);
  CHECK_THROWS_AS(ModelParams(2, 10, std::nan("")), DomainError);
}

TEST_CASE("toroidal metric") {
  const double side = 10.0;
  CHECK(toroidal_distance(TorusPoint{0.5}, TorusPoint{9.5}, side) == doctest::Approx(1.0));
  CHECK(toroidal_distance(TorusPoint{0.0, 0.0}, TorusPoint{9.0, 9.0}, side) ==
        doctest::Approx(std::sqrt(2.0)));
  CHECK(toroidal_distance(TorusPoint{1.0, 2.0}, TorusPoint{4.0, 6.0}, side) ==
        doctest::Approx(5.0));
  CHECK_THROWS_AS(toroidal_distance(TorusPoint{1.0}, TorusPoint{1.0, 2.0}, side),
                  DomainError);

  std::array<double, 2> disp{};
  const std::array<double, 2> a{9.5, 0.2};
  const std::array<double, 2> b{0.5, 9.7};
  toroidal_displacement(a, b, side, disp);
  CHECK(disp[0] == doctest::Approx(1.0));
  CHECK(disp[1] == doctest::Approx(-0.5));

  CHECK(wrap_coordinate(-0.25, side) == doctest::Approx(9.75));
  CHECK(wrap_coordinate(10.0, side) == 0.0);
  CHECK(wrap_coordinate(23.5, side) == doctest::Approx(3.5));
  CHECK(wrap_coordinate(-1e-18, side) < side);

  CHECK_THROWS_AS(TorusPoint({10.0}).check_inside(side), DomainError);
  CHECK_NOTHROW(TorusPoint({0.0, 9.999}).check_inside(side));
}

TEST_CASE("distance properties on random points") {
  CounterRng rng(42);
  const double side = 7.3;
  for (int t = 0; t < 500; ++t) {
    const int d = 1 + static_cast<int>(rng.below(4));
    TorusPoint x{0.0};
    TorusPoint y{0.0};
    TorusPoint s{0.0};
    std::array<double, kMaxDimension> cx{}, cy{}, cs{};
    for (int a = 0; a < d; ++a) {
      cx[static_cast<std::size_t>(a)] = side * rng.uniform01();
      cy[static_cast<std::size_t>(a)] = side * rng.uniform01();
      cs[static_cast<std::size_t>(a)] = side * rng.uniform01();
    }
    x = TorusPoint(std::span<const double>(cx.data(), static_cast<std::size_t>(d)));
    y = TorusPoint(std::span<const double>(cy.data(), static_cast<std::size_t>(d)));
    const double dxy = toroidal_distance(x, y, side);
    CHECK(dxy == doctest::Approx(toroidal_distance(y, x, side)));
    CHECK(dxy <= 0.5 * side * std::sqrt(static_cast<double>(d)) + 1e-12);
    // Translation invariance.
    TorusPoint xs = x;
    TorusPoint ys = y;
    for (int a = 0; a < d; ++a) {
      xs[a] = wrap_coordinate(x[a] + cs[static_cast<std::size_t>(a)], side);
      ys[a] = wrap_coordinate(y[a] + cs[static_cast<std::size_t>(a)], side);
    }
    CHECK(toroidal_distance(xs, ys, side) == doctest::Approx(dxy).epsilon(1e-12));
  }
}

TEST_CASE("grid index matches a brute-force scan") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    CounterRng rng(seed);
    const int d = 1 + static_cast<int>(seed % 3);
    const std::size_t n = 5 + rng.below(200);
    const double rho = 0.2 + rng.uniform01();
    const double side = std::pow(static_cast<double>(n), 1.0 / d);
    const auto config = covstein::testing::random_configuration(d, n, side, rho, seed + 99);
    CAPTURE(seed);
    for (int q = 0; q < 20; ++q) {
      std::array<double, kMaxDimension> c{};
      for (int a = 0; a < d; ++a) c[static_cast<std::size_t>(a)] = side * rng.uniform01();
      const TorusPoint center(std::span<const double>(c.data(), static_cast<std::size_t>(d)));
      for (const double r : {rho, 2.0 * rho, 3.0 * rho}) {
        std::vector<std::size_t> brute;
        for (std::size_t i = 0; i < n; ++i) {
          if (toroidal_distance2(center.coords(), config.point(i), side) <= r * r) {
            brute.push_back(i);
          }
        }
        CHECK(config.neighbors_within(center, r) == brute);
      }
    }
    CHECK_THROWS_AS(config.neighbors_within(config.point_at(0), 3.5 * rho), DomainError);
  }
}

TEST_CASE("visit_within stops early") {
  const auto config = covstein::testing::random_configuration(2, 50, 4.0, 1.0, 7);
  int calls = 0;
  const bool finished = config.visit_within(config.point(0), 3.0, [&](std::size_t, double) {
    ++calls;
    return calls < 3;
  });
  CHECK_FALSE(finished);
  CHECK(calls == 3);
}

TEST_CASE("configuration edits") {
  const auto base = covstein::testing::random_configuration(2, 10, 5.0, 1.0, 3);
  const auto added = base.with_point_added(TorusPoint{1.0, 1.0});
  CHECK(added.size() == 11);
  CHECK(added.point_at(10) == TorusPoint{1.0, 1.0});
  const auto removed = base.with_point_removed(4);
  CHECK(removed.size() == 9);
  CHECK(removed.point_at(4) == base.point_at(5));
  const auto moved = base.with_point_moved(2, TorusPoint{4.5, 0.5});
  CHECK(moved.point_at(2) == TorusPoint{4.5, 0.5});
  CHECK(moved.point_at(3) == base.point_at(3));
  CHECK_THROWS_AS(base.with_point_moved(10, TorusPoint{1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(base.with_point_added(TorusPoint{1.0}), DomainError);

  const auto shifted = base.translated(TorusPoint{4.0, 4.5});
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(shifted.point(i)[0] == doctest::Approx(wrap_coordinate(base.point(i)[0] + 4.0, 5.0)));
  }
  CHECK_THROWS_AS(PointConfiguration(2, 5.0, {1.0, 2.0, 3.0}, 1.0), DomainError);
  CHECK_THROWS_AS(PointConfiguration(2, 5.0, {1.0, 5.0}, 1.0), DomainError);
}

TEST_CASE("sampling is deterministic and in range") {
  const ModelParams params(3, 500, 0.8);
  const auto a = sample_configuration(params, 11);
  const auto b = sample_configuration(params, 11);
  const auto c = sample_configuration(params, 12);
  CHECK(a.coordinates() == b.coordinates());
  CHECK(a.coordinates() != c.coordinates());
  CHECK(a.size() == 500);
  for (const double x : a.coordinates()) {
    CHECK(x >= 0.0);
    CHECK(x < params.side());
  }
}

TEST_CASE("point dumps round-trip") {
  const ModelParams params(2, 64, 0.7);
  const auto config = sample_configuration(params, 5);

  std::stringstream csv;
  write_points_csv(config, csv);
  CHECK(csv.str().rfind("x0,x1\n", 0) == 0);
  const auto from_csv = read_points_csv(csv, params.side(), params.rho());
  CHECK(from_csv.coordinates() == config.coordinates());

  std::stringstream bin(std::ios::in | std::ios::out | std::ios::binary);
  write_points_binary(config, bin);
  CHECK(bin.str().size() == 4 + 8 + 8 + 64 * 2 * 8);
  const auto from_bin = read_points_binary(bin, params.rho());
  CHECK(from_bin.coordinates() == config.coordinates());
  CHECK(from_bin.side() == config.side());
}
