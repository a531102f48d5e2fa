#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fnncc/errors.hpp"
#include "fnncc/grid.hpp"
#include "helpers.hpp"

using namespace fnncc;

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(Grid(Eigen::Vector3d(0.0, 0.5, 1.0)), Error);  // too short
  Eigen::VectorXd bad(4);
  bad << 0.0, 0.6, 0.5, 1.0;
  CHECK_THROWS_AS(Grid{bad}, Error);
  Eigen::VectorXd off(4);
  off << 0.1, 0.4, 0.7, 1.0;
  CHECK_THROWS_AS(Grid{off}, Error);
  CHECK(Grid::uniform(150).is_uniform());
  CHECK(Grid::uniform(150).size() == 150);
}

TEST_CASE("simpson integrates cubics exactly on a 5-point grid") {
  const Grid grid = Grid::uniform(5);
  const QuadratureRule rule = quadrature_weights(grid, QuadratureMethod::simpson);
  Eigen::VectorXd cubic(5);
  for (int i = 0; i < 5; ++i) cubic[i] = std::pow(grid[i], 3);
  CHECK(std::abs(rule.integrate(cubic) - 0.25) < 1e-12);
}

TEST_CASE("weights sum to the domain length for any grid and method") {
  for (int n : {5, 6, 150, 151}) {
    const Grid grid = Grid::uniform(n);
    for (auto method : {QuadratureMethod::simpson, QuadratureMethod::trapezoid}) {
      const QuadratureRule rule = quadrature_weights(grid, method);
      CHECK(std::abs(rule.weights.sum() - 1.0) < 1e-12);
      CHECK(rule.integrate(Eigen::VectorXd::Ones(n)) == doctest::Approx(1.0));
      CHECK(rule.weights.minCoeff() > 0.0);
    }
  }
}

TEST_CASE("simpson exactness for polynomials of degree <= 3 on uniform odd grids") {
  for (int n : {5, 9, 151}) {
    const Grid grid = Grid::uniform(n);
    const QuadratureRule rule = quadrature_weights(grid, QuadratureMethod::simpson);
    for (int degree = 0; degree <= 3; ++degree) {
      Eigen::VectorXd values(n);
      for (int i = 0; i < n; ++i) values[i] = std::pow(grid[i], degree);
      CHECK(std::abs(rule.integrate(values) - 1.0 / (degree + 1)) < 1e-12);
    }
  }
}

TEST_CASE("150-point simpson matches a dense riemann oracle on sin(2 pi t)") {
  const Grid grid = Grid::uniform(150);
  const QuadratureRule rule = quadrature_weights(grid, QuadratureMethod::simpson);
  Eigen::VectorXd values(150);
  for (int i = 0; i < 150; ++i) values[i] = std::sin(2.0 * std::numbers::pi * grid[i]);
  const double oracle =
      testing::riemann([](double t) { return std::sin(2.0 * std::numbers::pi * t); });
  CHECK(std::abs(rule.integrate(values)) < 1e-6);
  CHECK(std::abs(rule.integrate(values) - oracle) < 1e-6);
}

TEST_CASE("simpson on a non-uniform grid is refused with direction to trapezoid") {
  Eigen::VectorXd pts(5);
  pts << 0.0, 0.1, 0.5, 0.9, 1.0;
  const Grid grid(pts);
  CHECK_THROWS_WITH_AS(quadrature_weights(grid, QuadratureMethod::simpson),
                       doctest::Contains("trapezoid"), Error);
  const QuadratureRule rule = quadrature_weights(grid, QuadratureMethod::trapezoid);
  CHECK(std::abs(rule.weights.sum() - 1.0) < 1e-12);
  // trapezoid is exact for affine functions on any grid
  Eigen::VectorXd affine = 2.0 * pts.array() + 1.0;
  CHECK(rule.integrate(affine) == doctest::Approx(2.0));
}

TEST_CASE("inner products") {
  const Grid grid = Grid::uniform(150);
  const QuadratureRule rule = quadrature_weights(grid, QuadratureMethod::simpson);

  SUBCASE("<f, 0> = 0 and <1, 1> = domain length") {
    Eigen::VectorXd f(150);
    for (int i = 0; i < 150; ++i) f[i] = std::cos(3.0 * grid[i]);
    CHECK(inner_product(rule, f, Eigen::VectorXd::Zero(150)) == 0.0);
    CHECK(inner_product(rule, Eigen::VectorXd::Ones(150),
                        Eigen::VectorXd::Ones(150)) == doctest::Approx(1.0));
  }

  SUBCASE("<B2, B3> for cubic splines matches a dense riemann oracle") {
    const BSplineBasis basis(4, 8);
    const Eigen::MatrixXd design = basis.evaluate(grid);
    const double got = inner_product(rule, design.col(2), design.col(3));
    const double oracle = testing::riemann(
        [&](double t) { return basis.evaluate(t)[2] * basis.evaluate(t)[3]; },
        200000);
    CHECK(std::abs(got - oracle) < 1e-8);
  }
}
