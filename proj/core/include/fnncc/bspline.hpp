#pragma once

#include <Eigen/Core>
#include <vector>

#include "fnncc/grid.hpp"

namespace fnncc {

// Clamped B-spline basis on [0, 1] with equally spaced interior knots.
// n_basis = order + number of interior knots; boundary knots carry order-fold
// multiplicity, so the basis is a partition of unity and interpolates the
// endpoints.
class BSplineBasis {
 public:
  BSplineBasis(int order, int n_basis);

  int order() const { return order_; }
  int degree() const { return order_ - 1; }
  int n_basis() const { return n_basis_; }
  const std::vector<double>& knots() const { return knots_; }

  bool operator==(const BSplineBasis& other) const {
    return order_ == other.order_ && n_basis_ == other.n_basis_;
  }

  // All basis values (or derivative values) at one point; length n_basis.
  Eigen::VectorXd evaluate(double t, int derivative = 0) const;

  // |grid| x n_basis collocation matrix.
  Eigen::MatrixXd evaluate(const Grid& grid, int derivative = 0) const;
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& points, int derivative = 0) const;

  // Roughness penalty  P_ij = \int B_i''(t) B_j''(t) dt, integrated exactly
  // with Gauss-Legendre panels per knot span (the integrand is piecewise
  // polynomial).
  Eigen::MatrixXd penalty_matrix() const;

 private:
  int find_span(double t) const;
  // Values and derivatives up to `n_ders` of the order() nonzero basis
  // functions on the span containing t.
  void ders_basis_funs(int span, double t, int n_ders, Eigen::MatrixXd& ders) const;

  int order_;
  int n_basis_;
  std::vector<double> knots_;  // length n_basis + order
};

BSplineBasis make_bspline_basis(int order, int n_basis);

}  // namespace fnncc
