#include "fnncc/bspline.hpp"

#include <algorithm>
#include <cmath>

#include "fnncc/errors.hpp"

namespace fnncc {

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

}  // namespace

BSplineBasis::BSplineBasis(int order, int n_basis)
    : order_(order), n_basis_(n_basis) {
  if (order < 1) {
    throw Error(ErrorCode::config, "spline order must be at least 1");
  }
  if (n_basis < order) {
    throw Error(ErrorCode::config, "n_basis must be at least the spline order");
  }
  const int n_interior = n_basis - order;
  knots_.resize(static_cast<std::size_t>(n_basis + order));
  for (int i = 0; i < order; ++i) {
    knots_[static_cast<std::size_t>(i)] = 0.0;
    knots_[static_cast<std::size_t>(n_basis + order - 1 - i)] = 1.0;
  }
  for (int i = 0; i < n_interior; ++i) {
    knots_[static_cast<std::size_t>(order + i)] =
        static_cast<double>(i + 1) / static_cast<double>(n_interior + 1);
  }
}

BSplineBasis make_bspline_basis(int order, int n_basis) {
  return BSplineBasis(order, n_basis);
}

int BSplineBasis::find_span(double t) const {
  const int p = degree();
  const int n = n_basis_ - 1;
  if (t >= knots_[static_cast<std::size_t>(n + 1)]) return n;
  if (t <= knots_[static_cast<std::size_t>(p)]) return p;
  int lo = p;
  int hi = n + 1;
  int mid = (lo + hi) / 2;
  while (t < knots_[static_cast<std::size_t>(mid)] ||
         t >= knots_[static_cast<std::size_t>(mid + 1)]) {
    if (t < knots_[static_cast<std::size_t>(mid)]) {
      hi = mid;
    } else {
      lo = mid;
    }
    mid = (lo + hi) / 2;
  }
  return mid;
}

// Piegl & Tiller A2.3: values and derivatives of the nonzero basis functions.
void BSplineBasis::ders_basis_funs(int span, double t, int n_ders,
                                   Eigen::MatrixXd& ders) const {
  const int p = degree();
  Eigen::MatrixXd ndu(p + 1, p + 1);
  std::vector<double> left(static_cast<std::size_t>(p + 1));
  std::vector<double> right(static_cast<std::size_t>(p + 1));

  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[static_cast<std::size_t>(j)] = t - knots_[static_cast<std::size_t>(span + 1 - j)];
    right[static_cast<std::size_t>(j)] = knots_[static_cast<std::size_t>(span + j)] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)];
      const double temp = ndu(r, j - 1) / ndu(j, r);
      ndu(r, j) = saved + right[static_cast<std::size_t>(r + 1)] * temp;
      saved = left[static_cast<std::size_t>(j - r)] * temp;
    }
    ndu(j, j) = saved;
  }

  ders.setZero(n_ders + 1, p + 1);
  for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);
  const int max_der = std::min(n_ders, p);  // higher derivatives vanish

  Eigen::MatrixXd a(2, p + 1);
  for (int r = 0; r <= p; ++r) {
    int s1 = 0;
    int s2 = 1;
    a(0, 0) = 1.0;
    for (int k = 1; k <= max_der; ++k) {
      double d = 0.0;
      const int rk = r - k;
      const int pk = p - k;
      if (r >= k) {
        a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
        d = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = (rk >= -1) ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
        d += a(s2, j) * ndu(rk + j, pk);
      }
      if (r <= pk) {
        a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
        d += a(s2, k) * ndu(r, pk);
      }
      ders(k, r) = d;
      std::swap(s1, s2);
    }
  }

  double factor = p;
  for (int k = 1; k <= max_der; ++k) {
    for (int j = 0; j <= p; ++j) ders(k, j) *= factor;
    factor *= (p - k);
  }
}

Eigen::VectorXd BSplineBasis::evaluate(double t, int derivative) const {
  if (t < 0.0 || t > 1.0) {
    throw Error(ErrorCode::data, "basis evaluation point outside [0, 1]");
  }
  const int span = find_span(t);
  Eigen::MatrixXd ders;
  ders_basis_funs(span, t, derivative, ders);
  Eigen::VectorXd row = Eigen::VectorXd::Zero(n_basis_);
  const int first = span - degree();
  for (int j = 0; j <= degree(); ++j) {
    row[first + j] = ders(derivative, j);
  }
  return row;
}

Eigen::MatrixXd BSplineBasis::evaluate(const Eigen::VectorXd& points,
                                       int derivative) const {
  Eigen::MatrixXd result(points.size(), n_basis_);
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    result.row(i) = evaluate(points[i], derivative).transpose();
  }
  return result;
}

Eigen::MatrixXd BSplineBasis::evaluate(const Grid& grid, int derivative) const {
  return evaluate(grid.points(), derivative);
}

Eigen::MatrixXd BSplineBasis::penalty_matrix() const {
  Eigen::MatrixXd penalty = Eigen::MatrixXd::Zero(n_basis_, n_basis_);
  std::vector<double> nodes, weights;
  gauss_legendre(order_, nodes, weights);

  const int p = degree();
  for (int span = p; span < n_basis_; ++span) {
    const double a = knots_[static_cast<std::size_t>(span)];
    const double b = knots_[static_cast<std::size_t>(span + 1)];
    if (b <= a) continue;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const double t = mid + half * nodes[q];
      Eigen::MatrixXd ders;
      ders_basis_funs(span, t, 2, ders);
      const double w = half * weights[q];
      const int first = span - p;
      for (int i = 0; i <= p; ++i) {
        for (int j = 0; j <= p; ++j) {
          penalty(first + i, first + j) += w * ders(2, i) * ders(2, j);
        }
      }
    }
  }
  return penalty;
}

}  // namespace fnncc
