#include <doctest.h>

#include <cmath>

#include "surfeig/lagrange.hpp"
#include "surfeig/quadrature.hpp"

using namespace surfeig;

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

}  // namespace

TEST_CASE("Lagrange basis: nodal property, partition of unity, gradients") {
  for (int k = 1; k <= 4; ++k) {
    const LagrangeBasis basis(k);
    CHECK(basis.size() == (k + 1) * (k + 2) / 2);
    Eigen::VectorXd v;
    Eigen::MatrixX2d g;
    for (int m = 0; m < basis.size(); ++m) {
      basis.eval(basis.node_point(m), v);
      for (int i = 0; i < basis.size(); ++i) CHECK(v(i) == doctest::Approx(i == m ? 1.0 : 0.0).epsilon(1e-12));
    }
    for (const RefPoint& xi : {RefPoint(0.1, 0.2), RefPoint(0.3, 0.6), RefPoint(0.0, 0.5)}) {
      basis.eval(xi, v, g);
      CHECK(v.sum() == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(g.colwise().sum().norm() < 1e-11);
      const double e = 1e-6;
      Eigen::VectorXd vp, vm;
      for (int d = 0; d < 2; ++d) {
        basis.eval(xi + e * RefPoint::Unit(d), vp);
        basis.eval(xi - e * RefPoint::Unit(d), vm);
        CHECK(((vp - vm) / (2 * e) - g.col(d)).norm() < 1e-7);
      }
    }
  }
}

TEST_CASE("Gauss-Legendre on [0, 1] integrates polynomials of degree 2n-1") {
  for (int n = 1; n <= 8; ++n) {
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += w[i] * std::pow(x[i], p);
      const double exact = 1.0 / (p + 1);
      CHECK(s == doctest::Approx(exact).epsilon(1e-13));
    }
  }
}

TEST_CASE("triangle rules integrate monomials up to their degree") {
  for (int degree = 1; degree <= 20; ++degree) {
    const QuadratureRule q = triangle_rule(degree);
    CHECK(q.degree >= degree);
    double wsum = 0.0;
    for (double w : q.weights) {
      CHECK(w > 0.0);
      wsum += w;
    }
    CHECK(wsum == doctest::Approx(0.5).epsilon(1e-14));
    for (int a = 0; a <= degree; ++a)
      for (int b = 0; a + b <= degree; ++b) {
        double s = 0.0;
        for (int i = 0; i < q.size(); ++i) s += q.weights[i] * std::pow(q.points[i](0), a) * std::pow(q.points[i](1), b);
        const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
        CHECK(s == doctest::Approx(exact).epsilon(1e-12));
      }
    for (const auto& p : q.points) {
      CHECK(p(0) >= 0.0);
      CHECK(p(1) >= 0.0);
      CHECK(p(0) + p(1) <= 1.0);
    }
  }
}
