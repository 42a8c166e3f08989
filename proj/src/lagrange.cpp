#include "surfeig/lagrange.hpp"

#include "surfeig/errors.hpp"

namespace surfeig {

LagrangeBasis::LagrangeBasis(int degree) : degree_(degree) {
  if (degree < 1 || degree > 8) throw InputError("Lagrange degree must lie in [1, 8]");
  const int k = degree;
  nodes_.push_back({k, 0, 0});
  nodes_.push_back({0, k, 0});
  nodes_.push_back({0, 0, k});
  for (int t = 1; t < k; ++t) nodes_.push_back({k - t, t, 0});
  for (int t = 1; t < k; ++t) nodes_.push_back({0, k - t, t});
  for (int t = 1; t < k; ++t) nodes_.push_back({t, 0, k - t});
  for (int i2 = 1; i2 < k; ++i2) {
    for (int i1 = 1; i1 + i2 < k; ++i1) nodes_.push_back({k - i1 - i2, i1, i2});
  }
}

RefPoint LagrangeBasis::node_point(int m) const {
  const auto& a = nodes_[m];
  return RefPoint(static_cast<double>(a[1]) / degree_, static_cast<double>(a[2]) / degree_);
}

namespace {

// f(l) = prod_{j<a} (k l - j) / (j + 1) and its derivative in l.
inline void factor(int a, int k, double l, double& f, double& df) {
  f = 1.0;
  df = 0.0;
  for (int j = 0; j < a; ++j) {
    const double g = (k * l - j) / (j + 1);
    const double dg = static_cast<double>(k) / (j + 1);
    df = df * g + f * dg;
    f *= g;
  }
}

}  // namespace

void LagrangeBasis::eval(const RefPoint& xi, Eigen::VectorXd& values) const {
  const double lam[3] = {1.0 - xi.x() - xi.y(), xi.x(), xi.y()};
  values.resize(size());
  for (int m = 0; m < size(); ++m) {
    double v = 1.0;
    for (int c = 0; c < 3; ++c) {
      double f, df;
      factor(nodes_[m][c], degree_, lam[c], f, df);
      v *= f;
    }
    values[m] = v;
  }
}

void LagrangeBasis::eval(const RefPoint& xi, Eigen::VectorXd& values, Eigen::MatrixX2d& grads) const {
  const double lam[3] = {1.0 - xi.x() - xi.y(), xi.x(), xi.y()};
  static constexpr double dlam[3][2] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};
  values.resize(size());
  grads.resize(size(), 2);
  for (int m = 0; m < size(); ++m) {
    double f[3], df[3];
    for (int c = 0; c < 3; ++c) factor(nodes_[m][c], degree_, lam[c], f[c], df[c]);
    values[m] = f[0] * f[1] * f[2];
    const double d0 = df[0] * f[1] * f[2];
    const double d1 = f[0] * df[1] * f[2];
    const double d2 = f[0] * f[1] * df[2];
    grads(m, 0) = d0 * dlam[0][0] + d1 * dlam[1][0] + d2 * dlam[2][0];
    grads(m, 1) = d0 * dlam[0][1] + d1 * dlam[1][1] + d2 * dlam[2][1];
  }
}

}  // namespace surfeig
