#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "surfeig/errors.hpp"
#include "surfeig/sparse.hpp"

using namespace surfeig;

TEST_CASE("MatrixMarket round trip of a symmetric matrix") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Eigen::Triplet<double>> t;
  const int n = 40;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 4.0 + u(rng));
    if (i + 3 < n) {
      const double v = u(rng) / 3.0;
      t.emplace_back(i, i + 3, v);
      t.emplace_back(i + 3, i, v);
    }
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  CHECK(asymmetry(m) == 0.0);

  const auto path = std::filesystem::temp_directory_path() / "surfeig_test.mtx";
  write_matrix_market(m, path, "test matrix");
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "%%MatrixMarket matrix coordinate real symmetric");
  in.close();

  const SparseMatrix back = read_matrix_market(path);
  CHECK(back.rows() == n);
  CHECK(max_abs(SparseMatrix(back - m)) == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("MatrixMarket general matrices and malformed input") {
  const auto path = std::filesystem::temp_directory_path() / "surfeig_general.mtx";
  {
    std::ofstream out(path);
    out << "%%MatrixMarket matrix coordinate real general\n% comment\n2 3 2\n1 3 2.5\n2 1 -1\n";
  }
  const SparseMatrix m = read_matrix_market(path);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m.coeff(0, 2) == 2.5);
  CHECK(m.coeff(1, 0) == -1.0);
  {
    std::ofstream out(path);
    out << "not a matrix\n";
  }
  CHECK_THROWS_AS(read_matrix_market(path), InputError);
  std::filesystem::remove(path);
}
