#include "surfeig/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "surfeig/errors.hpp"

namespace surfeig {

double asymmetry(const SparseMatrix& m) {
  const SparseMatrix t = m.transpose();
  const SparseMatrix d = m - t;
  return max_abs(d);
}

double max_abs(const SparseMatrix& m) {
  double v = 0.0;
  for (int i = 0; i < m.nonZeros(); ++i) v = std::max(v, std::abs(m.valuePtr()[i]));
  return v;
}

void write_matrix_market(const SparseMatrix& m, const std::filesystem::path& path, const std::string& comment) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw InputError("cannot open " + path.string() + " for writing");
  long long count = 0;
  for (int r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      if (it.col() <= r) ++count;
    }
  }
  std::fprintf(f, "%%%%MatrixMarket matrix coordinate real symmetric\n");
  if (!comment.empty()) std::fprintf(f, "%% %s\n", comment.c_str());
  std::fprintf(f, "%lld %lld %lld\n", static_cast<long long>(m.rows()), static_cast<long long>(m.cols()), count);
  for (int r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      if (it.col() <= r) std::fprintf(f, "%d %d %.17e\n", r + 1, static_cast<int>(it.col()) + 1, it.value());
    }
  }
  std::fclose(f);
}

SparseMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("%%MatrixMarket matrix coordinate real", 0) != 0) {
    throw InputError("unsupported MatrixMarket header: " + line);
  }
  const bool symmetric = line.find("symmetric") != std::string::npos;
  while (std::getline(in, line) && !line.empty() && line[0] == '%') {
  }
  long long rows = 0, cols = 0, nnz = 0;
  std::istringstream(line) >> rows >> cols >> nnz;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(symmetric ? 2 * nnz : nnz);
  for (long long k = 0; k < nnz; ++k) {
    int r = 0, c = 0;
    double v = 0.0;
    if (!(in >> r >> c >> v)) throw InputError("truncated MatrixMarket file " + path.string());
    trip.emplace_back(r - 1, c - 1, v);
    if (symmetric && r != c) trip.emplace_back(c - 1, r - 1, v);
  }
  SparseMatrix m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

}  // namespace surfeig
