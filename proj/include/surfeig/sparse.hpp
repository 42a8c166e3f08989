#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Sparse>

namespace surfeig {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

/// max |M - M^T| over all entries.
double asymmetry(const SparseMatrix& m);

double max_abs(const SparseMatrix& m);

/// Writes the lower triangle in MatrixMarket coordinate format
/// ("real symmetric", 1-based indices).
void write_matrix_market(const SparseMatrix& m, const std::filesystem::path& path,
                         const std::string& comment = {});

/// Reads a real MatrixMarket coordinate file, general or symmetric.
SparseMatrix read_matrix_market(const std::filesystem::path& path);

}  // namespace surfeig
