#include "regdiag/csv.hpp"

namespace regdiag {

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& A) {
  std::ofstream out(path);
  if (!out) throw ValidationError("unwritable-output: " + path.string());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (j) out << ',';
      out << fmt17(A(i, j));
    }
    out << '\n';
  }
}

void write_vector_csv(const std::filesystem::path& path, const Eigen::VectorXd& v) {
  std::ofstream out(path);
  if (!out) throw ValidationError("unwritable-output: " + path.string());
  for (Eigen::Index i = 0; i < v.size(); ++i) out << fmt17(v(i)) << '\n';
}

}  // namespace regdiag
