#include "qnd/linalg.hpp"

#include <Eigen/Eigenvalues>

namespace qnd {

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Matrix outer(std::size_t dim, std::size_t row, std::size_t col) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = 1.0;
    return m;
}

double max_abs(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().maxCoeff();
}

double hermiticity_error(const Matrix& m) { return max_abs(m - m.adjoint()); }

double min_eigenvalue(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    const Matrix herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(herm, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

SparseMatrix to_sparse(const Matrix& m, double tol) {
    std::vector<Eigen::Triplet<cd>> entries;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            if (std::abs(m(i, j)) > tol) entries.emplace_back(i, j, m(i, j));
        }
    }
    SparseMatrix s(m.rows(), m.cols());
    s.setFromTriplets(entries.begin(), entries.end());
    s.makeCompressed();
    return s;
}

}  // namespace qnd
