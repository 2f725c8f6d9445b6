#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace qnd {

using cd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<cd>;
using RealVector = std::vector<double>;

inline constexpr cd kI{0.0, 1.0};

/// Thrown for precondition violations on user-supplied inputs.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical integration leaves its validity envelope.
class IntegrationFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline Matrix dag(const Matrix& m) { return m.adjoint(); }

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

/// Kronecker product of two dense operators.
Matrix kron(const Matrix& a, const Matrix& b);

/// |row><col| on a space of dimension `dim`.
Matrix outer(std::size_t dim, std::size_t row, std::size_t col);

/// Largest elementwise modulus.
double max_abs(const Matrix& m);

/// max |m - m^dagger|
double hermiticity_error(const Matrix& m);

/// Smallest eigenvalue of the Hermitian part of m.
double min_eigenvalue(const Matrix& m);

/// Tr[a b] without forming the product.
inline cd trace_product(const Matrix& a, const Matrix& b) {
    return (a.transpose().array() * b.array()).sum();
}

SparseMatrix to_sparse(const Matrix& m, double tol = 0.0);

}  // namespace qnd
