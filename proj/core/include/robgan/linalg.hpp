#pragma once

#include <stdexcept>
#include <string>

#include "robgan/matrix.hpp"

namespace robgan {

/// Raised when an iterative method fails to converge or a factorization breaks down.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct PowerIterationOptions {
  std::size_t max_iterations = 10000;
  /// Stop when the Rayleigh quotient changes by less than this, relative.
  double tolerance = 1e-10;
};

/// Largest singular value, by power iteration on m^T m.
double operator_norm(const Matrix& m, const PowerIterationOptions& opts = {});

/// Lower-triangular L with L L^T = m. Throws NumericalError if m is not SPD.
Matrix cholesky(const Matrix& m);

/// Inverse of a symmetric positive definite matrix via its Cholesky factor.
Matrix invert_spd(const Matrix& m);

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
Vector symmetric_eigenvalues(const Matrix& m);

bool is_symmetric(const Matrix& m, double tol = 0.0);

} // namespace robgan
