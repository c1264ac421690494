#include "robgan/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "robgan/rng.hpp"

namespace robgan {

double operator_norm(const Matrix& m, const PowerIterationOptions& opts) {
  if (!m.all_finite()) {
    throw std::invalid_argument("operator_norm: non-finite entries");
  }
  if (m.empty() || max_abs(m) == 0.0) {
    return 0.0;
  }
  // A fixed pseudo-random start avoids being orthogonal to the top singular
  // vector for structured inputs such as diagonal matrices.
  Rng rng(0x5eedULL);
  Vector v(m.cols());
  for (double& x : v) {
    x = rng.normal();
  }
  double scale = norm2(v);
  for (double& x : v) {
    x /= scale;
  }

  double rayleigh = 0.0;
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    const Vector mv = matvec(m, v);
    Vector w(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      axpy(mv[i], m.row(i), w);
    }
    const double next = dot(v, w);
    const double wn = norm2(w);
    if (wn == 0.0) {
      return 0.0;
    }
    for (std::size_t j = 0; j < w.size(); ++j) {
      v[j] = w[j] / wn;
    }
    if (it > 0 && std::abs(next - rayleigh) <= opts.tolerance * std::abs(next)) {
      return std::sqrt(next);
    }
    rayleigh = next;
  }
  throw NumericalError("operator_norm: power iteration did not converge (ill-conditioned input)");
}

Matrix cholesky(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("cholesky: matrix is not square");
  }
  const std::size_t n = m.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = m(j, j);
    for (std::size_t k = 0; k < j; ++k) {
      diag -= l(j, k) * l(j, k);
    }
    if (!(diag > 0.0)) {
      throw NumericalError("cholesky: matrix is not positive definite");
    }
    l(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) {
        s -= l(i, k) * l(j, k);
      }
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

Matrix invert_spd(const Matrix& m) {
  const Matrix l = cholesky(m);
  const std::size_t n = l.rows();
  // Solve L Y = I, then L^T X = Y, one column at a time.
  Matrix inv(n, n);
  Vector y(n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = (i == c) ? 1.0 : 0.0;
      for (std::size_t k = 0; k < i; ++k) {
        s -= l(i, k) * y[k];
      }
      y[i] = s / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t k = ii + 1; k < n; ++k) {
        s -= l(k, ii) * inv(k, c);
      }
      inv(ii, c) = s / l(ii, ii);
    }
  }
  // Symmetrize away rounding asymmetry.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (inv(i, j) + inv(j, i));
      inv(i, j) = avg;
      inv(j, i) = avg;
    }
  }
  return inv;
}

Vector symmetric_eigenvalues(const Matrix& m) {
  if (!is_symmetric(m, 1e-12 * std::max(1.0, max_abs(m)))) {
    throw std::invalid_argument("symmetric_eigenvalues: matrix is not symmetric");
  }
  Matrix a = m;
  const std::size_t n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        off += a(i, j) * a(i, j);
      }
    }
    if (off <= 1e-30 * std::max(1.0, max_abs(a))) {
      break;
    }
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) {
          continue;
        }
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  Vector eig(n);
  for (std::size_t i = 0; i < n; ++i) {
    eig[i] = a(i, i);
  }
  std::sort(eig.begin(), eig.end());
  return eig;
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) {
    return false;
  }
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      if (std::abs(m(i, j) - m(j, i)) > tol) {
        return false;
      }
    }
  }
  return true;
}

} // namespace robgan
