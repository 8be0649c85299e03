#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Symmetric eigenvalue routines. Matrices are dense, row-major, n x n.
namespace hoc::linalg {

/// Eigenvalues of a symmetric tridiagonal matrix by the implicit QL method.
/// diag has n entries, offdiag has n-1 (offdiag[i] couples rows i and i+1).
/// Returned in ascending order. Throws NonConvergence after 60 sweeps on one
/// eigenvalue.
std::vector<double> tridiagonal_eigenvalues(std::vector<double> diag,
                                            std::vector<double> offdiag);

/// k-th smallest eigenvalue (0-based) of a symmetric tridiagonal matrix by
/// Sturm-sequence bisection.
double tridiagonal_kth_eigenvalue(std::span<const double> diag, std::span<const double> offdiag,
                                  std::size_t k);

/// Householder reduction to tridiagonal form followed by implicit QL.
std::vector<double> symmetric_eigenvalues(std::span<const double> a, std::size_t n);

/// Cyclic Jacobi rotations. Slower; used as an independent cross-check.
std::vector<double> jacobi_eigenvalues(std::span<const double> a, std::size_t n);

/// Frobenius norm of A - B.
double frobenius_distance(std::span<const double> a, std::span<const double> b);

}  // namespace hoc::linalg
