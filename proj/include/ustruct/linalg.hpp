// Copyright 2026 The ustruct authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace ustruct {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidMatrix : public Error {
 public:
  using Error::Error;
};
class ShapeError : public Error {
 public:
  using Error::Error;
};
class NotHermitian : public Error {
 public:
  using Error::Error;
};
class NotUnitary : public Error {
 public:
  using Error::Error;
};
class NotSimultaneouslyDiagonalizable : public Error {
 public:
  using Error::Error;
};
class NoSimultaneousSVD : public Error {
 public:
  using Error::Error;
};
class InternalContractViolation : public Error {
 public:
  using Error::Error;
};
class RankTooHigh : public Error {
 public:
  using Error::Error;
};
class WitnessResidualTooLarge : public Error {
 public:
  using Error::Error;
};
class NotInvertible : public Error {
 public:
  using Error::Error;
};
class BadBlockSupport : public Error {
 public:
  using Error::Error;
};
class InvalidDimension : public Error {
 public:
  using Error::Error;
};
class InvalidBipartition : public Error {
 public:
  using Error::Error;
};
class InvalidState : public Error {
 public:
  using Error::Error;
};
class InvalidControlledForm : public Error {
 public:
  using Error::Error;
};
class UnsupportedShape : public Error {
 public:
  using Error::Error;
};
class TheoremViolationReport : public Error {
 public:
  using Error::Error;
};
class ParseError : public Error {
 public:
  using Error::Error;
};

/**
 * Relative tolerance policy shared by every analysis routine. All
 * thresholds are scaled by operator norms or the largest singular value
 * of the quantity being tested, so the same defaults apply at every
 * dimension handled here.
 */
struct Tolerance {
  double unitarity = 1e-9;
  double rank_rel = 1e-9;
  double commute = 1e-9;
  double eig_cluster = 1e-7;
  double reconstruct = 1e-9;
};

struct SvdResult {
  Matrix u;                    // columns are left singular vectors
  RealVector singular_values;  // sorted descending, nonnegative
  Matrix v;                    // columns are right singular vectors
  Matrix reconstruct() const;  // u * diag(s) * v†
};

struct EigResult {
  RealVector eigenvalues;
  Matrix eigenvectors;  // unitary, columns are eigenvectors
};

void require_finite(const Matrix& m);

/// Full SVD, m = u * diag(s) * v† with square unitary u, v.
SvdResult svd(const Matrix& m);

/// Count of singular values above rank_rel * s_max; 0 for the zero matrix.
int numerical_rank(const Matrix& m, const Tolerance& tol = {});

/// Eigendecomposition of a (numerically) Hermitian matrix.
EigResult eig_hermitian(const Matrix& h, const Tolerance& tol = {});

bool is_normal(const Matrix& m, const Tolerance& tol = {});
bool commutes(const Matrix& m, const Matrix& n, const Tolerance& tol = {});
bool is_unitary(const Matrix& m, const Tolerance& tol = {});

/// Tensor product with the row-major index convention
/// (a ⊗ b)(i·p+k, j·q+l) = a(i,j) b(k,l) for b of shape p×q.
Matrix kron(const Matrix& a, const Matrix& b);

Matrix dagger(const Matrix& m);

/// Hermitian/anti-Hermitian residuals used by the predicates, exposed so
/// callers can report how close a verdict sits to the tolerance boundary.
double normality_residual(const Matrix& m);
double commutator_residual(const Matrix& m, const Matrix& n);

}  // namespace ustruct
