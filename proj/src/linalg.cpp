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

#include "ustruct/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

#include "ustruct/random.hpp"

namespace ustruct {

void require_finite(const Matrix& m) {
  if (!m.allFinite()) {
    throw InvalidMatrix("matrix contains NaN or Inf entries");
  }
}

Matrix SvdResult::reconstruct() const {
  Matrix sigma = Matrix::Zero(u.cols(), v.cols());
  for (int i = 0; i < singular_values.size(); ++i) {
    sigma(i, i) = singular_values(i);
  }
  return u * sigma * v.adjoint();
}

SvdResult svd(const Matrix& m) {
  require_finite(m);
  Eigen::JacobiSVD<Matrix> solver(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

int numerical_rank(const Matrix& m, const Tolerance& tol) {
  require_finite(m);
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> solver(m);
  const RealVector& s = solver.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double cutoff = tol.rank_rel * s(0);
  int rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  return rank;
}

EigResult eig_hermitian(const Matrix& h, const Tolerance& tol) {
  require_finite(h);
  if (h.rows() != h.cols()) {
    throw ShapeError("eig_hermitian requires a square matrix");
  }
  const double scale = h.norm();
  if ((h - h.adjoint()).norm() > tol.commute * std::max(scale, 1e-300)) {
    throw NotHermitian("matrix is not Hermitian within tolerance");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver((h + h.adjoint()) / 2.0);
  if (solver.info() != Eigen::Success) {
    throw Error("Hermitian eigensolver failed to converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double normality_residual(const Matrix& m) {
  return (m * m.adjoint() - m.adjoint() * m).norm();
}

double commutator_residual(const Matrix& m, const Matrix& n) {
  return (m * n - n * m).norm();
}

bool is_normal(const Matrix& m, const Tolerance& tol) {
  require_finite(m);
  if (m.rows() != m.cols()) return false;
  const double scale = m.norm();
  return normality_residual(m) <= tol.commute * scale * scale;
}

bool commutes(const Matrix& m, const Matrix& n, const Tolerance& tol) {
  require_finite(m);
  require_finite(n);
  if (m.rows() != m.cols() || n.rows() != n.cols() || m.rows() != n.rows()) {
    throw ShapeError("commutes requires square matrices of equal size");
  }
  return commutator_residual(m, n) <= tol.commute * m.norm() * n.norm();
}

bool is_unitary(const Matrix& m, const Tolerance& tol) {
  require_finite(m);
  if (m.rows() != m.cols()) return false;
  const Matrix gram = m * m.adjoint();
  return (gram - Matrix::Identity(m.rows(), m.rows())).norm() <= tol.unitarity;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  require_finite(a);
  require_finite(b);
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix dagger(const Matrix& m) { return m.adjoint(); }

Matrix random_gaussian(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      m(i, j) = Complex(normal(rng), normal(rng));
    }
  }
  return m;
}

Matrix haar_unitary(int d, Rng& rng) {
  const Matrix g = random_gaussian(d, d, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < d; ++i) {
    const Complex rii = r(i, i);
    const double mag = std::abs(rii);
    q.col(i) *= (mag > 0) ? rii / mag : Complex(1, 0);
  }
  return q;
}

Vector random_state_vector(int d, Rng& rng) {
  Vector v = random_gaussian(d, 1, rng).col(0);
  return v / v.norm();
}

}  // namespace ustruct
