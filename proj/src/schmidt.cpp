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

#include "ustruct/schmidt.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace ustruct {

BipartiteUnitary BipartiteUnitary::checked(int d_a, int d_b, Matrix m,
                                           const Tolerance& tol) {
  if (d_a < 1 || d_b < 1) {
    throw InvalidDimension("subsystem dimensions must be positive");
  }
  if (m.rows() != d_a * d_b || m.cols() != d_a * d_b) {
    throw ShapeError("matrix shape does not match d_A*d_B");
  }
  require_finite(m);
  if (!is_unitary(m, tol)) {
    throw NotUnitary("matrix is not unitary within tolerance");
  }
  return {d_a, d_b, std::move(m)};
}

Vector vec(const Matrix& m) {
  Vector v(m.size());
  int idx = 0;
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      v(idx++) = m(i, j);
    }
  }
  return v;
}

Matrix unvec(const Vector& v, int rows, int cols) {
  if (v.size() != rows * cols) {
    throw ShapeError("unvec: element count does not match shape");
  }
  Matrix m(rows, cols);
  int idx = 0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      m(i, j) = v(idx++);
    }
  }
  return m;
}

Matrix realign(const Matrix& m, int d_a, int d_b) {
  const int d = d_a * d_b;
  if (m.rows() != d || m.cols() != d) {
    throw ShapeError("realign: matrix is not (d_A*d_B)-square");
  }
  require_finite(m);
  Matrix out(d_a * d_a, d_b * d_b);
  for (int i = 0; i < d_a; ++i) {
    for (int j = 0; j < d_a; ++j) {
      for (int k = 0; k < d_b; ++k) {
        for (int l = 0; l < d_b; ++l) {
          out(i * d_a + j, k * d_b + l) = m(i * d_b + k, j * d_b + l);
        }
      }
    }
  }
  return out;
}

Matrix realign_inverse(const Matrix& r, int d_a, int d_b) {
  if (r.rows() != d_a * d_a || r.cols() != d_b * d_b) {
    throw ShapeError("realign_inverse: matrix is not d_A² × d_B²");
  }
  const int d = d_a * d_b;
  Matrix out(d, d);
  for (int i = 0; i < d_a; ++i) {
    for (int j = 0; j < d_a; ++j) {
      for (int k = 0; k < d_b; ++k) {
        for (int l = 0; l < d_b; ++l) {
          out(i * d_b + k, j * d_b + l) = r(i * d_a + j, k * d_b + l);
        }
      }
    }
  }
  return out;
}

Matrix SchmidtDecomposition::reconstruct() const {
  if (a_ops.empty()) {
    throw Error("empty Schmidt decomposition");
  }
  Matrix out = Matrix::Zero(a_ops[0].rows() * b_ops[0].rows(),
                            a_ops[0].cols() * b_ops[0].cols());
  for (int r = 0; r < rank(); ++r) {
    out += coefficients(r) * kron(a_ops[r], b_ops[r]);
  }
  return out;
}

SchmidtDecomposition schmidt_decompose(const Matrix& m, int d_a, int d_b,
                                       const Tolerance& tol) {
  const Matrix r = realign(m, d_a, d_b);
  Eigen::JacobiSVD<Matrix> solver(r, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& s = solver.singularValues();
  if (s.size() == 0 || s(0) == 0.0) {
    throw InvalidMatrix("cannot Schmidt-decompose the zero operator");
  }
  const double cutoff = tol.rank_rel * s(0);
  int rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;

  SchmidtDecomposition out;
  out.coefficients = s.head(rank);
  out.a_ops.reserve(rank);
  out.b_ops.reserve(rank);
  for (int j = 0; j < rank; ++j) {
    Matrix a = unvec(solver.matrixU().col(j), d_a, d_a);
    Matrix b = unvec(solver.matrixV().col(j).conjugate(), d_b, d_b);
    // Phase convention: first vec entry of a with modulus > 1e-8 made real
    // positive, the compensating phase pushed into b.
    for (int k = 0; k < a.size(); ++k) {
      const Complex entry = a(k / d_a, k % d_a);
      if (std::abs(entry) > 1e-8) {
        const Complex phase = entry / std::abs(entry);
        a *= std::conj(phase);
        b *= phase;
        break;
      }
    }
    out.a_ops.push_back(std::move(a));
    out.b_ops.push_back(std::move(b));
  }
  return out;
}

int schmidt_rank(const Matrix& m, int d_a, int d_b, const Tolerance& tol) {
  return numerical_rank(realign(m, d_a, d_b), tol);
}

}  // namespace ustruct
