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

#include <vector>

#include "ustruct/linalg.hpp"

namespace ustruct {

/**
 * A unitary acting on a d_A × d_B bipartite system. Basis state
 * |i⟩_A|k⟩_B maps to row/column index i·d_B + k (0-based), so the full
 * matrix is the tensor-index row-major convention used by kron().
 */
struct BipartiteUnitary {
  int d_a = 0;
  int d_b = 0;
  Matrix matrix;

  /// Validates shape, finiteness and unitarity before constructing.
  static BipartiteUnitary checked(int d_a, int d_b, Matrix m,
                                  const Tolerance& tol = {});
  int dim() const { return d_a * d_b; }
};

/**
 * Canonical operator Schmidt decomposition M = Σ_r c_r · a_r ⊗ b_r with
 * strictly positive coefficients sorted descending and factor lists
 * orthonormal under the Hilbert–Schmidt inner product.
 */
struct SchmidtDecomposition {
  RealVector coefficients;
  std::vector<Matrix> a_ops;
  std::vector<Matrix> b_ops;

  int rank() const { return static_cast<int>(coefficients.size()); }
  Matrix reconstruct() const;
};

/// Rearranges a (d_A·d_B)-square matrix into the d_A²×d_B² matrix whose
/// row index runs over A-side index pairs and column index over B-side
/// pairs, so that kron(A, B) maps to vec(A)·vec(B)ᵀ (row-major vec).
Matrix realign(const Matrix& m, int d_a, int d_b);

/// Inverse of realign.
Matrix realign_inverse(const Matrix& r, int d_a, int d_b);

/// Row-major vectorization and its inverse.
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, int rows, int cols);

SchmidtDecomposition schmidt_decompose(const Matrix& m, int d_a, int d_b,
                                       const Tolerance& tol = {});

int schmidt_rank(const Matrix& m, int d_a, int d_b, const Tolerance& tol = {});

}  // namespace ustruct
