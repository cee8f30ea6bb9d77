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

#include <cmath>

#include "ustruct/linalg.hpp"

namespace ustruct::testutil {

/// Matches two matrices up to a global phase.
inline bool matches_up_to_phase(const Matrix& a, const Matrix& b,
                                double tol = 1e-8) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  const Complex z = (b.adjoint() * a).trace() / static_cast<double>(b.rows());
  if (std::abs(std::abs(z) - 1.0) > tol) return false;
  return (a - z * b).norm() <= tol * std::sqrt(static_cast<double>(b.rows()));
}

inline Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline Matrix pauli_y() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

inline Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline Matrix swap_gate() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = 1;
  m(1, 2) = 1;
  m(2, 1) = 1;
  m(3, 3) = 1;
  return m;
}

inline Matrix cnot_gate() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = 1;
  m(1, 1) = 1;
  m(2, 3) = 1;
  m(3, 2) = 1;
  return m;
}

}  // namespace ustruct::testutil
