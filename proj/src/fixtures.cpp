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

#include "ustruct/fixtures.hpp"

#include <cmath>

namespace ustruct {

namespace {

Matrix pauli(char which) {
  Matrix m = Matrix::Zero(2, 2);
  switch (which) {
    case 'x':
      m(0, 1) = 1;
      m(1, 0) = 1;
      break;
    case 'y':
      m(0, 1) = Complex(0, -1);
      m(1, 0) = Complex(0, 1);
      break;
    case 'z':
      m(0, 0) = 1;
      m(1, 1) = -1;
      break;
    default:
      m.setIdentity();
  }
  return m;
}

Matrix basis_projector(int d, int k) {
  Matrix p = Matrix::Zero(d, d);
  p(k, k) = 1;
  return p;
}

BipartiteUnitary build_identity22() {
  return BipartiteUnitary::checked(2, 2, Matrix::Identity(4, 4));
}

BipartiteUnitary build_swap() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = 1;
  m(1, 2) = 1;
  m(2, 1) = 1;
  m(3, 3) = 1;
  return BipartiteUnitary::checked(2, 2, m);
}

BipartiteUnitary build_cnot() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = 1;
  m(1, 1) = 1;
  m(2, 3) = 1;
  m(3, 2) = 1;
  return BipartiteUnitary::checked(2, 2, m);
}

// 2×4 controlled unitary of Schmidt rank 3 whose B side needs four terms:
// I⊗P1 + X⊗P2 + Z⊗P3 + (X+Z)/√2⊗P4.
BipartiteUnitary build_v324() {
  Matrix m = Matrix::Zero(8, 8);
  m += kron(Matrix::Identity(2, 2), basis_projector(4, 0));
  m += kron(pauli('x'), basis_projector(4, 1));
  m += kron(pauli('z'), basis_projector(4, 2));
  m += kron(Matrix((pauli('x') + pauli('z')) / std::sqrt(2.0)),
            basis_projector(4, 3));
  return BipartiteUnitary::checked(2, 4, m);
}

// Qutrit-qubit gate acting as SWAP on the qubit-qubit subspace and as the
// identity on |3⟩⊗H_B: a block-controlled unitary that is not controlled.
BipartiteUnitary build_bcu32() {
  const auto embed = [](const Matrix& two) {
    Matrix m = Matrix::Zero(3, 3);
    m.topLeftCorner(2, 2) = two;
    return m;
  };
  Matrix m = Matrix::Zero(6, 6);
  m += 0.5 * kron(embed(Matrix::Identity(2, 2)), Matrix::Identity(2, 2));
  m += 0.5 * kron(embed(pauli('x')), pauli('x'));
  m += 0.5 * kron(embed(pauli('y')), pauli('y'));
  m += 0.5 * kron(embed(pauli('z')), pauli('z'));
  m += kron(basis_projector(3, 2), Matrix::Identity(2, 2));
  return BipartiteUnitary::checked(3, 2, m);
}

// 3×3 controlled unitary Σ V_i ⊗ |i⟩⟨i| with V_i = U_i ⊕ |3⟩⟨3| for
// linearly independent 2×2 unitaries U_i; controlled from B only.
BipartiteUnitary build_ctrl33() {
  const auto extend = [](const Matrix& two) {
    Matrix m = Matrix::Zero(3, 3);
    m.topLeftCorner(2, 2) = two;
    m(2, 2) = 1;
    return m;
  };
  const Matrix v[3] = {extend(Matrix::Identity(2, 2)), extend(pauli('x')),
                       extend(pauli('z'))};
  Matrix m = Matrix::Zero(9, 9);
  for (int i = 0; i < 3; ++i) {
    m += kron(v[i], basis_projector(3, i));
  }
  return BipartiteUnitary::checked(3, 3, m);
}

// 2×3 unitary I⊗P1 + X⊗P2 + Y⊗P3 saturating the log2(3) entanglement
// cost bound.
BipartiteUnitary build_saturation() {
  Matrix m = Matrix::Zero(6, 6);
  m += kron(Matrix::Identity(2, 2), basis_projector(3, 0));
  m += kron(pauli('x'), basis_projector(3, 1));
  m += kron(pauli('y'), basis_projector(3, 2));
  return BipartiteUnitary::checked(2, 3, m);
}

}  // namespace

const std::vector<Fixture>& fixture_gallery() {
  static const std::vector<Fixture> gallery = [] {
    std::vector<Fixture> g;
    g.push_back({"identity22",
                 "identity on a 2×2 system",
                 build_identity22,
                 {.schmidt_rank = 1,
                  .controlled_a = true,
                  .controlled_b = true,
                  .groups_a = 1,
                  .groups_b = 1,
                  .bcu_a = std::vector<int>{1, 1},
                  .bcu_b = std::vector<int>{1, 1}}});
    g.push_back({"swap",
                 "two-qubit SWAP gate",
                 build_swap,
                 {.schmidt_rank = 4,
                  .controlled_a = false,
                  .controlled_b = false,
                  .bcu_a = std::vector<int>{},
                  .bcu_b = std::vector<int>{}}});
    g.push_back({"cnot",
                 "two-qubit CNOT gate",
                 build_cnot,
                 {.schmidt_rank = 2,
                  .controlled_a = true,
                  .controlled_b = true,
                  .groups_a = 2,
                  .groups_b = 2,
                  .bcu_a = std::vector<int>{1, 1},
                  .bcu_b = std::vector<int>{1, 1}}});
    g.push_back({"v324",
                 "2×4 Schmidt-rank-3 controlled unitary needing four "
                 "B-side terms",
                 build_v324,
                 {.schmidt_rank = 3,
                  .controlled_a = false,
                  .controlled_b = true,
                  .groups_b = 4,
                  .bcu_a = std::vector<int>{},
                  .bcu_b = std::vector<int>{1, 1, 1, 1}}});
    g.push_back({"bcu32",
                 "qutrit-qubit block-controlled unitary that is not "
                 "controlled",
                 build_bcu32,
                 {.schmidt_rank = 4,
                  .controlled_a = false,
                  .controlled_b = false,
                  .bcu_a = std::vector<int>{2, 1},
                  .bcu_b = std::vector<int>{}}});
    g.push_back({"ctrl33",
                 "3×3 controlled-from-B unitary that is not controlled "
                 "from A",
                 build_ctrl33,
                 {.schmidt_rank = 3,
                  .controlled_a = false,
                  .controlled_b = true,
                  .groups_b = 3,
                  .bcu_a = std::vector<int>{2, 1},
                  .bcu_b = std::vector<int>{1, 1, 1}}});
    g.push_back({"saturation",
                 "2×3 unitary saturating the log2(3) ebit cost bound",
                 build_saturation,
                 {.schmidt_rank = 3,
                  .controlled_a = false,
                  .controlled_b = true,
                  .groups_b = 3,
                  .bcu_a = std::vector<int>{},
                  .bcu_b = std::vector<int>{1, 1, 1}}});
    return g;
  }();
  return gallery;
}

const Fixture& fixture_by_name(const std::string& name) {
  for (const Fixture& f : fixture_gallery()) {
    if (f.name == name) return f;
  }
  throw Error("unknown fixture: " + name);
}

}  // namespace ustruct
