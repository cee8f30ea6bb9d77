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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "test_util.hpp"
#include "ustruct/controlled.hpp"
#include "ustruct/fixtures.hpp"

using namespace ustruct;
using namespace ustruct::testutil;

namespace {

// Matches one matrix against a gallery up to a global phase.
bool equal_up_to_phase(const Matrix& a, const Matrix& b, double tol = 1e-8) {
  const Complex z = (b.adjoint() * a).trace() / static_cast<double>(b.rows());
  if (std::abs(std::abs(z) - 1.0) > tol) return false;
  return (a - z * b).norm() <= tol * std::sqrt(static_cast<double>(b.rows()));
}

}  // namespace

TEST_CASE("check_controlled on the paper gallery") {
  const BipartiteUnitary v324 = fixture_by_name("v324").build();
  CHECK(check_controlled(v324, Side::B).is_controlled);
  CHECK(!check_controlled(v324, Side::A).is_controlled);

  const BipartiteUnitary swap = fixture_by_name("swap").build();
  CHECK(!check_controlled(swap, Side::A).is_controlled);
  CHECK(!check_controlled(swap, Side::B).is_controlled);

  const BipartiteUnitary cnot = fixture_by_name("cnot").build();
  CHECK(check_controlled(cnot, Side::A).is_controlled);
}

TEST_CASE("check_controlled rejects non-unitary input") {
  BipartiteUnitary u;
  u.d_a = 2;
  u.d_b = 2;
  u.matrix = Matrix::Identity(4, 4) * 2.0;
  CHECK_THROWS_AS(check_controlled(u, Side::A), NotUnitary);
}

TEST_CASE("check_controlled verdict is invariant under local unitaries") {
  Rng rng(101);
  const BipartiteUnitary v324 = fixture_by_name("v324").build();
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix conj = kron(haar_unitary(2, rng), haar_unitary(4, rng)) *
                        v324.matrix *
                        kron(haar_unitary(2, rng), haar_unitary(4, rng));
    const BipartiteUnitary u = BipartiteUnitary::checked(2, 4, conj);
    CHECK(check_controlled(u, Side::B).is_controlled);
    CHECK(!check_controlled(u, Side::A).is_controlled);
  }
}

TEST_CASE("joint_diagonalize on already-diagonal and shared-basis families") {
  const Matrix w1 =
      joint_diagonalize({pauli_z(), Matrix::Identity(2, 2)}, {}, 1);
  CHECK(is_unitary(w1));

  // σx and σx² share the Hadamard eigenbasis.
  const Matrix x2 = pauli_x() * pauli_x();
  const Matrix w2 = joint_diagonalize({pauli_x(), x2}, {}, 2);
  Matrix t = w2.adjoint() * pauli_x() * w2;
  t.diagonal().setZero();
  CHECK(t.norm() <= 1e-9);
}

TEST_CASE("joint_diagonalize recovers a constructed commuting family") {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 3 + (trial % 3);
    const Matrix w0 = haar_unitary(d, rng);
    std::vector<Matrix> family;
    for (int k = 0; k < 3; ++k) {
      Vector diag = random_gaussian(d, 1, rng).col(0);
      family.push_back(w0 * diag.asDiagonal() * w0.adjoint());
    }
    const Matrix w = joint_diagonalize(family, {}, 1000 + trial);
    for (const Matrix& m : family) {
      Matrix t = w.adjoint() * m * w;
      t.diagonal().setZero();
      CHECK(t.norm() <= 1e-9 * m.norm());
    }
  }
}

TEST_CASE("joint_diagonalize rejects non-commuting families") {
  CHECK_THROWS_AS(joint_diagonalize({pauli_x(), pauli_z()}, {}, 3),
                  NotSimultaneouslyDiagonalizable);
}

TEST_CASE("simultaneous_svd of diagonal families is immediate") {
  std::vector<Matrix> ops = {Matrix::Identity(2, 2), pauli_z()};
  const SimultaneousSvd s = simultaneous_svd(ops, {}, 5);
  for (size_t j = 0; j < ops.size(); ++j) {
    const Matrix d = s.q.adjoint() * ops[j] * s.r.adjoint();
    Matrix off = d;
    off.diagonal().setZero();
    CHECK(off.norm() <= 1e-9);
  }
  // singular values of σz are (1, 1): check the magnitudes of its diags
  CHECK(std::abs(s.diags[1](0)) == doctest::Approx(1.0));
  CHECK(std::abs(s.diags[1](1)) == doctest::Approx(1.0));
}

TEST_CASE("simultaneous_svd recovers a constructed family") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + (trial % 4);
    const int n = 2 + (trial % 2);
    const Matrix q0 = haar_unitary(d, rng);
    const Matrix r0 = haar_unitary(d, rng);
    std::vector<Vector> seeds;
    std::vector<Matrix> ops;
    for (int k = 0; k < n; ++k) {
      seeds.push_back(random_gaussian(d, 1, rng).col(0));
      ops.push_back(q0 * seeds.back().asDiagonal() * r0);
    }
    const SimultaneousSvd s = simultaneous_svd(ops, {}, 40 + trial);
    // reconstruction a_j = q diag r
    for (size_t j = 0; j < ops.size(); ++j) {
      const Matrix rec = s.q * Matrix(s.diags[j].asDiagonal()) * s.r;
      CHECK((rec - ops[j]).norm() <= 1e-9);
    }
    // recovered columns match seeds up to a common permutation and
    // per-column phases
    std::vector<bool> used(d, false);
    for (int k = 0; k < d; ++k) {
      Vector rec_col(n);
      for (int j = 0; j < n; ++j) rec_col(j) = s.diags[j](k);
      bool matched = false;
      for (int kp = 0; kp < d && !matched; ++kp) {
        if (used[kp]) continue;
        Vector seed_col(n);
        for (int j = 0; j < n; ++j) seed_col(j) = seeds[j](kp);
        const Complex z = seed_col.dot(rec_col) / seed_col.squaredNorm();
        if (std::abs(std::abs(z) - 1.0) < 1e-7 &&
            (rec_col - z * seed_col).norm() <= 1e-7 * seed_col.norm()) {
          used[kp] = true;
          matched = true;
        }
      }
      CHECK(matched);
    }
  }
}

TEST_CASE("simultaneous_svd refuses families without the structure") {
  // {X, Z} alone admit a simultaneous SVD (swap-permuted Y eigenbasis);
  // adding the identity puts X and Z themselves into the product families
  // and breaks commutation.
  CHECK_THROWS_AS(
      simultaneous_svd({Matrix::Identity(2, 2), pauli_x(), pauli_z()}, {}, 6),
      NoSimultaneousSVD);
}

TEST_CASE("extract_controlled_form on cnot") {
  const BipartiteUnitary cnot = fixture_by_name("cnot").build();
  const ControlledForm cf = extract_controlled_form(cnot, Side::A, {}, 11);
  REQUIRE(cf.group_count() == 2);
  int identity_groups = 0, x_groups = 0;
  for (const ControlledGroup& g : cf.groups) {
    if (equal_up_to_phase(g.v, Matrix::Identity(2, 2))) ++identity_groups;
    if (equal_up_to_phase(g.v, pauli_x())) ++x_groups;
  }
  CHECK(identity_groups == 1);
  CHECK(x_groups == 1);
  CHECK((cf.reconstruct() - cnot.matrix).norm() <= 1e-9);
}

TEST_CASE("extract_controlled_form on the 2x4 rank-three gallery entry") {
  const BipartiteUnitary v324 = fixture_by_name("v324").build();
  const ControlledForm cf = extract_controlled_form(v324, Side::B, {}, 13);
  REQUIRE(cf.group_count() == 4);  // no three-term B-side form exists
  const Matrix hadamard = (pauli_x() + pauli_z()) / std::sqrt(2.0);
  const std::vector<Matrix> expected = {Matrix::Identity(2, 2), pauli_x(),
                                        pauli_z(), hadamard};
  for (const Matrix& e : expected) {
    int hits = 0;
    for (const ControlledGroup& g : cf.groups) {
      if (equal_up_to_phase(g.v, e)) ++hits;
    }
    CHECK(hits == 1);
  }
  CHECK((cf.reconstruct() - v324.matrix).norm() <= 1e-9);

  CHECK_THROWS_AS(extract_controlled_form(v324, Side::A, {}, 13),
                  NoSimultaneousSVD);
}

TEST_CASE("extraction round trip recovers groups and blocks") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Side side = (trial % 2 == 0) ? Side::A : Side::B;
    const int d_ctrl = 2 + (trial % 4);
    const int d_other = 2 + ((trial + 1) % 3);
    const int groups = 2 + (trial % d_ctrl == 0 ? 0 : trial % d_ctrl);
    const ControlledInstance inst = random_controlled_instance(
        side, d_ctrl, d_other, std::min(groups, d_ctrl), rng);
    const ControlledForm cf =
        extract_controlled_form(inst.u, side, {}, 500 + trial);
    CHECK(cf.group_count() == std::min(groups, d_ctrl));
    CHECK((cf.reconstruct() - inst.u.matrix).norm() <= 1e-9);
  }
}

TEST_CASE("independent group blocks span the Schmidt factor space") {
  Rng rng(37);
  const ControlledInstance inst =
      random_controlled_instance(Side::A, 4, 3, 3, rng);
  const ControlledForm cf = extract_controlled_form(inst.u, Side::A, {}, 77);
  Matrix stacked(9, cf.group_count());
  for (int g = 0; g < cf.group_count(); ++g) {
    stacked.col(g) = vec(cf.groups[g].v);
  }
  CHECK(numerical_rank(stacked) == schmidt_rank(inst.u.matrix, 4, 3));
}

TEST_CASE("criterion and extraction agree") {
  Rng rng(41);
  const std::vector<std::string> names = {"swap", "cnot", "v324", "bcu32",
                                          "ctrl33", "saturation"};
  for (const std::string& name : names) {
    const BipartiteUnitary u = fixture_by_name(name).build();
    for (Side side : {Side::A, Side::B}) {
      const bool verdict = check_controlled(u, side).is_controlled;
      if (verdict) {
        const ControlledForm cf = extract_controlled_form(u, side, {}, 7);
        CHECK((cf.reconstruct() - u.matrix).norm() <= 1e-9);
      } else {
        CHECK_THROWS_AS(extract_controlled_form(u, side, {}, 7),
                        NoSimultaneousSVD);
      }
    }
  }
}

TEST_CASE("rank-three unitaries on 2xd are controlled from B") {
  Rng rng(43);
  for (int trial = 0; trial < 12; ++trial) {
    const int d_b = 3 + (trial % 4);
    const BipartiteUnitary u = rank3_from_span(2, d_b, rng);
    REQUIRE(schmidt_rank(u.matrix, 2, d_b) == 3);
    CHECK(check_controlled(u, Side::B).is_controlled);
    const ControlledForm cf =
        extract_controlled_form(u, Side::B, {}, 900 + trial);
    CHECK((cf.reconstruct() - u.matrix).norm() <= 1e-9);
  }
}

TEST_CASE("rank-three unitaries on 3xd are controlled from some side") {
  Rng rng(47);
  for (int trial = 0; trial < 9; ++trial) {
    const int d_b = 3 + (trial % 3);
    const BipartiteUnitary u = rank3_from_span(3, d_b, rng);
    REQUIRE(schmidt_rank(u.matrix, 3, d_b) == 3);
    const bool a = check_controlled(u, Side::A).is_controlled;
    const bool b = check_controlled(u, Side::B).is_controlled;
    CHECK((a || b));
  }
}

TEST_CASE("finest_block_structure on the qutrit-qubit gallery entry") {
  const BipartiteUnitary bcu = fixture_by_name("bcu32").build();
  const auto bs = finest_block_structure(bcu, Side::A, {}, 3);
  REQUIRE(bs.has_value());
  REQUIRE(bs->block_sizes == std::vector<int>{2, 1});
  CHECK(is_unitary(bs->w_left));
  CHECK(is_unitary(bs->w_right));
  // BCU is strictly weaker than controlled
  CHECK(!check_controlled(bcu, Side::A).is_controlled);
  CHECK(!check_controlled(bcu, Side::B).is_controlled);
  CHECK(!finest_block_structure(bcu, Side::B, {}, 3).has_value());
}

TEST_CASE("finest_block_structure of swap is trivial") {
  const BipartiteUnitary swap = fixture_by_name("swap").build();
  CHECK(!finest_block_structure(swap, Side::A, {}, 5).has_value());
}

TEST_CASE("block structure is a local-unitary invariant") {
  Rng rng(67);
  const BipartiteUnitary bcu = fixture_by_name("bcu32").build();
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix conj = kron(haar_unitary(3, rng), haar_unitary(2, rng)) *
                        bcu.matrix *
                        kron(haar_unitary(3, rng), haar_unitary(2, rng));
    const BipartiteUnitary u = BipartiteUnitary::checked(3, 2, conj);
    const auto bs = finest_block_structure(u, Side::A, {}, 7 + trial);
    REQUIRE(bs.has_value());
    CHECK(bs->block_sizes == std::vector<int>{2, 1});
  }
}

TEST_CASE("controlled unitaries split into singleton blocks") {
  Rng rng(53);
  const ControlledInstance inst =
      random_controlled_instance(Side::A, 3, 3, 3, rng);
  // strip the conjugation: build the bare controlled middle directly
  Matrix mid = Matrix::Zero(9, 9);
  for (int j = 0; j < 3; ++j) {
    Matrix p = Matrix::Zero(3, 3);
    p(j, j) = 1;
    mid += kron(p, inst.vs[j]);
  }
  const BipartiteUnitary bare = BipartiteUnitary::checked(3, 3, mid);
  const auto bs = finest_block_structure(bare, Side::A, {}, 17);
  REQUIRE(bs.has_value());
  CHECK(bs->block_sizes == std::vector<int>(3, 1));
}

TEST_CASE("zero_block_reduction zeroes a block at low Schmidt rank") {
  Rng rng(59);
  SUBCASE("dependent block-row handled by a column rotation") {
    // rank-2 operator on 3×2: every block-row is linearly dependent
    const Matrix m = random_rank_r_operator(3, 2, 2, rng);
    const ZeroBlockReduction z = zero_block_reduction(m, 3, 2);
    const Matrix t = kron(z.w_row, Matrix::Identity(2, 2)) * m *
                     kron(z.w_col, Matrix::Identity(2, 2));
    CHECK(t.block(z.row * 2, z.col * 2, 2, 2).norm() <= 1e-9 * m.norm());
  }
  SUBCASE("rank-2 operators on 2x3") {
    for (int trial = 0; trial < 30; ++trial) {
      const Matrix m = random_rank_r_operator(2, 3, 2, rng);
      const ZeroBlockReduction z = zero_block_reduction(m, 2, 3);
      const Matrix t = kron(z.w_row, Matrix::Identity(3, 3)) * m *
                       kron(z.w_col, Matrix::Identity(3, 3));
      CHECK(t.block(z.row * 3, z.col * 3, 3, 3).norm() <= 1e-9 * m.norm());
      CHECK(is_unitary(z.w_row));
      CHECK(is_unitary(z.w_col));
    }
  }
  SUBCASE("rank-3 operators on 3x4") {
    for (int trial = 0; trial < 30; ++trial) {
      const Matrix m = random_rank_r_operator(3, 4, 3, rng);
      const ZeroBlockReduction z = zero_block_reduction(m, 3, 4);
      const Matrix t = kron(z.w_row, Matrix::Identity(4, 4)) * m *
                       kron(z.w_col, Matrix::Identity(4, 4));
      CHECK(t.block(z.row * 4, z.col * 4, 4, 4).norm() <= 1e-9 * m.norm());
    }
  }
}

TEST_CASE("zero_block_reduction rejects operators of high Schmidt rank") {
  Rng rng(61);
  const Matrix m = random_rank_r_operator(2, 3, 4, rng);
  CHECK_THROWS_AS(zero_block_reduction(m, 2, 3), RankTooHigh);
}
