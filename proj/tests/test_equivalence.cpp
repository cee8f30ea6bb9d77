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
#include "ustruct/equivalence.hpp"
#include "ustruct/fixtures.hpp"

using namespace ustruct;
using namespace ustruct::testutil;

namespace {

Matrix kron_all(const std::vector<Matrix>& ops) {
  Matrix out = Matrix::Identity(1, 1);
  for (const Matrix& m : ops) out = kron(out, m);
  return out;
}

/// Cyclic-shift construction with a genuinely non-unitary diagonal witness:
/// V = Σ_j |j+1 mod d⟩⟨j| ⊗ W_j satisfies (diag(λ) ⊗ I) V (diag(λ') ⊗ I) = V
/// whenever λ_{j+1} λ'_j = 1, so (V, V) carries a valid SL witness.
struct ShiftInstance {
  Matrix v;
  SLWitness witness;
};

ShiftInstance shift_instance(int d, int d_rest, Rng& rng,
                             const std::vector<int>& rest_dims) {
  Matrix v = Matrix::Zero(d * d_rest, d * d_rest);
  for (int j = 0; j < d; ++j) {
    Matrix shift = Matrix::Zero(d, d);
    shift((j + 1) % d, j) = 1;
    v += kron(shift, haar_unitary(d_rest, rng));
  }
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  std::uniform_real_distribution<double> angle(0.0, 2 * 3.14159265358979);
  Vector lambda(d), lambda_prime(d);
  for (int j = 0; j < d; ++j) lambda(j) = std::polar(mag(rng), angle(rng));
  for (int j = 0; j < d; ++j) lambda_prime(j) = 1.0 / lambda((j + 1) % d);

  SLWitness w;
  w.s_ops.push_back(Matrix(lambda.asDiagonal()));
  w.t_ops.push_back(Matrix(lambda_prime.asDiagonal()));
  for (int rd : rest_dims) {
    w.s_ops.push_back(Matrix::Identity(rd, rd));
    w.t_ops.push_back(Matrix::Identity(rd, rd));
  }
  return {v, w};
}

}  // namespace

TEST_CASE("unitary witnesses map through unchanged in action") {
  Rng rng(71);
  const Matrix v = haar_unitary(6, rng);
  SLWitness w;
  w.s_ops = {haar_unitary(2, rng), haar_unitary(3, rng)};
  w.t_ops = {haar_unitary(2, rng), haar_unitary(3, rng)};
  const Matrix u = kron_all(w.s_ops) * v * kron_all(w.t_ops);
  const LocalEquivalenceWitness lu = sl_to_lu(u, v, w);
  CHECK(lu.residual <= 1e-9);
  CHECK(lu.internal_residual <= 1e-9);
  CHECK((u - kron_all(lu.q_ops) * v * kron_all(lu.r_ops)).norm() <= 1e-9);
  for (const Matrix& q : lu.q_ops) CHECK(is_unitary(q));
  for (const Matrix& r : lu.r_ops) CHECK(is_unitary(r));
}

TEST_CASE("shift construction with a non-unitary witness, two parties") {
  Rng rng(73);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + (trial % 3);
    const ShiftInstance inst = shift_instance(d, 3, rng, {3});
    // witness validity oracle: the construction leaves V unchanged
    CHECK((kron_all(inst.witness.s_ops) * inst.v *
               kron_all(inst.witness.t_ops) -
           inst.v)
              .norm() <= 1e-10);
    CHECK(is_unitary(inst.v));
    const LocalEquivalenceWitness lu =
        sl_to_lu(inst.v, inst.v, inst.witness);
    CHECK(lu.residual <= 1e-9);
    for (const Matrix& q : lu.q_ops) CHECK(is_unitary(q));
    for (const Matrix& r : lu.r_ops) CHECK(is_unitary(r));
  }
}

TEST_CASE("shift construction at three parties") {
  Rng rng(79);
  const ShiftInstance inst = shift_instance(3, 4, rng, {2, 2});
  const LocalEquivalenceWitness lu = sl_to_lu(inst.v, inst.v, inst.witness);
  CHECK(lu.residual <= 1e-9);
  CHECK(lu.q_ops.size() == 3);
  // parties 2 and 3 carried identity witnesses
  CHECK(lu.q_ops[1] == Matrix::Identity(2, 2));
  CHECK(lu.q_ops[2] == Matrix::Identity(2, 2));
  CHECK(lu.r_ops[1] == Matrix::Identity(2, 2));
  CHECK(lu.r_ops[2] == Matrix::Identity(2, 2));
}

TEST_CASE("identity parties yield identity outputs exactly") {
  Rng rng(83);
  const Matrix v = haar_unitary(4, rng);
  SLWitness w;
  w.s_ops = {haar_unitary(2, rng), Matrix::Identity(2, 2)};
  w.t_ops = {haar_unitary(2, rng), Matrix::Identity(2, 2)};
  const Matrix u = kron_all(w.s_ops) * v * kron_all(w.t_ops);
  const LocalEquivalenceWitness lu = sl_to_lu(u, v, w);
  CHECK(lu.q_ops[1] == Matrix::Identity(2, 2));
  CHECK(lu.r_ops[1] == Matrix::Identity(2, 2));
}

TEST_CASE("idempotence on a unitary witness") {
  Rng rng(89);
  const Matrix v = haar_unitary(6, rng);
  SLWitness w;
  w.s_ops = {haar_unitary(2, rng), haar_unitary(3, rng)};
  w.t_ops = {haar_unitary(2, rng), haar_unitary(3, rng)};
  const Matrix u = kron_all(w.s_ops) * v * kron_all(w.t_ops);
  const LocalEquivalenceWitness lu = sl_to_lu(u, v, w);
  CHECK((kron_all(lu.q_ops) * v * kron_all(lu.r_ops) -
         kron_all(w.s_ops) * v * kron_all(w.t_ops))
            .norm() <= 1e-9);
}

TEST_CASE("invalid witnesses are rejected") {
  Rng rng(97);
  const Matrix v = haar_unitary(4, rng);
  const Matrix u = haar_unitary(4, rng);  // unrelated
  SLWitness w;
  w.s_ops = {Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
  w.t_ops = {Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
  CHECK_THROWS_AS(sl_to_lu(u, v, w), WitnessResidualTooLarge);
}

TEST_CASE("singular witnesses are rejected") {
  Rng rng(101);
  const Matrix v = haar_unitary(4, rng);
  SLWitness w;
  Matrix s = Matrix::Identity(2, 2);
  s(1, 1) = 0.0;
  w.s_ops = {s, Matrix::Identity(2, 2)};
  w.t_ops = {Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
  // the witness equation cannot hold with a singular s, so build the
  // product and expect the invertibility check to fire first
  const Matrix u = v;
  CHECK_THROWS(sl_to_lu(u, v, w));
}

TEST_CASE("non-unitary operators are rejected") {
  SLWitness w;
  w.s_ops = {Matrix::Identity(2, 2)};
  w.t_ops = {Matrix::Identity(2, 2)};
  CHECK_THROWS_AS(
      sl_to_lu(Matrix::Identity(2, 2) * 2.0, Matrix::Identity(2, 2) * 2.0, w),
      NotUnitary);
}

TEST_CASE("controlled_from_sl_witness with a trivial witness") {
  const BipartiteUnitary cnot = fixture_by_name("cnot").build();
  std::vector<std::pair<Matrix, Matrix>> terms;
  std::vector<Matrix> projectors;
  for (int j = 0; j < 2; ++j) {
    Matrix p = Matrix::Zero(2, 2);
    p(j, j) = 1;
    projectors.push_back(p);
  }
  terms.push_back({projectors[0], Matrix::Identity(2, 2)});
  Matrix x = Matrix::Zero(2, 2);
  x(0, 1) = 1;
  x(1, 0) = 1;
  terms.push_back({projectors[1], x});
  SLWitness w;
  w.s_ops = {Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
  w.t_ops = {Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
  const ControlledForm cf =
      controlled_from_sl_witness(cnot, terms, projectors, w, {}, 7);
  CHECK(cf.group_count() == 2);
  CHECK((cf.reconstruct() - cnot.matrix).norm() <= 1e-9);
}

TEST_CASE("controlled_from_sl_witness recovers scaled controlled forms") {
  Rng rng(103);
  for (int trial = 0; trial < 8; ++trial) {
    const int d_a = 2 + (trial % 3);
    const int d_b = 2 + ((trial + 1) % 3);
    // diagonal positive witnesses compensating inside each term
    std::uniform_real_distribution<double> mag(0.5, 2.0);
    std::vector<std::pair<Matrix, Matrix>> terms;
    std::vector<Matrix> projectors;
    Matrix u_mid = Matrix::Zero(d_a * d_b, d_a * d_b);
    Vector s_diag(d_a), t_diag(d_a);
    for (int j = 0; j < d_a; ++j) {
      Matrix p = Matrix::Zero(d_a, d_a);
      p(j, j) = 1;
      projectors.push_back(p);
      const Matrix uj = haar_unitary(d_b, rng);
      const double c = mag(rng);
      s_diag(j) = c;
      t_diag(j) = 1.0 / c;
      terms.push_back({p, uj});
      u_mid += kron(p, uj);
    }
    SLWitness w;
    w.s_ops = {Matrix(s_diag.asDiagonal()), Matrix::Identity(d_b, d_b)};
    w.t_ops = {Matrix(t_diag.asDiagonal()), Matrix::Identity(d_b, d_b)};
    // (s ⊗ I)(Σ P_j ⊗ U_j)(t ⊗ I) = Σ s_j t_j P_j ⊗ U_j = U
    const BipartiteUnitary u = BipartiteUnitary::checked(d_a, d_b, u_mid);
    const ControlledForm cf =
        controlled_from_sl_witness(u, terms, projectors, w, {}, 11 + trial);
    CHECK(cf.group_count() == d_a);
    CHECK((cf.reconstruct() - u.matrix).norm() <= 1e-9);
    for (const ControlledGroup& g : cf.groups) CHECK(is_unitary(g.v));
  }
}

TEST_CASE("controlled_from_sl_witness handles multi-dimensional blocks") {
  Rng rng(107);
  const int d_a = 4, d_b = 3;
  // two 2-dimensional projector blocks with invertible R_j inside them
  std::vector<Matrix> projectors;
  std::vector<std::pair<Matrix, Matrix>> terms;
  Matrix target = Matrix::Zero(d_a * d_b, d_a * d_b);
  Matrix s_a = Matrix::Zero(d_a, d_a);
  Matrix t_a = Matrix::Zero(d_a, d_a);
  for (int blk = 0; blk < 2; ++blk) {
    Matrix p = Matrix::Zero(d_a, d_a);
    p(2 * blk, 2 * blk) = 1;
    p(2 * blk + 1, 2 * blk + 1) = 1;
    projectors.push_back(p);
    const Matrix m_j = random_gaussian(2, 2, rng) +
                       3.0 * Matrix::Identity(2, 2);  // safely invertible
    Matrix r_j = Matrix::Zero(d_a, d_a);
    r_j.block(2 * blk, 2 * blk, 2, 2) = m_j;
    const Matrix u_j = haar_unitary(d_b, rng);
    terms.push_back({r_j, u_j});
    target += kron(p, u_j);
    // block-diagonal witness: s_j random invertible, t_j = (s_j m_j)^{-1}
    const Matrix s_j = random_gaussian(2, 2, rng) +
                       3.0 * Matrix::Identity(2, 2);
    s_a.block(2 * blk, 2 * blk, 2, 2) = s_j;
    t_a.block(2 * blk, 2 * blk, 2, 2) = (s_j * m_j).inverse();
  }
  SLWitness w;
  w.s_ops = {s_a, Matrix::Identity(d_b, d_b)};
  w.t_ops = {t_a, Matrix::Identity(d_b, d_b)};
  const BipartiteUnitary u = BipartiteUnitary::checked(d_a, d_b, target);
  CHECK((kron(s_a, Matrix::Identity(d_b, d_b)) *
             (kron(terms[0].first, terms[0].second) +
              kron(terms[1].first, terms[1].second)) *
             kron(t_a, Matrix::Identity(d_b, d_b)) -
         target)
            .norm() <= 1e-9);
  const ControlledForm cf =
      controlled_from_sl_witness(u, terms, projectors, w, {}, 13);
  CHECK(cf.group_count() == 2);
  CHECK((cf.reconstruct() - u.matrix).norm() <= 1e-9);
}

TEST_CASE("broken projector sandwiches are rejected") {
  const BipartiteUnitary cnot = fixture_by_name("cnot").build();
  std::vector<Matrix> projectors;
  for (int j = 0; j < 2; ++j) {
    Matrix p = Matrix::Zero(2, 2);
    p(j, j) = 1;
    projectors.push_back(p);
  }
  std::vector<std::pair<Matrix, Matrix>> terms;
  Matrix r0 = Matrix::Zero(2, 2);
  r0(0, 0) = 1;
  r0(0, 1) = 0.5;  // leaks outside P_0
  terms.push_back({r0, Matrix::Identity(2, 2)});
  Matrix x = Matrix::Zero(2, 2);
  x(0, 1) = 1;
  x(1, 0) = 1;
  terms.push_back({projectors[1], x});
  SLWitness w;
  w.s_ops = {Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
  w.t_ops = {Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
  CHECK_THROWS_AS(
      controlled_from_sl_witness(cnot, terms, projectors, w, {}, 3),
      BadBlockSupport);
}
