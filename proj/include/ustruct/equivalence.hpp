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

#include <cstdint>
#include <utility>
#include <vector>

#include "ustruct/controlled.hpp"

namespace ustruct {

/**
 * Witness of stochastic-local equivalence between two multipartite
 * unitaries: invertible operators per party with
 * U = (s_1 ⊗ … ⊗ s_p) · V · (t_1 ⊗ … ⊗ t_p).
 */
struct SLWitness {
  std::vector<Matrix> s_ops;
  std::vector<Matrix> t_ops;

  int parties() const { return static_cast<int>(s_ops.size()); }
};

/// Unitary replacement for an SL witness, with the achieved residuals.
struct LocalEquivalenceWitness {
  std::vector<Matrix> q_ops;
  std::vector<Matrix> r_ops;
  double residual = 0.0;           // ‖U − (⊗q)·V·(⊗r)‖_F
  double internal_residual = 0.0;  // ‖U' − V'‖_F of the rotated identity
};

/**
 * Turns a valid SL witness between unitaries U and V into a local-unitary
 * one: q_i and r_i are the unitary polar-style factors E_i·F_i and G_i·H_i
 * of the witness operators' singular value decompositions. Parties whose
 * witness operators are the identity keep identity outputs exactly.
 */
LocalEquivalenceWitness sl_to_lu(const Matrix& u, const Matrix& v,
                                 const SLWitness& witness,
                                 const Tolerance& tol = {});

/**
 * Builds the controlled form of a unitary that is SL-equivalent to a
 * controlled-type operator Σ_j R_j ⊗ V_j with P_j R_j P_j = R_j for
 * mutually orthogonal projectors P_j on the A side. The reduction runs
 * per-term singular value decompositions inside each projector block and
 * finishes with the unitary-witness canonicalization.
 */
ControlledForm controlled_from_sl_witness(
    const BipartiteUnitary& u,
    const std::vector<std::pair<Matrix, Matrix>>& terms,
    const std::vector<Matrix>& projectors, const SLWitness& witness,
    const Tolerance& tol, std::uint64_t seed);

}  // namespace ustruct
