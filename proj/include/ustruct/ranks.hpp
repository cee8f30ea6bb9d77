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
#include <string>
#include <vector>

#include "ustruct/controlled.hpp"

namespace ustruct {

/// Kronecker-structured sum Σ_i r_ops[i] ⊗ s_ops[i] with uniform shapes
/// inside each list.
struct KroneckerSum {
  std::vector<Matrix> r_ops;
  std::vector<Matrix> s_ops;

  int terms() const { return static_cast<int>(r_ops.size()); }
  Matrix assemble(bool transpose_s) const;
};

/// Transposes one tensor factor's indices in place.
Matrix partial_transpose(const Matrix& m, int d_a, int d_b, Side side);

/// Audit trail for one rank-inequality check: the two ranks, the verdict,
/// and the singular values bracketing each rank threshold so borderline
/// instances can be told apart from genuine ones.
struct RankInequalityReport {
  int k = 0;
  int lhs_rank = 0;        // rank(Σ R_i ⊗ S_iᵀ)
  int rhs_rank = 0;        // rank(Σ R_i ⊗ S_i)
  int swapped_rank = 0;    // rank(Σ R_iᵀ ⊗ S_i), equals lhs_rank
  bool holds = false;      // lhs_rank ≤ k · rhs_rank
  double lhs_gap_above = 0.0;  // smallest kept singular value (lhs)
  double lhs_gap_below = 0.0;  // largest dropped singular value (lhs)
  double rhs_gap_above = 0.0;
  double rhs_gap_below = 0.0;
};

RankInequalityReport check_rank_inequality(const KroneckerSum& ks,
                                           const Tolerance& tol = {});

/// Outcome of the partial-transpose rank equality test on one unitary.
struct Rank3UnitaryReport {
  int schmidt_rank = 0;
  std::string controlled_side;  // "A", "B", "both" or "none"
  int rank_u = 0;
  int rank_u_gamma = 0;
  bool equal = false;
  bool asserted = true;  // false in the experimental d_A > 3 regime
};

/**
 * For unitaries of Schmidt rank at most 3 with d_A ≤ 3: confirms the
 * controlled-unitary structure, computes rank(U^Γ) with the B side
 * transposed and checks it equals rank(U) = d_A·d_B. With
 * allow_large_d_a the d_A ≤ 3 precondition is lifted and the report is
 * informational (the classification backing the equality is unproven
 * there).
 */
Rank3UnitaryReport verify_rank3_unitary_equality(const BipartiteUnitary& u,
                                                 const Tolerance& tol,
                                                 std::uint64_t seed,
                                                 bool allow_large_d_a = false);

}  // namespace ustruct
