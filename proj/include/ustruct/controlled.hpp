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
#include <optional>
#include <vector>

#include "ustruct/random.hpp"
#include "ustruct/schmidt.hpp"

namespace ustruct {

enum class Side { A, B };

const char* side_name(Side side);

/// One block of a controlled form: the control-basis indices it covers and
/// the unitary applied to the target side while the control lies in them.
struct ControlledGroup {
  std::vector<int> indices;
  Matrix v;
};

/**
 * Explicit controlled structure of a bipartite unitary.
 *
 * For side == A the reconstruction is (q ⊗ I) · (Σ_g P_g ⊗ v_g) · (r ⊗ I),
 * with P_g the projector onto the group's computational-basis indices on
 * the A side; for side == B it is (I ⊗ q) · (Σ_g v_g ⊗ P_g) · (I ⊗ r).
 * q and r act on the controlling side, the v's on the other one. Distinct
 * groups carry v's that are not equal up to a global phase.
 */
struct ControlledForm {
  Side side = Side::A;
  int d_ctrl = 0;
  int d_other = 0;
  Matrix q;
  Matrix r;
  std::vector<ControlledGroup> groups;

  int group_count() const { return static_cast<int>(groups.size()); }
  Matrix reconstruct() const;
};

/**
 * Simultaneous block structure of one side's Schmidt factors: for every
 * factor F on that side, w_left† · F · w_right is block-diagonal with the
 * declared block sizes (listed largest first).
 */
struct BlockStructure {
  Side side = Side::A;
  Matrix w_left;
  Matrix w_right;
  std::vector<int> block_sizes;
};

/// Outcome of the controlled-unitary criterion, with the two matrix
/// families it inspected and the worst residual seen, for diagnostics.
struct ControlledCheck {
  bool is_controlled = false;
  std::vector<Matrix> left_family;   // F_i F_j† products
  std::vector<Matrix> right_family;  // F_i† F_j products
  double max_residual = 0.0;         // worst normality/commutator residual,
                                     // relative to the tolerance scaling
};

/**
 * Decides whether U is locally equivalent to a unitary controlled from the
 * given side: all F_i F_j† must be normal and pairwise commuting, and the
 * same for all F_i† F_j, where the F's are the Schmidt factors on that side.
 */
ControlledCheck check_controlled(const BipartiteUnitary& u, Side side,
                                 const Tolerance& tol = {});

/**
 * Unitary W such that W† · M · W is diagonal for every member of a family
 * of pairwise commuting normal matrices.
 */
Matrix joint_diagonalize(const std::vector<Matrix>& family,
                         const Tolerance& tol, std::uint64_t seed);

struct SimultaneousSvd {
  Matrix q;
  Matrix r;
  std::vector<Vector> diags;  // q† · a_ops[j] · r† = diag(diags[j])
};

/**
 * Common pair of unitaries (Q, R) rendering an entire family diagonal:
 * a_ops[j] = Q · diag(diags[j]) · R for all j. Exists iff the family
 * passes the controlled-unitary criterion; throws NoSimultaneousSVD
 * otherwise.
 */
SimultaneousSvd simultaneous_svd(const std::vector<Matrix>& a_ops,
                                 const Tolerance& tol, std::uint64_t seed);

ControlledForm extract_controlled_form(const BipartiteUnitary& u, Side side,
                                       const Tolerance& tol, std::uint64_t seed);

/**
 * Finest simultaneous block-diagonalization of the side's Schmidt factors
 * under left/right unitaries, or nullopt when only the trivial single
 * block exists.
 */
std::optional<BlockStructure> finest_block_structure(const BipartiteUnitary& u,
                                                     Side side,
                                                     const Tolerance& tol,
                                                     std::uint64_t seed);

/**
 * Local rotation pair zeroing one d_B×d_B block of an operator of Schmidt
 * rank at most d_A: (w_row ⊗ I) · M · (w_col ⊗ I) has its (row, col)
 * block zero. Either unitary may be the identity when the corresponding
 * rotation is not needed.
 */
struct ZeroBlockReduction {
  Matrix w_row;
  Matrix w_col;
  int row = 0;
  int col = 0;
};

ZeroBlockReduction zero_block_reduction(const Matrix& m, int d_a, int d_b,
                                        const Tolerance& tol = {});

}  // namespace ustruct
