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
#include <utility>
#include <vector>

#include "ustruct/controlled.hpp"

namespace ustruct {

struct Subsystem {
  std::string label;
  int dim = 0;
};

/**
 * Normalized pure state over labeled subsystems. The amplitude index runs
 * over subsystem digits with the first subsystem most significant, the
 * same row-major convention kron() uses.
 */
class PureState {
 public:
  PureState() = default;
  PureState(std::vector<Subsystem> subsystems, Vector amplitudes);

  const std::vector<Subsystem>& subsystems() const { return subsystems_; }
  const Vector& amplitudes() const { return amplitudes_; }
  int dim() const { return static_cast<int>(amplitudes_.size()); }
  bool has(const std::string& label) const;
  int subsystem_index(const std::string& label) const;
  int dim_of(const std::string& label) const;

  /// Tensor product; labels must not collide.
  static PureState product(const PureState& a, const PureState& b);

  /// Applies an operator to the listed subsystems (in the listed order).
  PureState applied(const Matrix& op,
                    const std::vector<std::string>& labels) const;

  /// Computational-basis measurement of one subsystem: returns the outcome
  /// probability and the collapsed normalized state (subsystem retained in
  /// the outcome basis state). Probability zero leaves the state unusable.
  std::pair<double, PureState> measured(const std::string& label,
                                        int outcome) const;

  /// Removes a subsystem that sits exactly in a computational basis state;
  /// throws InvalidState otherwise. The outcome is reported when asked.
  PureState without_basis_subsystem(const std::string& label,
                                    int* outcome = nullptr) const;

  PureState relabeled(const std::string& from, const std::string& to) const;

  /// Reorders subsystems into the given label order (a permutation of the
  /// current labels).
  PureState reordered(const std::vector<std::string>& order) const;

 private:
  std::vector<Subsystem> subsystems_;
  Vector amplitudes_;
};

/// |Ψ_r⟩ = (1/√r) Σ |ii⟩ over two r-dimensional subsystems.
PureState maximally_entangled(int r, const std::string& label_x = "R1",
                              const std::string& label_y = "R2");

/// Von Neumann entropy (base 2) of the reduced state on the given labels.
double entanglement_entropy(const PureState& state,
                            const std::vector<std::string>& part);

/// Squared overlap |⟨a|b⟩|² after aligning subsystem order by label.
double overlap2(const PureState& a, const PureState& b);

Matrix shift_operator(int d);    // X|k⟩ = |k+1 mod d⟩
Matrix phase_operator(int d);    // Z|k⟩ = ω^k |k⟩
Matrix fourier_operator(int d);  // F|k⟩ = (1/√d) Σ_j ω^{jk} |j⟩

/// Two-qudit unitary mapping |m,n⟩ to the generalized Bell state
/// (X^m Z^n ⊗ I)|Ψ_d⟩; its adjoint turns a Bell measurement into two
/// computational ones.
Matrix bell_transform(int d);

enum class ProtocolKind { teleport_twice, controlled_a, controlled_b };

const char* protocol_name(ProtocolKind kind);

struct ProtocolRound {
  std::string measuring_party;
  int outcome = 0;
  std::string message;
  std::string correction;
};

struct ProtocolTranscript {
  ProtocolKind protocol = ProtocolKind::teleport_twice;
  int resource_rank = 1;
  double ebits = 0.0;  // log2(resource_rank)
  std::vector<ProtocolRound> rounds;
  double process_fidelity = 0.0;  // worst branch fidelity observed
  int branches_checked = 0;
  bool exhaustive = true;
};

struct ProtocolRun {
  PureState output;               // measured ancillas removed
  ProtocolTranscript transcript;
  PureState final_with_ancillas;  // sampled branch before ancilla removal
};

/**
 * Implements U by teleporting A to B's side, applying U locally and
 * teleporting the output back, consuming two |Ψ_{d_A}⟩ pairs. The input
 * must carry subsystems "A" and "B" of matching dimensions; any further
 * subsystems ride along as references.
 */
ProtocolRun simulate_teleport_protocol(const BipartiteUnitary& u,
                                       const PureState& input,
                                       std::uint64_t seed);

/**
 * Implements a controlled form with m groups using |Ψ_m⟩: the controlling
 * party correlates its group index into its resource half and measures it,
 * the other party shifts by the inverse outcome, applies the group
 * unitaries locally and measures its half in the Fourier basis, and the
 * controlling party applies the conjugate phase correction.
 */
ProtocolRun simulate_controlled_protocol(const ControlledForm& cf,
                                         const PureState& input,
                                         std::uint64_t seed);

/**
 * Cost pipeline for Schmidt-rank-3 unitaries with d_A ∈ {2, 3} and
 * d_A ≤ d_B: extracts controlled forms on both sides, picks the cheapest
 * valid route among controlled-from-A, controlled-from-B and double
 * teleportation, and runs it. The achieved resource rank never exceeds
 * min{d_A², d_B}.
 */
ProtocolRun implement_schmidt_rank3(const BipartiteUnitary& u,
                                    const PureState& input,
                                    const Tolerance& tol, std::uint64_t seed);

}  // namespace ustruct
