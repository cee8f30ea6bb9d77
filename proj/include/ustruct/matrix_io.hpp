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

#include <string>

#include "ustruct/equivalence.hpp"
#include "ustruct/protocol.hpp"
#include "ustruct/schmidt.hpp"

namespace ustruct {

/**
 * On-disk form of a bipartite operator: declared subsystem dimensions, an
 * entry grid of [re, im] pairs, and optional name/description metadata.
 * The JSON rendering is deterministic, so emit → parse → emit is
 * byte-identical.
 */
struct MatrixFile {
  int d_a = 0;
  int d_b = 0;
  std::string name;
  std::string description;
  Matrix matrix;
};

MatrixFile load_matrix_file(const std::string& path);
std::string matrix_file_to_string(const MatrixFile& file);
void save_matrix_file(const MatrixFile& file, const std::string& path);

/// Reads just the entry grid of a matrix document (MatrixFile or a bare
/// {"matrix": ...} object), for operators that are not bipartite.
Matrix load_square_matrix(const std::string& path);

/// {"s_ops": [...], "t_ops": [...]} with one matrix per party in each list.
SLWitness load_witness_file(const std::string& path);

/// {"subsystems": [{"label": ..., "dim": ...}], "amplitudes": [[re, im]]}.
PureState load_state_file(const std::string& path);
void save_state_file(const PureState& state, const std::string& path);

}  // namespace ustruct
