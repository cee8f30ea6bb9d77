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
#include <random>

#include "ustruct/linalg.hpp"

namespace ustruct {

// Every randomized routine takes an explicit seed; there is no global
// engine anywhere in the library.
using Rng = std::mt19937_64;

/// Matrix with i.i.d. standard complex Gaussian entries.
Matrix random_gaussian(int rows, int cols, Rng& rng);

/// Haar-distributed d×d unitary (QR of a Ginibre matrix with the phase fix).
Matrix haar_unitary(int d, Rng& rng);

/// Random unit vector of dimension d.
Vector random_state_vector(int d, Rng& rng);

}  // namespace ustruct
