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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ustruct/schmidt.hpp"

namespace ustruct {

/// Facts a fixture is expected to satisfy; verified by the test suite.
/// For the block-structure entries, an empty vector asserts that only the
/// trivial single block exists, and nullopt leaves the fact unchecked.
struct ExpectedFacts {
  int schmidt_rank = 0;
  bool controlled_a = false;
  bool controlled_b = false;
  std::optional<int> groups_a;                 // set when controlled from A
  std::optional<int> groups_b;                 // set when controlled from B
  std::optional<std::vector<int>> bcu_a;       // finest A-side block sizes
  std::optional<std::vector<int>> bcu_b;       // finest B-side block sizes
};

struct Fixture {
  std::string name;
  std::string description;
  std::function<BipartiteUnitary()> build;
  ExpectedFacts expected;
};

/// The built-in gallery of named unitaries exercised across the suite.
const std::vector<Fixture>& fixture_gallery();

/// Looks a fixture up by name; throws Error when absent.
const Fixture& fixture_by_name(const std::string& name);

}  // namespace ustruct
