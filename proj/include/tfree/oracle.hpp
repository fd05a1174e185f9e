// Copyright 2026 The tfree Authors
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

// Brute-force reference implementations. Every function here enumerates
// all copies of T^(r) on [n] from scratch and is meant for tests and the
// oracle-test mode only.

#ifndef TFREE_ORACLE_HPP
#define TFREE_ORACLE_HPP

#include <span>
#include <stdexcept>
#include <vector>

#include "tfree/combinatorics.hpp"
#include "tfree/process.hpp"

namespace tfree::oracle {

// Raised when an oracle input breaks the caller's contract, e.g. an edge
// set that already contains a copy of T^(r).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Refuses n above this ceiling (std::invalid_argument).
inline constexpr int kDefaultMaxN = 12;

// All copies of T^(r) on [n] as member rank lists (b_1..b_r, a), generated
// by choosing the core and then the crossing set.
std::vector<std::vector<Rank>> all_copies(int n, int r, int max_n = kDefaultMaxN);

struct Partition {
  std::vector<RSet> open;
  std::vector<RSet> closed;
  std::vector<RSet> edges;
};

// O, C and E recomputed from the edge set alone. Throws ContractViolation if
// the edges already contain a copy.
Partition oracle_partition(std::span<const RSet> edges, int n, int r, int max_n = kDefaultMaxN);
std::vector<RSet> oracle_open_set(std::span<const RSet> edges, int n, int r, int max_n = kDefaultMaxN);

bool oracle_is_Tr_free(std::span<const RSet> edges, int n, int r, int max_n = kDefaultMaxN);

// C_e by definition: each open f != e is tested by scanning every copy of
// G + e + f for one that uses both e and f.
std::vector<RSet> oracle_Ce(std::span<const RSet> edges, const RSet& e, int n, int r,
                            int max_n = kDefaultMaxN);

// Compares the engine's status array with oracle_partition. Returns an empty
// string on agreement, otherwise a description of the first mismatch.
std::string compare_with_engine(const ProcessState& state, int max_n = kDefaultMaxN);

}  // namespace tfree::oracle

#endif  // TFREE_ORACLE_HPP
