// Copyright 2026 The lsqforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LSQFORGE_ORACLE_HPP_
#define LSQFORGE_ORACLE_HPP_

#include <optional>
#include <string>

#include "lsqforge/interp.hpp"
#include "lsqforge/report.hpp"

namespace lsqforge::oracle {

// Ground-truth sequential execution. Deliberately a second implementation:
// sparse memory, no precomputed analyses, its own evaluator. Shares only the
// parsed IR with ir::interpret.
ir::InterpResult run(const ir::Module& m, const ir::Kernel& k, const ir::RunInputs& inputs,
                     std::uint64_t step_limit = 100'000'000);

struct Diff {
  std::string what;  // human-readable description of the first divergence
};

// Compares final memory element-wise and, for each protected base, the
// consumed (non-discarded) load values in request order against the oracle's
// load trace. Returns nullopt when equivalent.
std::optional<Diff> check_equivalence(const ir::Module& m, const ir::Kernel& original,
                                      const ir::RunInputs& inputs, const sim::SimReport& report,
                                      const std::vector<int>& protected_bases);

}  // namespace lsqforge::oracle

#endif  // LSQFORGE_ORACLE_HPP_
