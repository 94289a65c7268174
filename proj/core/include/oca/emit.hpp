// Copyright 2026 The OCA Authors
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

// Report files written into an output directory:
//
//   runs.csv                one row per (policy, T, kappa, rep)
//   aggregate.csv           one row per (policy, T, kappa)
//   regret_vs_T.csv         mean/std regret series
//   remaining_resource.csv  mean B_t,i / (d_i T) of the most depleted resource
//   tradeoff.csv            per-step reward against allocation entropy
//
// plus an .svg chart next to each series file when requested. Wall-clock
// times are never written, so equal seeds give byte-identical files.

#ifndef OCA_EMIT_HPP_
#define OCA_EMIT_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "oca/experiment.hpp"

namespace oca {

enum class EmitFormat { kCsv, kCsvAndSvg };

void write_runs_csv(std::ostream& out, const RegretReport& report);
void write_aggregate_csv(std::ostream& out, const RegretReport& report);
void write_regret_series_csv(std::ostream& out, const RegretReport& report);
void write_resource_series_csv(std::ostream& out, const RegretReport& report);
void write_tradeoff_csv(std::ostream& out, const RegretReport& report);

/// Creates `dir` if needed and returns the written paths. Throws
/// std::runtime_error naming the path on I/O failure.
std::vector<std::string> emit(const RegretReport& report, const std::string& dir,
                              EmitFormat format = EmitFormat::kCsvAndSvg);

}  // namespace oca

#endif  // OCA_EMIT_HPP_
