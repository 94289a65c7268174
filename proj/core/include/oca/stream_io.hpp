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

// Request streams as CSV. Each request is a row group:
//
//   t,reward,<family>,<bound>,v_1,...,v_n
//   t,cost,<row i>,b_i1,...,b_in          (one row per resource)
//
// ScalarQuadratic stores xi as v_1; BundleSelect writes bound 1.
// Rows are ragged; the header is "t,record,key,arg,values".

#ifndef OCA_STREAM_IO_HPP_
#define OCA_STREAM_IO_HPP_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "oca/reward.hpp"

namespace oca {

void write_stream_csv(std::ostream& out, std::span<const Request> stream);
void write_stream_csv(const std::string& path, std::span<const Request> stream);

/// Throws std::runtime_error with the offending line number on malformed input.
std::vector<Request> read_stream_csv(std::istream& in);
std::vector<Request> read_stream_csv(const std::string& path);

}  // namespace oca

#endif  // OCA_STREAM_IO_HPP_
