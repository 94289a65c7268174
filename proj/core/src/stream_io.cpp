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

#include "oca/stream_io.hpp"

#include <fmt/format.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <type_traits>
#include <variant>

namespace oca {
namespace {

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw std::runtime_error("stream csv line " + std::to_string(line_no) + ": " + what);
}

double number(const std::string& s, std::size_t line_no) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') fail(line_no, "cannot parse number '" + s + "'");
  return v;
}

struct Pending {
  long long t = 0;
  RewardOracle reward;
  std::vector<Vector> rows;
};

Request finish(Pending& p, std::size_t line_no) {
  if (p.rows.empty()) fail(line_no, "request " + std::to_string(p.t) + " has no cost rows");
  const Eigen::Index n = p.rows.front().size();
  Matrix b(static_cast<Eigen::Index>(p.rows.size()), n);
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    if (p.rows[i].size() != n) fail(line_no, "ragged cost matrix in request " + std::to_string(p.t));
    b.row(static_cast<Eigen::Index>(i)) = p.rows[i].transpose();
  }
  if (decision_dim(p.reward) != n) fail(line_no, "reward and cost dimensions differ in request " + std::to_string(p.t));
  return Request{std::move(p.reward), std::move(b)};
}

}  // namespace

void write_stream_csv(std::ostream& out, std::span<const Request> stream) {
  fmt::memory_buffer buf;
  auto it = std::back_inserter(buf);
  fmt::format_to(it, "t,record,key,arg,values\n");
  for (std::size_t k = 0; k < stream.size(); ++k) {
    const Request& r = stream[k];
    const std::size_t t = k + 1;
    std::visit(
        [&](const auto& f) {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, LinearBox>) {
            fmt::format_to(it, "{},reward,linear-box,{}", t, f.bound);
            for (double v : f.value) fmt::format_to(it, ",{}", v);
          } else if constexpr (std::is_same_v<F, ScalarQuadratic>) {
            fmt::format_to(it, "{},reward,scalar-quadratic,{},{}", t, f.bound, f.xi);
          } else {
            fmt::format_to(it, "{},reward,bundle-select,1", t);
            for (double v : f.value) fmt::format_to(it, ",{}", v);
          }
        },
        r.reward);
    fmt::format_to(it, "\n");
    for (Eigen::Index i = 0; i < r.cost.rows(); ++i) {
      fmt::format_to(it, "{},cost,{},", t, i + 1);
      for (Eigen::Index j = 0; j < r.cost.cols(); ++j) fmt::format_to(it, ",{}", r.cost(i, j));
      fmt::format_to(it, "\n");
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_stream_csv(const std::string& path, std::span<const Request> stream) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_stream_csv(out, stream);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<Request> read_stream_csv(std::istream& in) {
  std::vector<Request> out;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw std::runtime_error("stream csv: empty input");
  ++line_no;
  if (line.rfind("t,record", 0) != 0) fail(line_no, "unexpected header '" + line + "'");
  bool open = false;
  Pending cur;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 4) fail(line_no, "too few cells");
    const long long t = std::atoll(cells[0].c_str());
    const std::string& record = cells[1];
    if (record == "reward") {
      if (open) out.push_back(finish(cur, line_no));
      cur = Pending{};
      cur.t = t;
      open = true;
      const std::string& family = cells[2];
      const double bound = number(cells[3], line_no);
      Vector values(static_cast<Eigen::Index>(cells.size() - 4));
      for (std::size_t j = 4; j < cells.size(); ++j) values[static_cast<Eigen::Index>(j - 4)] = number(cells[j], line_no);
      if (family == "linear-box") {
        cur.reward = LinearBox{std::move(values), bound};
      } else if (family == "scalar-quadratic") {
        if (values.size() != 1) fail(line_no, "scalar-quadratic needs exactly one value");
        cur.reward = ScalarQuadratic{values[0], bound};
      } else if (family == "bundle-select") {
        cur.reward = BundleSelect{std::move(values)};
      } else {
        fail(line_no, "unknown reward family '" + family + "'");
      }
    } else if (record == "cost") {
      if (!open || t != cur.t) fail(line_no, "cost row without a matching reward row");
      Vector row(static_cast<Eigen::Index>(cells.size() - 4));
      for (std::size_t j = 4; j < cells.size(); ++j) row[static_cast<Eigen::Index>(j - 4)] = number(cells[j], line_no);
      cur.rows.push_back(std::move(row));
    } else {
      fail(line_no, "unknown record kind '" + record + "'");
    }
  }
  if (open) out.push_back(finish(cur, line_no));
  return out;
}

std::vector<Request> read_stream_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return read_stream_csv(in);
}

}  // namespace oca
