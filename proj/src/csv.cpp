// Copyright 2026 The ftpl Authors.
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

#include "ftpl/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace ftpl {

std::string csv_num(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_num(int v) { return std::to_string(v); }
std::string csv_num(std::int64_t v) { return std::to_string(v); }
std::string csv_num(std::uint64_t v) { return std::to_string(v); }

CsvFile::CsvFile(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvFile::row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw std::logic_error("CsvFile: row width does not match header");
  }
  rows_.push_back(std::move(cells));
}

void CsvFile::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("CsvFile: cannot open " + path.string());
  }
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  emit(header_);
  for (const auto& r : rows_) emit(r);
  if (!out) {
    throw std::runtime_error("CsvFile: write failed for " + path.string());
  }
}

}  // namespace ftpl
