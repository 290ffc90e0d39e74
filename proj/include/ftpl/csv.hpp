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

#ifndef FTPL_CSV_HPP_
#define FTPL_CSV_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ftpl {

// Shortest round-trip decimal form (std::to_chars), byte-deterministic for a
// given double. NaN renders as an empty cell.
std::string csv_num(double v);
std::string csv_num(int v);
std::string csv_num(std::int64_t v);
std::string csv_num(std::uint64_t v);

// Accumulates rows and writes the whole file in one pass: header first,
// '\n' line ends, UTF-8, no quoting (writers never emit commas in cells).
class CsvFile {
 public:
  explicit CsvFile(std::vector<std::string> header);

  void row(std::vector<std::string> cells);
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace ftpl

#endif  // FTPL_CSV_HPP_
