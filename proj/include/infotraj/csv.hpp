// Copyright 2026 The infotraj Authors
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

#ifndef INFOTRAJ_CSV_HPP_
#define INFOTRAJ_CSV_HPP_

#include <string>
#include <vector>

namespace infotraj {

// Minimal comma-separated table: no quoting, '.' decimal separator, header
// row first. Numeric cells use format_double so tables are bit-exact.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
};

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  CsvWriter& cell(const std::string& value);
  CsvWriter& cell(double value);
  CsvWriter& cell(long long value);
  CsvWriter& cell(int value) { return cell(static_cast<long long>(value)); }
  CsvWriter& cell(std::size_t value) { return cell(static_cast<long long>(value)); }
  void end_row();

  std::string str() const;
  void save(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::string> current_;
};

CsvTable parse_csv(const std::string& text);
CsvTable load_csv(const std::string& path);

// Whole-file helpers. write_text creates parent directories and replaces the
// file atomically (temporary file plus rename).
std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace infotraj

#endif  // INFOTRAJ_CSV_HPP_
