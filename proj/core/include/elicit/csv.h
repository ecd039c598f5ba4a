// Copyright 2026 The Elicit Authors
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

#ifndef ELICIT_CSV_H_
#define ELICIT_CSV_H_

#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace elicit {

// Parse or validation failure located at a 1-based line of a file. Line 1 is
// the header.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::string file, std::size_t line, const std::string& what);

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }
  const std::string& reason() const { return reason_; }

 private:
  std::string file_;
  std::size_t line_;
  std::string reason_;
};

// Splits one CSV record. Double-quoted fields may contain commas and doubled
// quotes. Returns nullopt for an unterminated quote.
std::optional<std::vector<std::string>> SplitCsvLine(std::string_view line);

// Quotes a field when it contains a comma, quote or newline.
std::string CsvEscape(std::string_view field);

// Line-oriented reader that tracks line numbers and strips a trailing CR.
class CsvReader {
 public:
  CsvReader(std::istream& in, std::string name);

  // Reads the next non-empty record; false at end of input.
  bool Next(std::vector<std::string>& fields);
  std::size_t line() const { return line_; }
  const std::string& name() const { return name_; }

  [[noreturn]] void Fail(const std::string& what) const;

 private:
  std::istream& in_;
  std::string name_;
  std::size_t line_ = 0;
  std::string buffer_;
};

std::int64_t ParseInt64(std::string_view text);

}  // namespace elicit

#endif  // ELICIT_CSV_H_
