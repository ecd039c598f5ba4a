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

#ifndef ELICIT_JOURNAL_H_
#define ELICIT_JOURNAL_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace elicit {

// Test hook: after `budget` more bytes have been written through
// AppendFile, the next write is cut short at the budget and the process
// exits immediately with status 75. Negative disables. Also read from the
// ELICIT_CRASH_AFTER_BYTES environment variable on first use.
void SetCrashBudget(std::int64_t budget);

// Append-only file of LF-terminated lines. Opening drops any partial last
// line and, for an empty file, writes `header` (when non-empty).
class AppendFile {
 public:
  AppendFile() = default;
  AppendFile(const std::filesystem::path& path, std::string_view header);
  ~AppendFile();
  AppendFile(AppendFile&& other) noexcept;
  AppendFile& operator=(AppendFile&& other) noexcept;
  AppendFile(const AppendFile&) = delete;
  AppendFile& operator=(const AppendFile&) = delete;

  // Appends `text` (which must end in '\n') and returns its start offset.
  std::uint64_t Append(std::string_view text);
  void Truncate(std::uint64_t size);
  std::uint64_t size() const { return size_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  std::uint64_t size_ = 0;
};

// Reads `path` and returns its complete lines, without terminators.
std::vector<std::string> ReadCompleteLines(const std::filesystem::path& path);

// Writes `content` to a sibling temporary and renames it over `path`.
void WriteFileAtomically(const std::filesystem::path& path,
                         std::string_view content);

}  // namespace elicit

#endif  // ELICIT_JOURNAL_H_
