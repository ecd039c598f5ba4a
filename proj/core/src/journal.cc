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

#include "elicit/journal.h"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace elicit {
namespace {

std::atomic<std::int64_t> crash_budget{-1};
std::once_flag crash_env_once;

void LoadCrashBudgetFromEnv() {
  std::call_once(crash_env_once, [] {
    if (const char* v = std::getenv("ELICIT_CRASH_AFTER_BYTES")) {
      crash_budget.store(std::strtoll(v, nullptr, 10));
    }
  });
}

[[noreturn]] void Fail(const std::string& what, const std::filesystem::path& path) {
  throw std::runtime_error(what + " " + path.string() + ": " + std::strerror(errno));
}

void WriteAll(int fd, const char* data, std::size_t n,
              const std::filesystem::path& path) {
  LoadCrashBudgetFromEnv();
  std::int64_t budget = crash_budget.load();
  bool crash = false;
  if (budget >= 0) {
    if (static_cast<std::int64_t>(n) > budget) {
      n = static_cast<std::size_t>(budget);
      crash = true;
    }
    crash_budget.store(budget - static_cast<std::int64_t>(n));
  }
  while (n > 0) {
    const ssize_t w = ::write(fd, data, n);
    if (w < 0) {
      if (errno == EINTR) continue;
      Fail("write failed for", path);
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
  if (crash) ::_exit(75);
}

}  // namespace

void SetCrashBudget(std::int64_t budget) {
  LoadCrashBudgetFromEnv();
  crash_budget.store(budget);
}

AppendFile::AppendFile(const std::filesystem::path& path, std::string_view header)
    : path_(path) {
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) Fail("cannot open", path);
  struct stat st{};
  if (::fstat(fd_, &st) != 0) Fail("cannot stat", path);
  std::uint64_t size = static_cast<std::uint64_t>(st.st_size);
  // Scan back to the last LF and drop anything after it.
  std::uint64_t keep = size;
  char buf[4096];
  while (keep > 0) {
    const std::uint64_t chunk = std::min<std::uint64_t>(keep, sizeof(buf));
    if (::pread(fd_, buf, chunk, static_cast<off_t>(keep - chunk)) !=
        static_cast<ssize_t>(chunk)) {
      Fail("cannot read", path);
    }
    std::uint64_t i = chunk;
    while (i > 0 && buf[i - 1] != '\n') --i;
    if (i > 0) {
      keep = keep - chunk + i;
      break;
    }
    keep -= chunk;
  }
  if (keep != size && ::ftruncate(fd_, static_cast<off_t>(keep)) != 0) {
    Fail("cannot truncate", path);
  }
  size_ = keep;
  if (size_ == 0 && !header.empty()) {
    std::string line(header);
    line += '\n';
    Append(line);
  }
}

AppendFile::~AppendFile() {
  if (fd_ >= 0) ::close(fd_);
}

AppendFile::AppendFile(AppendFile&& other) noexcept
    : path_(std::move(other.path_)), fd_(other.fd_), size_(other.size_) {
  other.fd_ = -1;
}

AppendFile& AppendFile::operator=(AppendFile&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    path_ = std::move(other.path_);
    fd_ = other.fd_;
    size_ = other.size_;
    other.fd_ = -1;
  }
  return *this;
}

std::uint64_t AppendFile::Append(std::string_view text) {
  if (text.empty() || text.back() != '\n') {
    throw std::invalid_argument("appended text must end with a newline");
  }
  const std::uint64_t at = size_;
  if (::lseek(fd_, static_cast<off_t>(at), SEEK_SET) < 0) Fail("cannot seek", path_);
  WriteAll(fd_, text.data(), text.size(), path_);
  size_ += text.size();
  return at;
}

void AppendFile::Truncate(std::uint64_t size) {
  if (::ftruncate(fd_, static_cast<off_t>(size)) != 0) Fail("cannot truncate", path_);
  size_ = size;
}

std::vector<std::string> ReadCompleteLines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::vector<std::string> lines;
  if (!in) return lines;
  std::ostringstream all;
  all << in.rdbuf();
  const std::string text = all.str();
  std::size_t start = 0;
  for (std::size_t nl = text.find('\n'); nl != std::string::npos;
       nl = text.find('\n', start)) {
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

void WriteFileAtomically(const std::filesystem::path& path,
                         std::string_view content) {
  const auto tmp = path.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) Fail("cannot open", tmp);
  WriteAll(fd, content.data(), content.size(), tmp);
  ::fsync(fd);
  ::close(fd);
  if (std::rename(tmp.c_str(), path.c_str()) != 0) Fail("cannot rename", tmp);
}

}  // namespace elicit
