#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace cgwalk {

// splitmix64 step; used to derive independent seeds for sub-streams.
std::uint64_t hash_mix(std::uint64_t seed, std::uint64_t tag);

// Shortest text representation that round-trips the exact double value.
std::string format_double(double value);

// Whole-file text write through a temp file + rename, so readers never see a
// partially written file.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

std::string read_text_file(const std::filesystem::path& path);

// Splits file content into lines, dropping blank lines and lines whose first
// non-space character is '#'. Line numbers (1-based) are kept for error
// reporting.
struct TextLine {
  int number;
  std::string text;
};
std::vector<TextLine> data_lines(const std::string& content);

// Runs fn(i) for i in [begin, end) on up to `threads` workers with a blocked
// index partition. Results must be written to per-index storage only; with
// that discipline the outcome is identical to a sequential loop.
void parallel_for(std::size_t begin, std::size_t end, int threads,
                  const std::function<void(std::size_t)>& fn);

class WallTimer {
 public:
  WallTimer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace cgwalk
