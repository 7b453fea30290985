#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gcontext {

/// Sequential line reader for plain or gzip-compressed text files.
/// Line terminators (LF or CRLF) are stripped.
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path);
  ~LineReader();
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  /// Reads the next line into `line`; returns false at end of file.
  /// Throws DataError when the stream is corrupt.
  bool next(std::string& line);

  std::size_t line_number() const noexcept { return line_number_; }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  void* file_ = nullptr;  // gzFile
  std::vector<char> buffer_;
  std::size_t line_number_ = 0;
};

std::vector<std::string_view> split(std::string_view text, char sep);
std::vector<std::string_view> split(std::string_view text, std::string_view sep);
std::string_view trim(std::string_view text);
bool starts_with(std::string_view text, std::string_view prefix);

std::string read_text_file(const std::filesystem::path& path);

/// Writes `content` to a sibling temporary and renames it into place.
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// Fixed 6-decimal rendering used by every textual output.
std::string format_fixed(double value);

}  // namespace gcontext
