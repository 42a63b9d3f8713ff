#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace lfv {

// Shortest decimal that reads back to the same double; "inf", "-inf", "nan"
// for non-finite values.
std::string format_double(double value);

// Builds CSV text in memory. Fields containing separators or quotes are quoted.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header);

  CsvWriter& field(std::string_view text);
  CsvWriter& field(double value);
  CsvWriter& field(std::int64_t value);
  CsvWriter& field(int value) { return field(static_cast<std::int64_t>(value)); }
  CsvWriter& field(std::uint64_t value);
  CsvWriter& field(bool value) { return field(std::string_view(value ? "true" : "false")); }
  // Throws DomainError if the row width differs from the header.
  void end_row();

  std::size_t columns() const noexcept { return columns_; }
  std::size_t rows() const noexcept { return rows_; }
  const std::string& text() const noexcept { return text_; }

 private:
  std::string text_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
  std::size_t rows_ = 0;
};

// Writes through a temporary sibling and renames it into place. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

std::string sha256_hex(std::string_view content);

}  // namespace lfv
