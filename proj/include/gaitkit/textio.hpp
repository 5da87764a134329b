#pragma once

// Plain-text helpers shared by every on-disk format: strict number parsing,
// round-trip number formatting and the flat key-value file.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gaitkit {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Whole-string parses; nullopt on any trailing junk, empty input or
/// non-finite result.
std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char sep);

std::string read_text_file(const std::filesystem::path& path);
/// Writes atomically enough for our purposes: truncate then write. Throws Io.
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Flat `key = value` file. `#` starts a comment line; blank lines are
/// ignored; keys are [A-Za-z0-9_.-]+ and must be unique. Entry order is kept.
class KeyValueFile {
 public:
  KeyValueFile() = default;

  static KeyValueFile parse(std::string_view text, std::string source = "<text>");
  static KeyValueFile load(const std::filesystem::path& path);

  void set(std::string key, std::string value);
  bool contains(std::string_view key) const;
  std::optional<std::string> get(std::string_view key) const;

  /// Throws ParseError(MalformedLine) naming the key when absent.
  std::string require(std::string_view key) const;
  double require_double(std::string_view key) const;
  std::int64_t require_int(std::string_view key) const;
  double get_double(std::string_view key, double fallback) const;
  std::int64_t get_int(std::string_view key, std::int64_t fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  const std::string& source() const { return source_; }

  std::string format() const;

  struct Located {
    std::size_t line{0};
    std::size_t column{0};
  };
  /// Where the key's value sits in the parsed text; {0, 0} when unknown.
  Located locate(std::string_view key) const;
  /// Throws ParseError(MalformedLine) pointing at the key's value.
  [[noreturn]] void bad_value(std::string_view key, const std::string& why) const;

 private:

  std::string source_{"<memory>"};
  std::vector<std::pair<std::string, std::string>> entries_;
  std::vector<Located> where_;
};

}  // namespace gaitkit
