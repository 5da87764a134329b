#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gaitkit/config.hpp"
#include "gaitkit/error.hpp"
#include "gaitkit/session_io.hpp"
#include "gaitkit/textio.hpp"

namespace gaitkit::test {

inline std::filesystem::path fixture_path(const std::string& relative) {
  return std::filesystem::path(GAITKIT_FIXTURE_DIR) / relative;
}

/// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("gaitkit_" + tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) { return read_text_file(path); }

/// One row of malformed/expected.tsv.
struct MalformedCase {
  std::string file;
  std::string parser;  // module | meta | calibration | config
  std::string kind;
  std::size_t line{0};
  std::size_t column{0};
};

struct Observed {
  std::string kind;
  std::size_t line{0};
  std::size_t column{0};
  std::string message;
};

inline std::vector<MalformedCase> malformed_cases() {
  std::vector<MalformedCase> out;
  std::istringstream in(slurp(fixture_path("malformed/expected.tsv")));
  std::string row;
  while (std::getline(in, row)) {
    if (row.empty() || row.front() == '#') continue;
    std::istringstream fields(row);
    MalformedCase c;
    fields >> c.file >> c.parser >> c.kind >> c.line >> c.column;
    out.push_back(c);
  }
  return out;
}

/// Runs the matching parser; nullopt when it unexpectedly accepts the file.
inline std::optional<Observed> parse_malformed(const MalformedCase& c) {
  const std::filesystem::path path = fixture_path("malformed/" + c.file);
  const std::string text = slurp(path);
  try {
    if (c.parser == "module") {
      parse_module_text(text, c.file);
    } else if (c.parser == "meta") {
      parse_meta(text, c.file);
    } else if (c.parser == "calibration") {
      parse_calibration(text, c.file);
    } else if (c.parser == "config") {
      parse_config(KeyValueFile::parse(text, c.file));
    } else {
      return Observed{"unknown-parser", 0, 0, c.parser};
    }
  } catch (const ParseError& e) {
    return Observed{to_string(e.kind()), e.line(), e.column(), e.what()};
  } catch (const Error& e) {
    return Observed{to_string(e.kind()), 0, 0, e.what()};
  }
  return std::nullopt;
}

/// Reference shoe table rows: shoe, platform, heel, then step cycle time, mean
/// acceleration and acceleration variance for candidates 01-03.
inline const std::vector<std::vector<std::string>>& table1_rows() {
  static const std::vector<std::vector<std::string>> rows{
      {"H1", "0.5", "0.75", "1.5555", "1.1474", "1.7432", "1.6051", "1.9650", "1.6672", "0.1236",
       "0.3921", "0.0712"},
      {"H2", "0.25", "2.0", "1.6146", "1.1183", "1.8323", "1.7169", "2.0345", "1.6322", "0.1230",
       "0.4477", "0.1351"},
      {"H3", "0.5", "3.0", "1.5512", "1.1152", "1.8673", "1.8477", "2.1798", "1.7959", "0.1266",
       "0.5166", "0.1047"},
      {"H4", "1.5", "5.5", "1.5736", "1.1875", "1.5784", "1.6476", "2.1169", "1.3863", "0.1362",
       "0.5074", "0.1280"},
      {"H5", "2.0", "6.0", "1.5552", "1.1439", "1.2492", "1.5411", "1.8944", "1.6281", "0.1283",
       "0.5170", "0.1439"},
      {"H6", "2.0", "6.5", "1.5688", "1.1710", "1.2788", "1.6262", "2.1910", "1.6254", "0.1700",
       "0.6039", "0.1357"},
      {"H7", "3.0", "5.25", "1.6152", "1.1508", "1.2492", "1.3847", "1.8944", "1.5125", "0.1288",
       "0.5170", "0.0992"},
  };
  return rows;
}

/// Whitespace tokens of the data rows of table.txt, column separators dropped.
inline std::vector<std::vector<std::string>> table_text_rows(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(text);
  std::string line;
  bool body = false;
  while (std::getline(in, line)) {
    if (!body) {
      body = line.rfind("---", 0) == 0;
      continue;
    }
    std::istringstream cells(line);
    std::vector<std::string> row;
    for (std::string tok; cells >> tok;) {
      if (tok != "|") row.push_back(tok);
    }
    if (!row.empty()) out.push_back(row);
  }
  return out;
}

}  // namespace gaitkit::test
