#include "gaitkit/textio.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gaitkit/error.hpp"

namespace gaitkit {

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

std::optional<double> parse_double(std::string_view text) {
  if (text.empty()) return std::nullopt;
  // from_chars rejects a leading '+'; accept it for hand-written files.
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<std::int64_t> parse_int(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::int64_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return text.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

namespace {

bool valid_key(std::string_view key) {
  if (key.empty()) return false;
  for (char c : key) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '.' || c == '-';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::string_view text, std::string source) {
  KeyValueFile kv;
  kv.source_ = std::move(source);
  std::size_t line_no = 0;
  for (std::string_view raw : split(text, '\n')) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(ErrorKind::MalformedLine, kv.source_, line_no, 0,
                       "expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const std::size_t key_col = static_cast<std::size_t>(raw.find_first_not_of(" \t")) + 1;
    if (!valid_key(key)) {
      throw ParseError(ErrorKind::MalformedLine, kv.source_, line_no, key_col,
                       "invalid key '" + std::string(key) + "'");
    }
    if (kv.contains(key)) {
      throw ParseError(ErrorKind::DuplicateRecord, kv.source_, line_no, key_col,
                       "duplicate key '" + std::string(key) + "'");
    }
    const std::size_t value_col =
        value.empty() ? raw.size() + 1 : static_cast<std::size_t>(value.data() - raw.data()) + 1;
    kv.entries_.emplace_back(std::string(key), std::string(value));
    kv.where_.push_back({line_no, value_col});
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  return parse(read_text_file(path), path.string());
}

void KeyValueFile::set(std::string key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
  where_.push_back({});
}

bool KeyValueFile::contains(std::string_view key) const { return get(key).has_value(); }

std::optional<std::string> KeyValueFile::get(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

KeyValueFile::Located KeyValueFile::locate(std::string_view key) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].first == key) return where_[i];
  }
  return {};
}

void KeyValueFile::bad_value(std::string_view key, const std::string& why) const {
  const Located at = locate(key);
  throw ParseError(ErrorKind::MalformedLine, source_, at.line, at.column,
                   "key '" + std::string(key) + "': " + why);
}

std::string KeyValueFile::require(std::string_view key) const {
  auto v = get(key);
  if (!v) {
    throw ParseError(ErrorKind::MalformedLine, source_, 0, 0,
                     "missing required key '" + std::string(key) + "'");
  }
  return *v;
}

double KeyValueFile::require_double(std::string_view key) const {
  const auto v = parse_double(require(key));
  if (!v) bad_value(key, "expected a finite number");
  return *v;
}

std::int64_t KeyValueFile::require_int(std::string_view key) const {
  const auto v = parse_int(require(key));
  if (!v) bad_value(key, "expected an integer");
  return *v;
}

double KeyValueFile::get_double(std::string_view key, double fallback) const {
  return contains(key) ? require_double(key) : fallback;
}

std::int64_t KeyValueFile::get_int(std::string_view key, std::int64_t fallback) const {
  return contains(key) ? require_int(key) : fallback;
}

bool KeyValueFile::get_bool(std::string_view key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  bad_value(key, "expected true or false");
}

std::string KeyValueFile::format() const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

}  // namespace gaitkit
