#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gaitkit {

enum class ErrorKind {
  InvalidArgument,
  NonFinite,
  InitFailure,
  Gap,
  Misalignment,
  QuasiStatic,
  InsufficientPeaks,
  SpanOutOfBounds,
  EmptyInput,
  MalformedLine,
  DuplicateRecord,
  NonMonotoneTick,
  MissingTriggerTick,
  UnitRange,
  NoCommonRange,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Stream error carrying the offending sample index (gap, non-finite input).
class StreamError : public Error {
 public:
  StreamError(ErrorKind kind, std::size_t index, const std::string& what)
      : Error(kind, what + " at sample " + std::to_string(index)), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Located error raised while parsing a text file. Lines and columns are 1-based;
/// column 0 means the whole line.
class ParseError : public Error {
 public:
  ParseError(ErrorKind kind, std::string path, std::size_t line, std::size_t column,
             const std::string& what)
      : Error(kind, path + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        path_(std::move(path)),
        line_(line),
        column_(column) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::string path_;
  std::size_t line_;
  std::size_t column_;
};

}  // namespace gaitkit
