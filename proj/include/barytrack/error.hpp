#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace barytrack {

enum class ErrorKind {
  MalformedHeader,
  RowCountMismatch,
  BadCoordinate,
  NonMonotoneTime,
  MalformedRow,
  DomainError,
  AntipodalError,
  DegenerateMean,
  GridMismatch,
  EmptyOverlap,
  TooFewTrajectories,
  DegenerateRow,
  ZeroVariance,
  NoYears,
  InvalidArgument,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::RowCountMismatch: return "RowCountMismatch";
    case ErrorKind::BadCoordinate: return "BadCoordinate";
    case ErrorKind::NonMonotoneTime: return "NonMonotoneTime";
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::AntipodalError: return "AntipodalError";
    case ErrorKind::DegenerateMean: return "DegenerateMean";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::EmptyOverlap: return "EmptyOverlap";
    case ErrorKind::TooFewTrajectories: return "TooFewTrajectories";
    case ErrorKind::DegenerateRow: return "DegenerateRow";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::NoYears: return "NoYears";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Base exception for every failure raised by the library. The kind is the
/// machine-checkable part; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Parse failure in a HURDAT2 stream. Line numbers are 1-based; 0 means the
/// failure is not tied to a particular line (e.g. empty input).
class ParseError : public Error {
 public:
  ParseError(ErrorKind kind, std::size_t line, const std::string& what)
      : Error(kind, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace barytrack
