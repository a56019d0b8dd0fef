#pragma once

#include <stdexcept>
#include <string>

namespace comono {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range input data; carries the offending data row (1-based, 0 if not row specific).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row) : Error(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Rank-based operations require distinct x values and distinct y values.
class TieError : public Error {
 public:
  using Error::Error;
};

}  // namespace comono
