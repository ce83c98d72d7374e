#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace braidauth {

// Bad argument to a library operation: wrong strand count, mismatched n,
// negative exponent, exponent below 2 for a scheme, and so on.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

enum class ParseErrorCode : std::uint8_t {
  bad_magic = 1,
  truncated,
  bad_strand_count,
  non_bijective,
  not_canonical,
  trailing_bytes,
  bad_syntax,
};

inline const char* to_string(ParseErrorCode code) {
  switch (code) {
    case ParseErrorCode::bad_magic: return "bad-magic";
    case ParseErrorCode::truncated: return "truncated";
    case ParseErrorCode::bad_strand_count: return "bad-strand-count";
    case ParseErrorCode::non_bijective: return "non-bijective";
    case ParseErrorCode::not_canonical: return "not-canonical";
    case ParseErrorCode::trailing_bytes: return "trailing-bytes";
    case ParseErrorCode::bad_syntax: return "bad-syntax";
  }
  return "unknown";
}

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ParseErrorCode code() const noexcept { return code_; }

 private:
  ParseErrorCode code_;
};

// Rejection sampling for a hard instance gave up.
class SamplingFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The channel to the other party failed mid-session.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace braidauth
