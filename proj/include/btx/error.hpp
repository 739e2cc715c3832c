#pragma once

#include <stdexcept>
#include <string>

namespace btx {

/// Malformed input file or stream. The message names the offending field or line.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mathematically undefined input, e.g. the cosine of a zero vector.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace btx
