#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sgdiff {

/// Malformed binary file (bad magic, version, dtype). Carries the byte
/// offset of the offending header field.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Payload shorter or longer than the header declares.
class LengthError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// NaN/Inf appeared during time integration or optimization. Carries the
/// simulation time (or step index) at which the blowup was detected.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double when)
      : std::runtime_error(what + " (at t = " + std::to_string(when) + ")"),
        when_(when) {}
  double when() const noexcept { return when_; }

 private:
  double when_;
};

}  // namespace sgdiff
