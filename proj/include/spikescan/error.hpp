#pragma once

#include <stdexcept>
#include <string>

namespace spikescan {

// Process exit codes used by the CLI. Library errors map onto these.
enum class ErrorCode : int {
  kOk = 0,
  kExpectationFailed = 1,
  kUsage = 2,
  kShape = 3,
  kDomain = 4,
  kNonFinite = 5,
  kLengthMismatch = 6,
  kStabilityGuard = 7,
  kIo = 8,
  kFormat = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& w) : Error(ErrorCode::kShape, w) {}
};

// Division by zero, invalid parameters, vacuous conditions.
struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorCode::kDomain, w) {}
};

struct NonFiniteError : Error {
  explicit NonFiniteError(const std::string& w)
      : Error(ErrorCode::kNonFinite, w) {}
};

// A neuron whose parameters are tied to a training length was asked to run
// at a different length.
struct LengthMismatch : Error {
  LengthMismatch(std::size_t expected, std::size_t got)
      : Error(ErrorCode::kLengthMismatch,
              "length mismatch: parameters built for T=" +
                  std::to_string(expected) + ", got T=" + std::to_string(got)),
        expected_length(expected),
        actual_length(got) {}
  std::size_t expected_length;
  std::size_t actual_length;
};

struct StabilityGuard : Error {
  explicit StabilityGuard(const std::string& w)
      : Error(ErrorCode::kStabilityGuard, w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorCode::kIo, w) {}
};

struct FormatError : Error {
  explicit FormatError(const std::string& w) : Error(ErrorCode::kFormat, w) {}
};

}  // namespace spikescan
