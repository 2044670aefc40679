#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace planarloc {

// Failure reasons reported by the solvers. Hot-path solvers return these
// through Expected<T> instead of throwing, since RANSAC hits them constantly.
enum class ErrorCode {
  kDegenerateMotion,
  kDegenerateConfiguration,
  kNoRealSolution,
  kCheiralityAmbiguous,
  kParallelDirections,
  kUndefinedDirection,
  kDegenerateCorrespondence,
  kDidNotConverge,
  kNoValidSample,
  kInsufficientMatches,
};

inline const char* ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateMotion: return "DegenerateMotion";
    case ErrorCode::kDegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::kNoRealSolution: return "NoRealSolution";
    case ErrorCode::kCheiralityAmbiguous: return "CheiralityAmbiguous";
    case ErrorCode::kParallelDirections: return "ParallelDirections";
    case ErrorCode::kUndefinedDirection: return "UndefinedDirection";
    case ErrorCode::kDegenerateCorrespondence: return "DegenerateCorrespondence";
    case ErrorCode::kDidNotConverge: return "DidNotConverge";
    case ErrorCode::kNoValidSample: return "NoValidSample";
    case ErrorCode::kInsufficientMatches: return "InsufficientMatches";
  }
  return "Unknown";
}

// Thrown by the few entry points that treat a bad input as a caller bug
// (e.g. essential_from_planar with rho <= 0) rather than a sample failure.
class GeometryError : public std::runtime_error {
 public:
  explicit GeometryError(ErrorCode code)
      : std::runtime_error(ToString(code)), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Value-or-error return for solvers.
template <typename T>
class Expected {
 public:
  Expected(T value) : data_(std::move(value)) {}  // NOLINT
  Expected(ErrorCode code) : data_(code) {}        // NOLINT

  bool has_value() const { return std::holds_alternative<T>(data_); }
  explicit operator bool() const { return has_value(); }

  const T& value() const {
    if (!has_value()) throw GeometryError(error());
    return std::get<T>(data_);
  }
  T& value() {
    if (!has_value()) throw GeometryError(error());
    return std::get<T>(data_);
  }
  ErrorCode error() const { return std::get<ErrorCode>(data_); }

  const T& operator*() const { return value(); }
  T& operator*() { return value(); }
  const T* operator->() const { return &value(); }
  T* operator->() { return &value(); }

 private:
  std::variant<T, ErrorCode> data_;
};

}  // namespace planarloc
