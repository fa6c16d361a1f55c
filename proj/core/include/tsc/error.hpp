#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tsc {

enum class ErrorKind {
  EmptyList,
  FormatError,
  NoData,
  TooShort,
  NonPositivePrice,
  BadK,
  NonFinitePoint,
  EmptyCentroids,
  SingleCluster,
  Precondition,
  BadWidth,
  ShapeMismatch,
  NonFiniteInput,
  EmptyDataset,
  Io,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

/// Every library failure is reported as a tsc::Error carrying a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tsc
