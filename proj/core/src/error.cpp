#include "tsc/error.hpp"

namespace tsc {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EmptyList: return "EmptyList";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::NoData: return "NoData";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::NonPositivePrice: return "NonPositivePrice";
    case ErrorKind::BadK: return "BadK";
    case ErrorKind::NonFinitePoint: return "NonFinitePoint";
    case ErrorKind::EmptyCentroids: return "EmptyCentroids";
    case ErrorKind::SingleCluster: return "SingleCluster";
    case ErrorKind::Precondition: return "Precondition";
    case ErrorKind::BadWidth: return "BadWidth";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace tsc
