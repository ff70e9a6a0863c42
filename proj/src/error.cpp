#include "sitedev/error.hpp"

namespace sitedev {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Load: return "load";
    case ErrorKind::Io: return "io";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::OutOfBounds: return "out-of-bounds";
    case ErrorKind::UndefinedMetric: return "undefined-metric";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::NoLabel: return "no-label";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Unattainable: return "unattainable";
    case ErrorKind::Checksum: return "checksum";
  }
  return "unknown";
}

}  // namespace sitedev
