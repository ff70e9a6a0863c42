#pragma once

#include <stdexcept>
#include <string>

namespace sitedev {

enum class ErrorKind {
  Load,               // malformed or inconsistent input file
  Io,                 // filesystem failure
  Dimension,          // grids / masks / vectors of incompatible shape
  OutOfRange,         // value outside its domain
  OutOfBounds,        // geometric window outside a raster
  UndefinedMetric,    // metric undefined on the given input (e.g. AP without predictions)
  Degenerate,         // fit or trend has no unique solution
  NoLabel,            // no qualifying NTL cell
  Validation,         // catalog / config validation failure
  Unattainable,       // generator cannot satisfy the request
  Checksum,           // bundle verification failure
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace sitedev
