#pragma once

#include <stdexcept>
#include <string>

namespace tsfs {

/// Malformed input: bad shapes, mismatched orders, unparsable files.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// The geometry is singular at the expansion point (e.g. light parallel to
/// the central normal, or a non-visible normal handed to integration).
class DegeneracyError : public std::runtime_error {
 public:
  explicit DegeneracyError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tsfs
