#pragma once

#include <stdexcept>
#include <string>

namespace threshpath {

// Malformed input: unknown ids, broken invariants, bad parameters.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Diagnostic bounds tripped or internal contracts broken. On valid inputs
// these never fire; when they do they usually signal an assumption
// violation (e.g. a non-positive circuit) or a bug.
class InternalError : public std::runtime_error {
 public:
  explicit InternalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace threshpath
