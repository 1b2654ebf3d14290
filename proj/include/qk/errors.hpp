#pragma once

#include <stdexcept>
#include <string>

namespace qk {

// Base for every structured error the library throws. Anything escaping a
// public entry point that is not a qk::Error is a bug.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qk
