#pragma once

#include <stdexcept>
#include <string>

namespace hypercs {

// Bad user input: unreadable/malformed files, inconsistent dimensions,
// out-of-range CLI options. The CLI maps this to exit code 1; anything
// else escaping a command is an internal failure and exits 2.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hypercs
