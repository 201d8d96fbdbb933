#pragma once

#include <stdexcept>
#include <string>

namespace toplag {

/// Failure caused by the data being analysed (malformed input, degenerate
/// series, numerical collapse). Parameter misuse throws std::invalid_argument.
class data_error : public std::runtime_error {
 public:
  explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace toplag
