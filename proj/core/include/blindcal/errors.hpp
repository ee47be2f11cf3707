#pragma once

#include <stdexcept>
#include <string>

namespace blindcal {

// File and stream failures. Validation problems use std::invalid_argument and
// internal inconsistencies std::logic_error, so callers can map the three
// classes to distinct exit codes.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace blindcal
