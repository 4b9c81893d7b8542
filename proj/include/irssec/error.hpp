#pragma once

#include <stdexcept>
#include <string>

namespace irssec {

// Thrown when an operation receives arguments outside its contract
// (shape mismatch, non-Hermitian input, non-positive distance, ...).
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace irssec
