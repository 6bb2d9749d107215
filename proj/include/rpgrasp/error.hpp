#pragma once

#include <stdexcept>
#include <string>

namespace rpgrasp {

/// Malformed or inconsistent input data (files, archives, demonstrations).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rpgrasp
