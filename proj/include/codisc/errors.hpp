#pragma once

#include <stdexcept>
#include <string>

namespace codisc {

// Bad or inconsistent input data (datasets, configs, files). CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A broken internal invariant; indicates a bug, not bad input. CLI exit code 3.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace codisc
