#pragma once

#include <stdexcept>
#include <string>

namespace bitcurve {

// Malformed input file (QTNS, netspec, history, checkpoint, ...).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid run configuration; the CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bitcurve
