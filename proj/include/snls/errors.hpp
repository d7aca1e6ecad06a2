#pragma once

#include <stdexcept>
#include <string>

namespace snls {

// Bad user-supplied parameters or misuse of a documented interface.
// The CLI maps this to exit code 2.
class config_error : public std::runtime_error {
public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// A verification routine was asked to run outside the hypotheses under which
// its estimate is meaningful (degenerate input, exponent range violation,
// times past the wrap-around fidelity window). The CLI maps this to exit
// code 3 and prints the message verbatim.
class hypothesis_error : public std::runtime_error {
public:
  explicit hypothesis_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace snls
