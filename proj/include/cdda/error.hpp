#pragma once

#include <stdexcept>
#include <string>

namespace cdda {

enum class ErrorKind {
  InvalidDimension,
  InvalidLabel,
  InvalidInput,
  InvalidState,
  InvalidGraph,
  SingularMatrix,
  DegenerateBandwidth,
  Parse,
  InvalidSpec,
  Config,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Numerical failures (singular systems, degenerate graphs) as opposed to bad input.
inline bool is_numerical(ErrorKind kind) {
  return kind == ErrorKind::SingularMatrix || kind == ErrorKind::InvalidGraph ||
         kind == ErrorKind::DegenerateBandwidth;
}

}  // namespace cdda
