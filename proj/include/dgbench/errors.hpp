#pragma once

#include <stdexcept>
#include <string>

namespace dgbench {

// Error categories map onto the CLI exit codes: config -> 2, theorem -> 3,
// io -> 4. `logic` covers precondition violations inside library calls.
enum class ErrorKind { config, theorem, io, logic };

class DgError : public std::runtime_error {
 public:
  DgError(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& message) {
  if (!cond) throw DgError(kind, message);
}

}  // namespace dgbench
