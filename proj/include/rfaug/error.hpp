#pragma once

#include <stdexcept>
#include <string>

namespace rfaug {

enum class ErrorKind {
  Io,
  Format,
  Parse,
  Validation,
  Config,
  Degenerate,
  InvalidArgument,
};

// Every failure raised by the library carries one of the kinds above; the C
// API maps them 1:1 onto status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace rfaug
