#pragma once

#include <stdexcept>
#include <string>

namespace wph {

// Exit-code carrying exceptions. The CLI maps each family to a process status.
class Error : public std::runtime_error {
 public:
  Error(const std::string& what, int code) : std::runtime_error(what), code_(code) {}
  int exit_code() const { return code_; }

 private:
  int code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what, 2) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what, 3) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what, 4) {}
};

}  // namespace wph
