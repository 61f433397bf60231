#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace delaylab {

// Error taxonomy shared by the C++ API, the C API status codes and the CLI
// exit codes.
enum class Errc {
  invalid_argument = 1,
  not_found,
  validation,
  alignment,
  ellipticity,
  capability,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, std::string message) {
  throw Error(code, std::move(message));
}

inline const char* errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::not_found: return "not_found";
    case Errc::validation: return "validation";
    case Errc::alignment: return "alignment";
    case Errc::ellipticity: return "ellipticity";
    case Errc::capability: return "capability";
    case Errc::io: return "io";
  }
  return "unknown";
}

inline constexpr const char* kVersion = "0.1.0";

}  // namespace delaylab
