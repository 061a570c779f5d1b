#pragma once

#include <stdexcept>
#include <string>

namespace streamtrace {

enum class Errc {
  NotADirectory,
  PermissionDenied,
  FileNotFound,
  PathEscapesRoot,
  FileTooLarge,
  BadMagic,
  TooShort,
  OutOfBounds,
  BadPageKind,
  NoSuffixes,
  NoRecognizedTables,
  DirNotFound,
  UnsupportedFormat,
  InvalidArgument,
  WriteFailure,
};

const char* errc_name(Errc c) noexcept;

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace streamtrace
