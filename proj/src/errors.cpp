#include "streamtrace/errors.hpp"

namespace streamtrace {

const char* errc_name(Errc c) noexcept {
  switch (c) {
    case Errc::NotADirectory: return "NotADirectory";
    case Errc::PermissionDenied: return "PermissionDenied";
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::PathEscapesRoot: return "PathEscapesRoot";
    case Errc::FileTooLarge: return "FileTooLarge";
    case Errc::BadMagic: return "BadMagic";
    case Errc::TooShort: return "TooShort";
    case Errc::OutOfBounds: return "OutOfBounds";
    case Errc::BadPageKind: return "BadPageKind";
    case Errc::NoSuffixes: return "NoSuffixes";
    case Errc::NoRecognizedTables: return "NoRecognizedTables";
    case Errc::DirNotFound: return "DirNotFound";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::WriteFailure: return "WriteFailure";
  }
  return "UnknownError";
}

}  // namespace streamtrace
