#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "streamtrace/util.hpp"

namespace streamtrace {

struct ZipEntry {
  std::string name;
  LocalClockTime mtime;  // DOS timestamp from the archive
  uint32_t crc32 = 0;
  uint64_t compressed_size = 0;
  uint64_t uncompressed_size = 0;
};

struct ZipDirectory {
  std::vector<ZipEntry> entries;
  bool used_central_directory = false;  // false: recovered from local headers
  std::vector<std::string> anomalies;
};

// Central directory when present, local-header scan for truncated archives.
// Entry contents are never decompressed; names and timestamps are the
// investigative payload.
ZipDirectory read_zip_directory(std::span<const uint8_t> bytes);

}  // namespace streamtrace
