#include "streamtrace/zip_reader.hpp"

#include <algorithm>

namespace streamtrace {

namespace {

uint16_t le16(std::span<const uint8_t> b, size_t off) {
  return static_cast<uint16_t>(b[off] | (b[off + 1] << 8));
}

uint32_t le32(std::span<const uint8_t> b, size_t off) {
  return static_cast<uint32_t>(b[off]) | (static_cast<uint32_t>(b[off + 1]) << 8) |
         (static_cast<uint32_t>(b[off + 2]) << 16) | (static_cast<uint32_t>(b[off + 3]) << 24);
}

LocalClockTime dos_time(uint16_t time, uint16_t date) {
  return local_time_from_parts(1980 + ((date >> 9) & 0x7F), (date >> 5) & 0x0F, date & 0x1F,
                               (time >> 11) & 0x1F, (time >> 5) & 0x3F, (time & 0x1F) * 2);
}

constexpr uint32_t kEocdSig = 0x06054b50;     // PK\x05\x06
constexpr uint32_t kCentralSig = 0x02014b50;  // PK\x01\x02
constexpr uint32_t kLocalSig = 0x04034b50;    // PK\x03\x04

}  // namespace

ZipDirectory read_zip_directory(std::span<const uint8_t> bytes) {
  ZipDirectory out;
  if (bytes.size() < 22) {
    out.anomalies.push_back("too short for a zip archive");
    return out;
  }

  // end-of-central-directory: scan backwards over a possible comment
  size_t eocd = SIZE_MAX;
  size_t scan_limit = bytes.size() >= (1 << 16) + 22 ? bytes.size() - ((1 << 16) + 22) : 0;
  for (size_t i = bytes.size() - 22 + 1; i-- > scan_limit;) {
    if (le32(bytes, i) == kEocdSig) {
      eocd = i;
      break;
    }
  }

  if (eocd != SIZE_MAX) {
    uint16_t count = le16(bytes, eocd + 10);
    uint32_t cd_offset = le32(bytes, eocd + 16);
    size_t pos = cd_offset;
    for (uint16_t n = 0; n < count; ++n) {
      if (pos + 46 > bytes.size() || le32(bytes, pos) != kCentralSig) {
        out.anomalies.push_back("central directory truncated at entry " + std::to_string(n));
        break;
      }
      ZipEntry e;
      e.mtime = dos_time(le16(bytes, pos + 12), le16(bytes, pos + 14));
      e.crc32 = le32(bytes, pos + 16);
      e.compressed_size = le32(bytes, pos + 20);
      e.uncompressed_size = le32(bytes, pos + 24);
      uint16_t name_len = le16(bytes, pos + 28);
      uint16_t extra_len = le16(bytes, pos + 30);
      uint16_t comment_len = le16(bytes, pos + 32);
      if (pos + 46 + name_len > bytes.size()) {
        out.anomalies.push_back("entry name truncated");
        break;
      }
      e.name.assign(reinterpret_cast<const char*>(bytes.data() + pos + 46), name_len);
      out.entries.push_back(std::move(e));
      pos += 46ull + name_len + extra_len + comment_len;
    }
    if (!out.entries.empty()) {
      out.used_central_directory = true;
      return out;
    }
  }

  // damaged or truncated archive: walk local file headers instead
  out.anomalies.push_back("central directory unusable; scanning local headers");
  size_t pos = 0;
  while (pos + 30 <= bytes.size()) {
    if (le32(bytes, pos) != kLocalSig) {
      // resynchronize on the next signature
      size_t next = pos + 1;
      while (next + 4 <= bytes.size() && le32(bytes, next) != kLocalSig) ++next;
      if (next + 30 > bytes.size()) break;
      pos = next;
    }
    ZipEntry e;
    e.mtime = dos_time(le16(bytes, pos + 10), le16(bytes, pos + 12));
    e.crc32 = le32(bytes, pos + 14);
    e.compressed_size = le32(bytes, pos + 18);
    e.uncompressed_size = le32(bytes, pos + 22);
    uint16_t name_len = le16(bytes, pos + 26);
    uint16_t extra_len = le16(bytes, pos + 28);
    if (pos + 30 + name_len > bytes.size()) break;
    e.name.assign(reinterpret_cast<const char*>(bytes.data() + pos + 30), name_len);
    uint64_t advance = 30ull + name_len + extra_len + e.compressed_size;
    out.entries.push_back(std::move(e));
    pos += static_cast<size_t>(std::max<uint64_t>(advance, 31));
  }
  return out;
}

}  // namespace streamtrace
