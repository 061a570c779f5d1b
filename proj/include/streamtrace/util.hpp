#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace streamtrace {

std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, char sep);

std::string hex_lower(std::span<const uint8_t> bytes);
std::optional<std::vector<uint8_t>> from_hex(std::string_view hex);

// Percent-decoding for query captures; '+' decodes to space.
std::string url_decode(std::string_view s);

// RFC 3339 UTC ("YYYY-MM-DDTHH:MM:SSZ"), tool-clock timestamps only.
std::string format_rfc3339(std::chrono::system_clock::time_point tp);
std::optional<std::chrono::system_clock::time_point> parse_rfc3339(std::string_view s);

// A timestamp read from evidence: a device-local clock of unknown zone.
// Reports keep the original text and emit the "?"-suffixed display form
// rather than pretending to know UTC.
struct LocalClockTime {
  bool has_date = false;
  int year = 0, month = 0, day = 0;
  bool has_time = false;
  int hour = 0, minute = 0, second = 0;
  int millis = -1;  // -1 when no fractional part
  std::string original;

  bool dated() const { return has_date; }

  // "YYYY-MM-DDTHH:MM:SS[.mmm]?" / "YYYY-MM-DD?" / "HH:MM:SS[.mmm]?" / ""
  std::string display() const;

  // Zero-padded sortable key; undated times sort by time-of-day only.
  std::string sort_key() const;

  // <0, 0, >0. Only meaningful when both sides are dated or both undated.
  static int compare(const LocalClockTime& a, const LocalClockTime& b);
};

// Accepts "YYYY-MM-DD HH:MM:SS[.fff]", "YYYY-MM-DDTHH:MM:SS[.fff]",
// "YYYY-MM-DD", "HH:MM:SS[.fff]". Original text preserved verbatim.
std::optional<LocalClockTime> parse_local_timestamp(std::string_view text);

LocalClockTime local_time_from_parts(int y, int mo, int d, int h, int mi, int s, int ms = -1);

// Valid text is returned verbatim. When invalid sequences appear, the
// escape notation kicks in ("\xHH" for bad bytes, "\\" for a literal
// backslash) and *used_escapes is set, so escaped output round-trips to
// the original bytes without ambiguity.
std::string utf8_with_escapes(std::span<const uint8_t> bytes, bool* used_escapes = nullptr);
std::string utf16_to_utf8_with_escapes(std::span<const uint8_t> bytes, bool big_endian,
                                       bool* used_escapes = nullptr);

bool is_uuid_shaped(std::string_view s);

}  // namespace streamtrace
