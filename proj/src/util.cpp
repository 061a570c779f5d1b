#include "streamtrace/util.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <ctime>

namespace streamtrace {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  }
  return true;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= s.size()) {
    size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string hex_lower(std::span<const uint8_t> bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (uint8_t b : bytes) {
    out += digits[b >> 4];
    out += digits[b & 0x0F];
  }
  return out;
}

std::optional<std::vector<uint8_t>> from_hex(std::string_view hex) {
  if (hex.size() % 2) return std::nullopt;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  std::vector<uint8_t> out;
  out.reserve(hex.size() / 2);
  for (size_t i = 0; i < hex.size(); i += 2) {
    int hi = nibble(hex[i]), lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<uint8_t>((hi << 4) | lo));
  }
  return out;
}

std::string url_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '+') {
      out += ' ';
    } else if (c == '%' && i + 2 < s.size()) {
      auto nib = [](char x) -> int {
        if (x >= '0' && x <= '9') return x - '0';
        if (x >= 'a' && x <= 'f') return x - 'a' + 10;
        if (x >= 'A' && x <= 'F') return x - 'A' + 10;
        return -1;
      };
      int hi = nib(s[i + 1]), lo = nib(s[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out += static_cast<char>((hi << 4) | lo);
        i += 2;
      } else {
        out += c;
      }
    } else {
      out += c;
    }
  }
  return out;
}

std::string format_rfc3339(std::chrono::system_clock::time_point tp) {
  std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

std::optional<std::chrono::system_clock::time_point> parse_rfc3339(std::string_view s) {
  std::tm tm{};
  int y, mo, d, h, mi, sec;
  char zone = 0;
  if (std::sscanf(std::string(s).c_str(), "%d-%d-%dT%d:%d:%d%c", &y, &mo, &d, &h, &mi, &sec,
                  &zone) < 6)
    return std::nullopt;
  if (zone != 0 && zone != 'Z' && zone != 'z') return std::nullopt;
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  tm.tm_sec = sec;
  std::time_t t = timegm(&tm);
  if (t == -1) return std::nullopt;
  return std::chrono::system_clock::from_time_t(t);
}

std::string LocalClockTime::display() const {
  char buf[48];
  if (has_date && has_time) {
    if (millis >= 0)
      std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03d?", year, month, day,
                    hour, minute, second, millis);
    else
      std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d?", year, month, day, hour,
                    minute, second);
  } else if (has_date) {
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d?", year, month, day);
  } else if (has_time) {
    if (millis >= 0)
      std::snprintf(buf, sizeof(buf), "%02d:%02d:%02d.%03d?", hour, minute, second, millis);
    else
      std::snprintf(buf, sizeof(buf), "%02d:%02d:%02d?", hour, minute, second);
  } else {
    return "";
  }
  return buf;
}

std::string LocalClockTime::sort_key() const {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03d", has_date ? year : 0,
                has_date ? month : 0, has_date ? day : 0, has_time ? hour : 0,
                has_time ? minute : 0, has_time ? second : 0,
                (has_time && millis >= 0) ? millis : 0);
  return buf;
}

int LocalClockTime::compare(const LocalClockTime& a, const LocalClockTime& b) {
  std::string ka = a.sort_key(), kb = b.sort_key();
  if (ka < kb) return -1;
  if (ka > kb) return 1;
  return 0;
}

LocalClockTime local_time_from_parts(int y, int mo, int d, int h, int mi, int s, int ms) {
  LocalClockTime t;
  t.has_date = true;
  t.year = y;
  t.month = mo;
  t.day = d;
  t.has_time = true;
  t.hour = h;
  t.minute = mi;
  t.second = s;
  t.millis = ms;
  t.original = t.display();
  return t;
}

namespace {

bool parse_time_part(std::string_view s, LocalClockTime& t) {
  int h, mi, sec, consumed = 0;
  if (std::sscanf(std::string(s).c_str(), "%2d:%2d:%2d%n", &h, &mi, &sec, &consumed) != 3)
    return false;
  if (h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0 || sec > 60) return false;
  t.has_time = true;
  t.hour = h;
  t.minute = mi;
  t.second = sec;
  std::string_view rest = s.substr(consumed);
  if (!rest.empty() && rest[0] == '.') {
    int frac = 0, digits = 0;
    size_t i = 1;
    while (i < rest.size() && digits < 3 && std::isdigit(static_cast<unsigned char>(rest[i]))) {
      frac = frac * 10 + (rest[i] - '0');
      ++digits;
      ++i;
    }
    while (i < rest.size() && std::isdigit(static_cast<unsigned char>(rest[i]))) ++i;
    if (digits > 0) {
      while (digits < 3) {
        frac *= 10;
        ++digits;
      }
      t.millis = frac;
    }
    rest = rest.substr(i);
  }
  return rest.empty();
}

}  // namespace

std::optional<LocalClockTime> parse_local_timestamp(std::string_view text) {
  if (text.empty()) return std::nullopt;
  LocalClockTime t;
  t.original = std::string(text);
  int y, mo, d, consumed = 0;
  std::string str(text);
  if (std::sscanf(str.c_str(), "%4d-%2d-%2d%n", &y, &mo, &d, &consumed) == 3) {
    if (mo < 1 || mo > 12 || d < 1 || d > 31) return std::nullopt;
    t.has_date = true;
    t.year = y;
    t.month = mo;
    t.day = d;
    std::string_view rest = text.substr(consumed);
    if (rest.empty()) return t;
    if (rest[0] != ' ' && rest[0] != 'T') return std::nullopt;
    if (!parse_time_part(rest.substr(1), t)) return std::nullopt;
    return t;
  }
  if (parse_time_part(text, t)) return t;
  return std::nullopt;
}

namespace {

void escape_byte(std::string& out, uint8_t b) {
  static const char* digits = "0123456789abcdef";
  out += "\\x";
  out += digits[b >> 4];
  out += digits[b & 0x0F];
}

void append_codepoint_utf8(std::string& out, uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

}  // namespace

namespace {

// length of the valid UTF-8 sequence at i, or 0
size_t valid_utf8_at(std::span<const uint8_t> bytes, size_t i) {
  uint8_t b = bytes[i];
  if (b < 0x80) return 1;
  size_t len;
  uint32_t cp;
  if ((b & 0xE0) == 0xC0) {
    len = 2;
    cp = b & 0x1F;
  } else if ((b & 0xF0) == 0xE0) {
    len = 3;
    cp = b & 0x0F;
  } else if ((b & 0xF8) == 0xF0) {
    len = 4;
    cp = b & 0x07;
  } else {
    return 0;
  }
  if (i + len > bytes.size()) return 0;
  for (size_t k = 1; k < len; ++k) {
    if ((bytes[i + k] & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (bytes[i + k] & 0x3F);
  }
  // overlong forms and surrogate range are invalid
  if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
      (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF)
    return 0;
  return len;
}

}  // namespace

std::string utf8_with_escapes(std::span<const uint8_t> bytes, bool* used_escapes) {
  if (used_escapes) *used_escapes = false;
  bool valid = true;
  for (size_t i = 0; i < bytes.size();) {
    size_t len = valid_utf8_at(bytes, i);
    if (len == 0) {
      valid = false;
      break;
    }
    i += len;
  }
  if (valid) return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};

  if (used_escapes) *used_escapes = true;
  std::string out;
  out.reserve(bytes.size() + 8);
  for (size_t i = 0; i < bytes.size();) {
    if (bytes[i] == '\\') {
      out += "\\\\";
      ++i;
      continue;
    }
    size_t len = valid_utf8_at(bytes, i);
    if (len == 0) {
      escape_byte(out, bytes[i]);
      ++i;
    } else {
      out.append(reinterpret_cast<const char*>(bytes.data() + i), len);
      i += len;
    }
  }
  return out;
}

std::string utf16_to_utf8_with_escapes(std::span<const uint8_t> bytes, bool big_endian,
                                       bool* used_escapes) {
  auto unit = [&](size_t off) -> uint16_t {
    return big_endian ? static_cast<uint16_t>((bytes[off] << 8) | bytes[off + 1])
                      : static_cast<uint16_t>((bytes[off + 1] << 8) | bytes[off]);
  };

  for (int pass = 0; pass < 2; ++pass) {
    bool escaping = pass == 1;
    bool needed_escape = false;
    std::string out;
    size_t i = 0;
    while (i + 1 < bytes.size()) {
      uint16_t u = unit(i);
      if (u >= 0xD800 && u <= 0xDBFF) {
        if (i + 3 < bytes.size()) {
          uint16_t lo = unit(i + 2);
          if (lo >= 0xDC00 && lo <= 0xDFFF) {
            uint32_t cp =
                0x10000 + ((static_cast<uint32_t>(u - 0xD800) << 10) | (lo - 0xDC00));
            append_codepoint_utf8(out, cp);
            i += 4;
            continue;
          }
        }
        needed_escape = true;
        if (escaping) {
          escape_byte(out, bytes[i]);
          escape_byte(out, bytes[i + 1]);
        }
        i += 2;
        continue;
      }
      if (u >= 0xDC00 && u <= 0xDFFF) {
        needed_escape = true;
        if (escaping) {
          escape_byte(out, bytes[i]);
          escape_byte(out, bytes[i + 1]);
        }
        i += 2;
        continue;
      }
      if (u == '\\' && escaping) {
        out += "\\\\";
        i += 2;
        continue;
      }
      append_codepoint_utf8(out, u);
      i += 2;
    }
    if (i < bytes.size()) {  // odd trailing byte
      needed_escape = true;
      if (escaping) escape_byte(out, bytes[i]);
    }
    if (!needed_escape) {
      if (used_escapes) *used_escapes = false;
      return out;
    }
    if (escaping) {
      if (used_escapes) *used_escapes = true;
      return out;
    }
  }
  return {};
}

bool is_uuid_shaped(std::string_view s) {
  if (s.size() != 36) return false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (i == 8 || i == 13 || i == 18 || i == 23) {
      if (s[i] != '-') return false;
    } else if (!std::isxdigit(static_cast<unsigned char>(s[i]))) {
      return false;
    }
  }
  return true;
}

}  // namespace streamtrace
