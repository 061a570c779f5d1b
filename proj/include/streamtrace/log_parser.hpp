#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "streamtrace/profiles.hpp"
#include "streamtrace/util.hpp"

namespace streamtrace {

enum class LogLevel { Debug, Info, Notice, Warning, Error, Fatal, Unknown };
enum class LogCategory {
  SessionStart,
  SessionStop,
  AddonInstall,
  AddonUpdate,
  PlaybackOpen,
  Search,
  AccountInfo,
  Other
};

const char* log_level_name(LogLevel l) noexcept;
const char* log_category_name(LogCategory c) noexcept;
std::optional<LogCategory> log_category_from_name(const std::string& name);

struct LogEvent {
  int session_index = 0;     // 0 = current log, 1 = previous log
  int raw_line_number = 0;   // 1-based line of the event's first line
  std::optional<LocalClockTime> timestamp;
  LogLevel level = LogLevel::Unknown;
  LogCategory category = LogCategory::Other;
  std::string message;           // byte-faithful; continuations joined with '\n'
  int continuation_lines = 0;
  std::map<std::string, std::string> extracted;
};

struct LogSessionSummary {
  int session_index = 0;
  std::optional<LocalClockTime> first_timestamp;
  std::optional<LocalClockTime> last_timestamp;
  std::optional<std::string> kodi_version_banner;
  std::map<LogCategory, int> event_counts;
  int total_lines = 0;
};

// Every input line yields exactly one event, except lines with no
// recognizable prefix, which continue the preceding event. Binary garbage
// is tolerated.
std::pair<std::vector<LogEvent>, LogSessionSummary> parse_log(std::span<const uint8_t> bytes,
                                                              int session_index,
                                                              const LogProfile& profile);

struct SessionPairing {
  struct Entry {
    LogSessionSummary summary;
  };
  std::vector<Entry> sessions;  // previous first, then current
  std::vector<std::string> warnings;
  std::vector<std::string> anomalies;
};

// Kodi overwrites its oldest log on startup; a missing previous log is a
// preservation warning, not an error.
SessionPairing pair_sessions(const LogSessionSummary& current,
                             const std::optional<LogSessionSummary>& previous);

}  // namespace streamtrace
