#include "streamtrace/log_parser.hpp"

#include <algorithm>

namespace streamtrace {

const char* log_level_name(LogLevel l) noexcept {
  switch (l) {
    case LogLevel::Debug: return "Debug";
    case LogLevel::Info: return "Info";
    case LogLevel::Notice: return "Notice";
    case LogLevel::Warning: return "Warning";
    case LogLevel::Error: return "Error";
    case LogLevel::Fatal: return "Fatal";
    case LogLevel::Unknown: return "Unknown";
  }
  return "Unknown";
}

const char* log_category_name(LogCategory c) noexcept {
  switch (c) {
    case LogCategory::SessionStart: return "SessionStart";
    case LogCategory::SessionStop: return "SessionStop";
    case LogCategory::AddonInstall: return "AddonInstall";
    case LogCategory::AddonUpdate: return "AddonUpdate";
    case LogCategory::PlaybackOpen: return "PlaybackOpen";
    case LogCategory::Search: return "Search";
    case LogCategory::AccountInfo: return "AccountInfo";
    case LogCategory::Other: return "Other";
  }
  return "Other";
}

std::optional<LogCategory> log_category_from_name(const std::string& name) {
  static const std::pair<const char*, LogCategory> kNames[] = {
      {"SessionStart", LogCategory::SessionStart},
      {"SessionStop", LogCategory::SessionStop},
      {"AddonInstall", LogCategory::AddonInstall},
      {"AddonUpdate", LogCategory::AddonUpdate},
      {"PlaybackOpen", LogCategory::PlaybackOpen},
      {"Search", LogCategory::Search},
      {"AccountInfo", LogCategory::AccountInfo},
      {"Other", LogCategory::Other}};
  for (const auto& [n, c] : kNames)
    if (name == n) return c;
  return std::nullopt;
}

namespace {

LogLevel level_from_text(const std::string& text) {
  if (text == "DEBUG") return LogLevel::Debug;
  if (text == "INFO") return LogLevel::Info;
  if (text == "NOTICE") return LogLevel::Notice;
  if (text == "WARNING") return LogLevel::Warning;
  if (text == "ERROR") return LogLevel::Error;
  if (text == "FATAL" || text == "SEVERE") return LogLevel::Fatal;
  return LogLevel::Unknown;
}

std::vector<std::string> split_lines(std::span<const uint8_t> bytes) {
  std::vector<std::string> lines;
  std::string current;
  for (uint8_t b : bytes) {
    if (b == '\n') {
      if (!current.empty() && current.back() == '\r') current.pop_back();
      lines.push_back(std::move(current));
      current.clear();
    } else {
      current += static_cast<char>(b);
    }
  }
  if (!current.empty()) {
    if (current.back() == '\r') current.pop_back();
    lines.push_back(std::move(current));
  }
  return lines;
}

}  // namespace

std::pair<std::vector<LogEvent>, LogSessionSummary> parse_log(std::span<const uint8_t> bytes,
                                                              int session_index,
                                                              const LogProfile& profile) {
  std::vector<LogEvent> events;
  LogSessionSummary summary;
  summary.session_index = session_index;

  std::vector<std::string> lines = split_lines(bytes);
  summary.total_lines = static_cast<int>(lines.size());

  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    std::smatch m;
    const LogRule* matched = nullptr;
    for (const LogRule& rule : profile.rules) {
      if (std::regex_search(line, m, rule.compiled)) {
        matched = &rule;
        break;
      }
    }

    if (!matched) {
      if (!events.empty()) {  // continuation of the previous event
        events.back().message += '\n';
        events.back().message += line;
        events.back().continuation_lines += 1;
        continue;
      }
      LogEvent ev;  // leading line with no recognizable prefix
      ev.session_index = session_index;
      ev.raw_line_number = static_cast<int>(i) + 1;
      ev.category = LogCategory::Other;
      ev.level = LogLevel::Unknown;
      ev.message = line;
      events.push_back(std::move(ev));
      continue;
    }

    LogEvent ev;
    ev.session_index = session_index;
    ev.raw_line_number = static_cast<int>(i) + 1;
    ev.category = log_category_from_name(matched->category).value_or(LogCategory::Other);
    ev.message = line;
    for (size_t g = 0; g < matched->captures.size(); ++g) {
      if (g + 1 >= m.size() || !m[g + 1].matched) continue;
      const std::string& name = matched->captures[g];
      std::string value = m[g + 1].str();
      if (name == "timestamp") {
        ev.timestamp = parse_local_timestamp(value);
      } else if (name == "level") {
        ev.level = level_from_text(value);
      } else if (name == "query") {
        ev.extracted[name] = url_decode(value);
      } else {
        ev.extracted[name] = value;
      }
    }
    // a playback event without a captured location is no playback event
    if (ev.category == LogCategory::PlaybackOpen && !ev.extracted.count("url") &&
        !ev.extracted.count("path"))
      ev.category = LogCategory::Other;
    events.push_back(std::move(ev));
  }

  for (const LogEvent& ev : events) {
    summary.event_counts[ev.category] += 1;
    if (ev.category == LogCategory::SessionStart && !summary.kodi_version_banner) {
      auto it = ev.extracted.find("version");
      if (it != ev.extracted.end()) summary.kodi_version_banner = it->second;
    }
    if (ev.timestamp) {
      if (!summary.first_timestamp ||
          LocalClockTime::compare(*ev.timestamp, *summary.first_timestamp) < 0)
        summary.first_timestamp = ev.timestamp;
      if (!summary.last_timestamp ||
          LocalClockTime::compare(*ev.timestamp, *summary.last_timestamp) > 0)
        summary.last_timestamp = ev.timestamp;
    }
  }
  return {std::move(events), std::move(summary)};
}

SessionPairing pair_sessions(const LogSessionSummary& current,
                             const std::optional<LogSessionSummary>& previous) {
  SessionPairing out;
  if (previous) {
    out.sessions.push_back({*previous});
    out.sessions.push_back({current});
    // comparable only when both logs carry full dates
    if (previous->last_timestamp && current.first_timestamp &&
        previous->last_timestamp->dated() && current.first_timestamp->dated() &&
        LocalClockTime::compare(*previous->last_timestamp, *current.first_timestamp) > 0) {
      out.anomalies.push_back(
          "previous session log ends after the current log begins (clock tamper or file swap)");
    }
  } else {
    out.sessions.push_back({current});
    out.warnings.push_back(
        "previous session log absent: Kodi overwrites its oldest log on start; "
        "possible post-seizure execution destroyed it");
  }
  return out;
}

}  // namespace streamtrace
