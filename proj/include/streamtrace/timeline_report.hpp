#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "streamtrace/addon_inspector.hpp"
#include "streamtrace/evidence_source.hpp"
#include "streamtrace/kodi_db.hpp"
#include "streamtrace/locator.hpp"
#include "streamtrace/log_parser.hpp"

namespace streamtrace {

inline constexpr const char* kReportSchema = "streamtrace-report/1";
inline constexpr const char* kToolVersion = "0.1.0";

enum class EventSource {
  AddonsDb,
  MyVideosDb,
  TexturesDb,
  ViewModesDb,
  LogCurrent,
  LogPrevious,
  PackagesFolder,
  AddonManifest
};

const char* event_source_name(EventSource s) noexcept;

struct TimelineEvent {
  std::optional<LocalClockTime> timestamp;  // device clocks are never trusted
  EventSource source = EventSource::AddonsDb;
  std::string event_kind;
  std::string subject;
  std::map<std::string, std::string> detail;
  std::string evidence_file;
  std::string evidence_sha256;
  sqlite::Liveness liveness = sqlite::Liveness::Live;
};

// Total order: dated events by (timestamp, source, subject), undated events
// after all dated ones, grouped by source. Exposed for the property tests.
bool timeline_event_less(const TimelineEvent& a, const TimelineEvent& b);

// Everything extracted from one database file.
struct DatabaseArtifacts {
  DatabaseFile file;
  bool parsed = false;
  uint32_t page_count = 0;
  std::string error;  // extraction failure, e.g. NoRecognizedTables
  AddonExtraction addons;
  std::vector<PlaybackRecord> playback;
  std::vector<TextureRecord> textures;
  std::vector<UsageRecord> usage;
  std::vector<sqlite::Anomaly> anomalies;
};

struct LogArtifacts {
  LogFileRef file;
  std::vector<LogEvent> events;
  LogSessionSummary summary;
};

struct InstallationArtifacts {
  KodiInstallation install;
  std::vector<DatabaseArtifacts> databases;
  std::vector<LogArtifacts> logs;
  SessionPairing sessions;
  AddonInspection addons_on_disk;
  std::vector<PackageArtifact> packages;
  std::vector<Discrepancy> discrepancies;
  std::vector<std::string> warnings;
};

struct CaseData {
  std::vector<InstallationArtifacts> installations;
  std::vector<std::string> global_warnings;
};

std::vector<TimelineEvent> build_timeline(const CaseData& data, const EvidenceSource& source);

enum class ReportFormat { JSON, CSV, HTML };

std::optional<ReportFormat> report_format_from_name(const std::string& name);
const char* report_format_extension(ReportFormat f) noexcept;

struct EvidenceReport {
  std::string case_id;
  std::string examiner;
  std::string opened_at;  // tool clock, RFC 3339 UTC
  std::string evidence_root;
  CaseData data;
  std::vector<TimelineEvent> timeline;
  std::vector<HashManifestEntry> manifest;
};

EvidenceReport assemble_report(const EvidenceSource& source, CaseData data);

// JSON is the canonical full-fidelity form; CSV flattens the timeline
// (RFC 4180, CRLF, header row); HTML is static and self-contained with the
// JSON embedded verbatim. Deterministic: identical inputs, identical bytes.
std::string emit_report(const EvidenceReport& report, ReportFormat format);

std::string emit_timeline_json(const std::vector<TimelineEvent>& timeline);
std::string emit_timeline_csv(const std::vector<TimelineEvent>& timeline);
std::string emit_installation_artifacts_json(const InstallationArtifacts& installation);

}  // namespace streamtrace
