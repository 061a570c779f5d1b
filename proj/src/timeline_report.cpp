#include "streamtrace/timeline_report.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "streamtrace/errors.hpp"

namespace streamtrace {

using nlohmann::ordered_json;

const char* event_source_name(EventSource s) noexcept {
  switch (s) {
    case EventSource::AddonsDb: return "AddonsDb";
    case EventSource::MyVideosDb: return "MyVideosDb";
    case EventSource::TexturesDb: return "TexturesDb";
    case EventSource::ViewModesDb: return "ViewModesDb";
    case EventSource::LogCurrent: return "LogCurrent";
    case EventSource::LogPrevious: return "LogPrevious";
    case EventSource::PackagesFolder: return "PackagesFolder";
    case EventSource::AddonManifest: return "AddonManifest";
  }
  return "AddonsDb";
}

std::optional<ReportFormat> report_format_from_name(const std::string& name) {
  std::string lower = to_lower(name);
  if (lower == "json") return ReportFormat::JSON;
  if (lower == "csv") return ReportFormat::CSV;
  if (lower == "html") return ReportFormat::HTML;
  return std::nullopt;
}

const char* report_format_extension(ReportFormat f) noexcept {
  switch (f) {
    case ReportFormat::JSON: return "json";
    case ReportFormat::CSV: return "csv";
    case ReportFormat::HTML: return "html";
  }
  return "json";
}

namespace {

std::string detail_signature(const std::map<std::string, std::string>& detail) {
  std::string out;
  for (const auto& [k, v] : detail) {
    out += k;
    out += '=';
    out += v;
    out += ';';
  }
  return out;
}

}  // namespace

bool timeline_event_less(const TimelineEvent& a, const TimelineEvent& b) {
  bool a_dated = a.timestamp && a.timestamp->dated();
  bool b_dated = b.timestamp && b.timestamp->dated();
  if (a_dated != b_dated) return a_dated;  // dated events first

  auto rank = [](EventSource s) { return static_cast<int>(s); };
  auto tail = [&](const TimelineEvent& e) {
    return std::make_tuple(e.subject, e.event_kind, e.evidence_file,
                           static_cast<int>(e.liveness), detail_signature(e.detail));
  };

  if (a_dated) {
    std::string ta = a.timestamp->sort_key();
    std::string tb = b.timestamp->sort_key();
    if (ta != tb) return ta < tb;
    if (rank(a.source) != rank(b.source)) return rank(a.source) < rank(b.source);
    return tail(a) < tail(b);
  }

  // undated: grouped by source, time-of-day (when any) inside the group
  if (rank(a.source) != rank(b.source)) return rank(a.source) < rank(b.source);
  std::string ta = a.timestamp ? a.timestamp->sort_key() : "";
  std::string tb = b.timestamp ? b.timestamp->sort_key() : "";
  if (ta != tb) return ta < tb;
  return tail(a) < tail(b);
}

namespace {

std::string sha_for(const EvidenceSource& source, const std::string& relative_path) {
  auto entry = source.manifest_entry(relative_path);
  return entry ? entry->sha256 : "";
}

struct TimelineBuilder {
  const EvidenceSource& source;
  std::vector<TimelineEvent> events;

  void add(std::optional<LocalClockTime> ts, EventSource src, std::string kind,
           std::string subject, std::map<std::string, std::string> detail,
           const std::string& evidence_file, sqlite::Liveness liveness) {
    TimelineEvent e;
    e.timestamp = std::move(ts);
    e.source = src;
    e.event_kind = std::move(kind);
    e.subject = std::move(subject);
    e.detail = std::move(detail);
    e.evidence_file = evidence_file;
    e.evidence_sha256 = sha_for(source, evidence_file);
    e.liveness = liveness;
    events.push_back(std::move(e));
  }

  void add_database(const DatabaseArtifacts& db) {
    const std::string& file = db.file.relative_path;
    for (const AddonRecord& a : db.addons.addons) {
      std::map<std::string, std::string> detail;
      if (a.origin) detail["origin"] = *a.origin;
      if (a.origin_installer_heuristic) detail["origin_installer_heuristic"] = "true";
      if (a.enabled) detail["enabled"] = *a.enabled ? "true" : "false";
      int emitted = 0;
      if (a.install_date)
        add(a.install_date, EventSource::AddonsDb, "addon_installed", a.addon_id, detail,
            file, a.liveness),
            ++emitted;
      if (a.last_updated)
        add(a.last_updated, EventSource::AddonsDb, "addon_updated", a.addon_id, detail, file,
            a.liveness),
            ++emitted;
      if (a.last_used)
        add(a.last_used, EventSource::AddonsDb, "addon_last_used", a.addon_id, detail, file,
            a.liveness),
            ++emitted;
      if (emitted == 0)
        add(std::nullopt, EventSource::AddonsDb, "addon_recorded", a.addon_id, detail, file,
            a.liveness);
    }
    for (const RepoRecord& r : db.addons.repos) {
      std::map<std::string, std::string> detail;
      if (r.version) detail["version"] = *r.version;
      if (r.checksum) detail["checksum"] = *r.checksum;
      if (r.last_checked)
        add(r.last_checked, EventSource::AddonsDb, "repo_checked", r.repo_id, detail, file,
            r.liveness);
      else
        add(std::nullopt, EventSource::AddonsDb, "repo_present", r.repo_id, detail, file,
            r.liveness);
    }
    for (const PlaybackRecord& p : db.playback) {
      std::map<std::string, std::string> detail;
      detail["path"] = p.path;
      detail["source_kind"] = source_kind_name(p.source_kind);
      if (p.play_count) detail["play_count"] = std::to_string(*p.play_count);
      std::string subject = p.file_name.empty() ? p.path : p.file_name;
      add(p.last_played, EventSource::MyVideosDb, "video_played", subject, detail, file,
          p.liveness);
    }
    for (const TextureRecord& t : db.textures) {
      std::map<std::string, std::string> detail;
      if (t.cached_path) detail["cached_path"] = *t.cached_path;
      add(std::nullopt, EventSource::TexturesDb, "texture_cached", t.url, detail, file,
          t.liveness);
    }
    for (const UsageRecord& u : db.usage) {
      std::map<std::string, std::string> detail;
      for (const auto& [name, value] : u.raw_columns) {
        std::string s = cell_to_string(value);
        if (!s.empty()) detail[name] = s;
      }
      add(std::nullopt, EventSource::ViewModesDb, "usage_row", u.table_name, detail, file,
          u.liveness);
    }
  }

  void add_log(const LogArtifacts& log) {
    EventSource src =
        log.file.session_index == 0 ? EventSource::LogCurrent : EventSource::LogPrevious;
    static const std::map<LogCategory, const char*> kKinds = {
        {LogCategory::SessionStart, "session_start"},
        {LogCategory::SessionStop, "session_stop"},
        {LogCategory::AddonInstall, "addon_installed"},
        {LogCategory::AddonUpdate, "addon_updated"},
        {LogCategory::PlaybackOpen, "video_played"},
        {LogCategory::Search, "search"},
        {LogCategory::AccountInfo, "account_info"}};
    for (const LogEvent& ev : log.events) {
      auto kind = kKinds.find(ev.category);
      if (kind == kKinds.end()) continue;  // Other lines stay in the summary
      std::map<std::string, std::string> detail(ev.extracted.begin(), ev.extracted.end());
      detail["level"] = log_level_name(ev.level);
      detail["line"] = std::to_string(ev.raw_line_number);
      std::string subject;
      for (const char* key : {"url", "path", "addon_id", "query", "user", "version"}) {
        auto it = ev.extracted.find(key);
        if (it != ev.extracted.end()) {
          subject = it->second;
          break;
        }
      }
      if (subject.empty()) subject = ev.message.substr(0, 80);
      add(ev.timestamp, src, kind->second, subject, std::move(detail), log.file.relative_path,
          sqlite::Liveness::Live);
    }
  }

  void add_installation(const InstallationArtifacts& inst) {
    for (const DatabaseArtifacts& db : inst.databases) add_database(db);
    for (const LogArtifacts& log : inst.logs) add_log(log);
    for (const PackageArtifact& p : inst.packages) {
      std::map<std::string, std::string> detail;
      detail["addon_id"] = p.implied_addon_id;
      if (p.implied_version) detail["version"] = *p.implied_version;
      if (!p.sha256.empty()) detail["sha256"] = p.sha256;
      if (p.nonstandard_name) detail["nonstandard_name"] = "true";
      add(p.file_mtime, EventSource::PackagesFolder, "package_downloaded", p.zip_name, detail,
          p.relative_path, sqlite::Liveness::Live);
      if (p.zip_earliest)
        add(p.zip_earliest, EventSource::PackagesFolder, "package_content_timestamp",
            p.zip_name, detail, p.relative_path, sqlite::Liveness::Live);
    }
    for (const AddonManifest& m : inst.addons_on_disk.manifests) {
      std::map<std::string, std::string> detail;
      detail["kind"] = addon_kind_name(m.kind);
      if (!m.version.empty()) detail["version"] = m.version;
      if (m.update_url) detail["update_url"] = *m.update_url;
      if (!m.anomalies.empty()) detail["anomalies"] = join(m.anomalies, ',');
      add(std::nullopt, EventSource::AddonManifest, "addon_on_disk", m.addon_id, detail,
          m.metadata_path.empty() ? m.dir_path : m.metadata_path, sqlite::Liveness::Live);
    }
  }
};

}  // namespace

std::vector<TimelineEvent> build_timeline(const CaseData& data, const EvidenceSource& source) {
  TimelineBuilder builder{source, {}};
  for (const InstallationArtifacts& inst : data.installations)
    builder.add_installation(inst);
  std::stable_sort(builder.events.begin(), builder.events.end(), timeline_event_less);
  return std::move(builder.events);
}

EvidenceReport assemble_report(const EvidenceSource& source, CaseData data) {
  EvidenceReport report;
  report.case_id = source.case_id();
  report.examiner = source.examiner();
  report.opened_at = source.opened_at();
  report.evidence_root = source.root().string();
  report.timeline = build_timeline(data, source);
  report.data = std::move(data);
  report.manifest = source.export_manifest();
  return report;
}

namespace {

ordered_json time_json(const std::optional<LocalClockTime>& t) {
  if (!t) return nullptr;
  ordered_json j;
  j["display"] = t->display();
  j["original"] = t->original;
  return j;
}

ordered_json cell_json(const sqlite::CellValue& v) {
  using K = sqlite::CellValue::Kind;
  ordered_json j;
  switch (v.kind) {
    case K::Null: j["null"] = true; break;
    case K::Integer: j["i"] = v.integer_value; break;
    case K::Float: j["f"] = v.float_value; break;
    case K::Text: j["t"] = v.text_value; break;
    case K::Blob: j["b"] = hex_lower(v.blob_value); break;
  }
  if (v.truncated) j["truncated"] = true;
  if (v.text_escaped) j["escaped"] = true;
  return j;
}

ordered_json addon_json(const AddonRecord& a) {
  ordered_json j;
  j["addon_id"] = a.addon_id;
  if (a.enabled) j["enabled"] = *a.enabled;
  if (a.install_date) j["install_date"] = time_json(a.install_date);
  if (a.last_updated) j["last_updated"] = time_json(a.last_updated);
  if (a.last_used) j["last_used"] = time_json(a.last_used);
  if (a.origin) {
    j["origin"] = *a.origin;
    j["origin_installer_heuristic"] = a.origin_installer_heuristic;
  }
  j["liveness"] = sqlite::liveness_name(a.liveness);
  if (!a.extras.empty()) j["extras"] = a.extras;
  return j;
}

ordered_json repo_json(const RepoRecord& r) {
  ordered_json j;
  j["repo_id"] = r.repo_id;
  if (r.checksum) j["checksum"] = *r.checksum;
  if (r.last_checked) j["last_checked"] = time_json(r.last_checked);
  if (r.version) j["version"] = *r.version;
  j["liveness"] = sqlite::liveness_name(r.liveness);
  return j;
}

ordered_json playback_json(const PlaybackRecord& p) {
  ordered_json j;
  j["file_name"] = p.file_name;
  j["path"] = p.path;
  if (p.play_count) j["play_count"] = *p.play_count;
  if (p.last_played) j["last_played"] = time_json(p.last_played);
  j["source_kind"] = source_kind_name(p.source_kind);
  j["liveness"] = sqlite::liveness_name(p.liveness);
  return j;
}

ordered_json database_json(const DatabaseArtifacts& db) {
  ordered_json j;
  j["path"] = db.file.relative_path;
  j["role"] = db_role_name(db.file.role.role);
  if (db.file.role.suffix) j["suffix"] = *db.file.role.suffix;
  if (!db.file.sidecars.empty()) j["sidecars"] = db.file.sidecars;
  j["parsed"] = db.parsed;
  if (db.page_count) j["page_count"] = db.page_count;
  if (!db.error.empty()) j["error"] = db.error;
  if (!db.addons.addons.empty()) {
    ordered_json arr = ordered_json::array();
    for (const AddonRecord& a : db.addons.addons) arr.push_back(addon_json(a));
    j["addons"] = std::move(arr);
  }
  if (!db.addons.repos.empty()) {
    ordered_json arr = ordered_json::array();
    for (const RepoRecord& r : db.addons.repos) arr.push_back(repo_json(r));
    j["repos"] = std::move(arr);
  }
  if (!db.playback.empty()) {
    ordered_json arr = ordered_json::array();
    for (const PlaybackRecord& p : db.playback) arr.push_back(playback_json(p));
    j["playback"] = std::move(arr);
  }
  if (!db.textures.empty()) {
    ordered_json arr = ordered_json::array();
    for (const TextureRecord& t : db.textures) {
      ordered_json tj;
      tj["url"] = t.url;
      if (t.cached_path) tj["cached_path"] = *t.cached_path;
      tj["liveness"] = sqlite::liveness_name(t.liveness);
      arr.push_back(std::move(tj));
    }
    j["textures"] = std::move(arr);
  }
  if (!db.usage.empty()) {
    ordered_json arr = ordered_json::array();
    for (const UsageRecord& u : db.usage) {
      ordered_json uj;
      uj["table"] = u.table_name;
      ordered_json cols = ordered_json::array();
      for (const auto& [name, value] : u.raw_columns) {
        ordered_json cj;
        cj["column"] = name;
        cj["value"] = cell_json(value);
        cols.push_back(std::move(cj));
      }
      uj["columns"] = std::move(cols);
      uj["liveness"] = sqlite::liveness_name(u.liveness);
      arr.push_back(std::move(uj));
    }
    j["usage_rows"] = std::move(arr);
  }
  if (!db.anomalies.empty()) {
    ordered_json arr = ordered_json::array();
    for (const sqlite::Anomaly& a : db.anomalies) {
      ordered_json aj;
      aj["db_path"] = a.db_path;
      aj["page"] = a.page;
      aj["kind"] = a.kind;
      aj["detail"] = a.detail;
      arr.push_back(std::move(aj));
    }
    j["anomalies"] = std::move(arr);
  }
  return j;
}

ordered_json log_event_json(const LogEvent& ev) {
  ordered_json j;
  j["line"] = ev.raw_line_number;
  if (ev.timestamp) j["timestamp"] = time_json(ev.timestamp);
  j["level"] = log_level_name(ev.level);
  j["category"] = log_category_name(ev.category);
  j["message"] = ev.message;
  if (ev.continuation_lines) j["continuation_lines"] = ev.continuation_lines;
  if (!ev.extracted.empty()) j["extracted"] = ev.extracted;
  return j;
}

ordered_json installation_json(const InstallationArtifacts& inst) {
  ordered_json j;
  j["home_path"] = inst.install.home_path;
  j["platform"] = platform_name(inst.install.platform);
  if (inst.install.version_hint) {
    ordered_json vh;
    vh["database_suffix"] = inst.install.version_hint->database_suffix;
    if (inst.install.version_hint->release_name)
      vh["release_name"] = *inst.install.version_hint->release_name;
    j["version_hint"] = std::move(vh);
  }
  if (inst.install.userdata_dir) j["userdata_dir"] = *inst.install.userdata_dir;
  if (inst.install.addons_dir) j["addons_dir"] = *inst.install.addons_dir;

  ordered_json dbs = ordered_json::array();
  for (const DatabaseArtifacts& db : inst.databases) dbs.push_back(database_json(db));
  j["databases"] = std::move(dbs);

  ordered_json logs = ordered_json::array();
  for (const LogArtifacts& log : inst.logs) {
    ordered_json lj;
    lj["path"] = log.file.relative_path;
    lj["session_index"] = log.file.session_index;
    if (log.summary.kodi_version_banner) lj["version_banner"] = *log.summary.kodi_version_banner;
    if (log.summary.first_timestamp)
      lj["first_timestamp"] = time_json(log.summary.first_timestamp);
    if (log.summary.last_timestamp)
      lj["last_timestamp"] = time_json(log.summary.last_timestamp);
    lj["total_lines"] = log.summary.total_lines;
    ordered_json counts;
    for (const auto& [cat, n] : log.summary.event_counts)
      counts[log_category_name(cat)] = n;
    lj["event_counts"] = std::move(counts);
    ordered_json evs = ordered_json::array();
    for (const LogEvent& ev : log.events) evs.push_back(log_event_json(ev));
    lj["events"] = std::move(evs);
    logs.push_back(std::move(lj));
  }
  j["logs"] = std::move(logs);

  if (!inst.sessions.anomalies.empty()) j["session_anomalies"] = inst.sessions.anomalies;

  ordered_json manifests = ordered_json::array();
  for (const AddonManifest& m : inst.addons_on_disk.manifests) {
    ordered_json mj;
    mj["addon_id"] = m.addon_id;
    mj["version"] = m.version;
    mj["kind"] = addon_kind_name(m.kind);
    mj["dir_path"] = m.dir_path;
    if (m.provider) mj["provider"] = *m.provider;
    if (m.update_url) mj["update_url"] = *m.update_url;
    if (!m.dependencies.empty()) {
      ordered_json deps = ordered_json::array();
      for (const AddonDependency& d : m.dependencies) {
        ordered_json dj;
        dj["addon_id"] = d.addon_id;
        dj["min_version"] = d.min_version;
        if (d.optional) dj["optional"] = true;
        deps.push_back(std::move(dj));
      }
      mj["dependencies"] = std::move(deps);
    }
    mj["has_code"] = m.has_code;
    mj["has_license"] = m.has_license;
    if (m.code_file_count) {
      mj["code_file_count"] = m.code_file_count;
      mj["code_line_count"] = m.code_line_count;
    }
    if (!m.code_urls.empty()) mj["code_urls"] = m.code_urls;
    if (!m.anomalies.empty()) mj["anomalies"] = m.anomalies;
    manifests.push_back(std::move(mj));
  }
  j["addon_manifests"] = std::move(manifests);
  if (!inst.addons_on_disk.unreadable_entries.empty())
    j["unreadable_addon_entries"] = inst.addons_on_disk.unreadable_entries;

  ordered_json packages = ordered_json::array();
  for (const PackageArtifact& p : inst.packages) {
    ordered_json pj;
    pj["zip_name"] = p.zip_name;
    pj["path"] = p.relative_path;
    pj["implied_addon_id"] = p.implied_addon_id;
    if (p.implied_version) pj["implied_version"] = *p.implied_version;
    if (p.nonstandard_name) pj["nonstandard_name"] = true;
    if (p.file_mtime) pj["file_mtime"] = time_json(p.file_mtime);
    if (p.zip_earliest) pj["zip_earliest"] = time_json(p.zip_earliest);
    if (p.zip_latest) pj["zip_latest"] = time_json(p.zip_latest);
    pj["sha256"] = p.sha256;
    packages.push_back(std::move(pj));
  }
  j["packages"] = std::move(packages);

  ordered_json discrepancies = ordered_json::array();
  for (const Discrepancy& d : inst.discrepancies) {
    ordered_json dj;
    dj["kind"] = discrepancy_kind_name(d.kind);
    dj["addon_id"] = d.addon_id;
    dj["detail"] = d.detail;
    discrepancies.push_back(std::move(dj));
  }
  j["discrepancies"] = std::move(discrepancies);
  if (!inst.warnings.empty()) j["warnings"] = inst.warnings;
  return j;
}

ordered_json timeline_event_json(const TimelineEvent& e) {
  ordered_json j;
  j["timestamp"] = e.timestamp ? ordered_json(e.timestamp->display()) : ordered_json(nullptr);
  j["clock_trust"] = "local-untrusted";
  j["source"] = event_source_name(e.source);
  j["event_kind"] = e.event_kind;
  j["subject"] = e.subject;
  if (!e.detail.empty()) j["detail"] = e.detail;
  j["evidence_file"] = e.evidence_file;
  j["evidence_sha256"] = e.evidence_sha256;
  j["liveness"] = sqlite::liveness_name(e.liveness);
  return j;
}

ordered_json report_json(const EvidenceReport& report) {
  ordered_json j;
  j["schema"] = kReportSchema;
  ordered_json c;
  c["case_id"] = report.case_id;
  c["examiner"] = report.examiner;
  c["opened_at"] = report.opened_at;
  c["tool_version"] = kToolVersion;
  c["evidence_root"] = report.evidence_root;
  j["case"] = std::move(c);

  ordered_json insts = ordered_json::array();
  for (const InstallationArtifacts& inst : report.data.installations)
    insts.push_back(installation_json(inst));
  j["installations"] = std::move(insts);

  ordered_json timeline = ordered_json::array();
  for (const TimelineEvent& e : report.timeline) timeline.push_back(timeline_event_json(e));
  j["timeline"] = std::move(timeline);

  std::vector<std::string> warnings = report.data.global_warnings;
  for (const InstallationArtifacts& inst : report.data.installations)
    for (const std::string& w : inst.warnings) warnings.push_back(inst.install.home_path + ": " + w);
  j["warnings"] = warnings;

  ordered_json manifest = ordered_json::array();
  for (const HashManifestEntry& e : report.manifest) {
    ordered_json mj;
    mj["path"] = e.relative_path;
    mj["sha256"] = e.sha256;
    mj["size"] = e.size_bytes;
    mj["read_at"] = e.read_at;
    if (e.kind != "file") {
      mj["kind"] = e.kind;
      mj["target"] = e.symlink_target;
    }
    manifest.push_back(std::move(mj));
  }
  j["manifest"] = std::move(manifest);
  return j;
}

std::string csv_quote(const std::string& field) {
  bool needs_quote = field.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quote) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

std::string timeline_csv_impl(const std::vector<TimelineEvent>& timeline) {
  std::string out =
      "timestamp,clock_trust,source,event_kind,subject,detail,evidence_file,"
      "evidence_sha256,liveness\r\n";
  for (const TimelineEvent& e : timeline) {
    ordered_json detail(e.detail);
    std::vector<std::string> fields = {
        e.timestamp ? e.timestamp->display() : "",
        "local-untrusted",
        event_source_name(e.source),
        e.event_kind,
        e.subject,
        e.detail.empty() ? "" : detail.dump(),
        e.evidence_file,
        e.evidence_sha256,
        sqlite::liveness_name(e.liveness)};
    for (size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += csv_quote(fields[i]);
    }
    out += "\r\n";
  }
  return out;
}

std::string html_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string emit_html(const EvidenceReport& report) {
  std::string json_text = report_json(report).dump(2);
  // "</" must not terminate the script block; "<\/" is the JSON-legal escape
  std::string embedded;
  embedded.reserve(json_text.size());
  for (size_t i = 0; i < json_text.size(); ++i) {
    if (json_text[i] == '<' && i + 1 < json_text.size() && json_text[i + 1] == '/') {
      embedded += "<\\/";
      ++i;
    } else {
      embedded += json_text[i];
    }
  }

  std::ostringstream out;
  out << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n"
      << "<title>streamtrace report " << html_escape(report.case_id) << "</title>\n"
      << "<style>\n"
      << "body{font-family:sans-serif;margin:2em;color:#222}\n"
      << "table{border-collapse:collapse;width:100%;margin:1em 0}\n"
      << "th,td{border:1px solid #bbb;padding:4px 8px;text-align:left;"
      << "font-size:13px;vertical-align:top}\n"
      << "th{background:#eee}\n"
      << ".warn{color:#a40000}\n"
      << "code{word-break:break-all}\n"
      << "</style>\n</head>\n<body>\n";
  out << "<h1>Evidence report: " << html_escape(report.case_id) << "</h1>\n";
  out << "<p>Examiner: " << html_escape(report.examiner) << " &middot; Opened: "
      << html_escape(report.opened_at) << " &middot; Tool: streamtrace " << kToolVersion
      << "</p>\n";
  out << "<p>Evidence root: <code>" << html_escape(report.evidence_root) << "</code></p>\n";
  out << "<p>All device timestamps are local clocks of unknown zone (suffix \"?\"); "
      << "they are reported unconverted.</p>\n";

  std::vector<std::string> warnings = report.data.global_warnings;
  for (const InstallationArtifacts& inst : report.data.installations)
    for (const std::string& w : inst.warnings)
      warnings.push_back(inst.install.home_path + ": " + w);
  if (!warnings.empty()) {
    out << "<h2>Warnings</h2>\n<ul>\n";
    for (const std::string& w : warnings)
      out << "<li class=\"warn\">" << html_escape(w) << "</li>\n";
    out << "</ul>\n";
  }

  out << "<h2>Installations (" << report.data.installations.size() << ")</h2>\n";
  out << "<table>\n<tr><th>Home</th><th>Platform</th><th>Version hint</th>"
      << "<th>Databases</th><th>Logs</th><th>Discrepancies</th></tr>\n";
  for (const InstallationArtifacts& inst : report.data.installations) {
    std::string version = inst.install.version_hint && inst.install.version_hint->release_name
                              ? *inst.install.version_hint->release_name
                              : "";
    out << "<tr><td><code>" << html_escape(inst.install.home_path) << "</code></td><td>"
        << platform_name(inst.install.platform) << "</td><td>" << html_escape(version)
        << "</td><td>" << inst.databases.size() << "</td><td>" << inst.logs.size()
        << "</td><td>" << inst.discrepancies.size() << "</td></tr>\n";
  }
  out << "</table>\n";

  out << "<h2>Timeline (" << report.timeline.size() << " events)</h2>\n";
  out << "<table>\n<tr><th>Timestamp</th><th>Source</th><th>Event</th><th>Subject</th>"
      << "<th>Evidence file</th><th>Liveness</th></tr>\n";
  for (const TimelineEvent& e : report.timeline) {
    out << "<tr><td>" << html_escape(e.timestamp ? e.timestamp->display() : "")
        << "</td><td>" << event_source_name(e.source) << "</td><td>"
        << html_escape(e.event_kind) << "</td><td>" << html_escape(e.subject)
        << "</td><td><code>" << html_escape(e.evidence_file) << "</code></td><td>"
        << sqlite::liveness_name(e.liveness) << "</td></tr>\n";
  }
  out << "</table>\n";

  out << "<h2>Chain of custody</h2>\n<p>" << report.manifest.size()
      << " files hashed (SHA-256); full manifest in the embedded report data.</p>\n";
  out << "<script type=\"application/json\" id=\"streamtrace-report\">\n"
      << embedded << "\n</script>\n";
  out << "</body>\n</html>\n";
  return out.str();
}

}  // namespace

std::string emit_report(const EvidenceReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::JSON: return report_json(report).dump(2) + "\n";
    case ReportFormat::CSV: return timeline_csv_impl(report.timeline);
    case ReportFormat::HTML: return emit_html(report);
  }
  raise(Errc::UnsupportedFormat, "unknown report format");
}

std::string emit_timeline_json(const std::vector<TimelineEvent>& timeline) {
  ordered_json arr = ordered_json::array();
  for (const TimelineEvent& e : timeline) arr.push_back(timeline_event_json(e));
  return arr.dump(2) + "\n";
}

std::string emit_timeline_csv(const std::vector<TimelineEvent>& timeline) {
  return timeline_csv_impl(timeline);
}

std::string emit_installation_artifacts_json(const InstallationArtifacts& installation) {
  return installation_json(installation).dump(2) + "\n";
}

}  // namespace streamtrace
