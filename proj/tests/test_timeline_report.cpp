#include <doctest.h>

#include "test_support.hpp"

#include <random>

#include "streamtrace/pipeline.hpp"
#include "streamtrace/timeline_report.hpp"

using namespace streamtrace;
using testsupport::fixture_dir;

namespace {

TimelineEvent make_event(std::optional<LocalClockTime> ts, EventSource src,
                         const std::string& kind, const std::string& subject) {
  TimelineEvent e;
  e.timestamp = std::move(ts);
  e.source = src;
  e.event_kind = kind;
  e.subject = subject;
  return e;
}

CaseData accept_case(const EvidenceSource& src) {
  return run_extraction(src, load_profiles(), {});
}

}  // namespace

TEST_CASE("addon record with two temporal fields yields two events") {
  CaseData data;
  InstallationArtifacts inst;
  DatabaseArtifacts db;
  db.file.relative_path = "x/Addons27.db";
  db.file.role = classify_database("Addons27.db");
  AddonRecord a;
  a.addon_id = "plugin.video.example";
  a.install_date = parse_local_timestamp("2019-05-21 13:05:47");
  a.last_used = parse_local_timestamp("2019-06-01 10:20:11");
  db.addons.addons.push_back(a);
  inst.databases.push_back(db);
  data.installations.push_back(inst);

  testsupport::TempDir tmp("tl");
  EvidenceSource src(tmp.path, "c", "e");
  auto timeline = build_timeline(data, src);
  REQUIRE(timeline.size() == 2);
  CHECK(timeline[0].event_kind == "addon_installed");
  CHECK(timeline[1].event_kind == "addon_last_used");
}

TEST_CASE("artifact with no temporal field yields one undated tail event") {
  CaseData data;
  InstallationArtifacts inst;
  DatabaseArtifacts db;
  db.file.relative_path = "x/MyVideos93.db";
  db.file.role = classify_database("MyVideos93.db");
  PlaybackRecord p;
  p.file_name = "clip.mp4";
  p.path = "/home/u/";
  db.playback.push_back(p);  // last_played absent
  AddonRecord a;
  a.addon_id = "dated.addon";
  a.install_date = parse_local_timestamp("2019-01-01 00:00:00");
  DatabaseArtifacts db2;
  db2.file.relative_path = "x/Addons27.db";
  db2.addons.addons.push_back(a);
  inst.databases.push_back(db2);
  inst.databases.push_back(db);
  data.installations.push_back(inst);

  testsupport::TempDir tmp("tl2");
  EvidenceSource src(tmp.path, "c", "e");
  auto timeline = build_timeline(data, src);
  REQUIRE(timeline.size() == 2);
  CHECK(timeline[0].event_kind == "addon_installed");  // dated first
  CHECK(timeline[1].event_kind == "video_played");     // undated at the tail
  CHECK(!timeline[1].timestamp.has_value());
}

TEST_CASE("equal timestamps break ties deterministically by source then subject") {
  auto ts = parse_local_timestamp("2019-06-01 10:00:00");
  TimelineEvent a = make_event(ts, EventSource::MyVideosDb, "video_played", "bbb");
  TimelineEvent b = make_event(ts, EventSource::AddonsDb, "addon_installed", "aaa");
  TimelineEvent c = make_event(ts, EventSource::AddonsDb, "addon_installed", "zzz");
  CHECK(timeline_event_less(b, a));  // AddonsDb ranks before MyVideosDb
  CHECK(timeline_event_less(b, c));  // same source: subject order
  CHECK(!timeline_event_less(a, b));
}

TEST_CASE("comparator is a strict weak order: antisymmetric and transitive") {
  std::mt19937 rng(42);
  auto random_event = [&]() {
    TimelineEvent e;
    if (rng() % 3 != 0) {
      if (rng() % 4 == 0) {
        LocalClockTime t;
        t.has_time = true;
        t.hour = static_cast<int>(rng() % 24);
        t.minute = static_cast<int>(rng() % 60);
        t.second = static_cast<int>(rng() % 60);
        e.timestamp = t;  // time-only: undated
      } else {
        e.timestamp = local_time_from_parts(2019, 1 + rng() % 12, 1 + rng() % 28,
                                            rng() % 24, rng() % 60, rng() % 60);
      }
    }
    e.source = static_cast<EventSource>(rng() % 8);
    e.event_kind = std::string("kind") + std::to_string(rng() % 4);
    e.subject = std::string("subj") + std::to_string(rng() % 6);
    e.evidence_file = std::string("file") + std::to_string(rng() % 3);
    return e;
  };

  std::vector<TimelineEvent> events;
  for (int i = 0; i < 300; ++i) events.push_back(random_event());

  for (size_t i = 0; i < events.size(); ++i)
    for (size_t j = 0; j < events.size(); ++j) {
      bool ij = timeline_event_less(events[i], events[j]);
      bool ji = timeline_event_less(events[j], events[i]);
      CHECK(!(ij && ji));  // antisymmetry
    }

  // transitivity on sampled triples
  for (int n = 0; n < 20000; ++n) {
    const TimelineEvent& a = events[rng() % events.size()];
    const TimelineEvent& b = events[rng() % events.size()];
    const TimelineEvent& c = events[rng() % events.size()];
    if (timeline_event_less(a, b) && timeline_event_less(b, c))
      CHECK(timeline_event_less(a, c));
  }

  // undated-last and grouped-by-source after sorting
  std::stable_sort(events.begin(), events.end(), timeline_event_less);
  bool seen_undated = false;
  for (const TimelineEvent& e : events) {
    bool undated = !e.timestamp || !e.timestamp->dated();
    if (seen_undated) CHECK(undated);
    if (undated) seen_undated = true;
  }
}

TEST_CASE("empty case emits valid JSON with an empty timeline") {
  testsupport::TempDir tmp("empty");
  EvidenceSource src(tmp.path, "EMPTY-1", "nobody");
  EvidenceReport report = assemble_report(src, CaseData{});
  std::string json_text = emit_report(report, ReportFormat::JSON);
  auto doc = nlohmann::json::parse(json_text);
  CHECK(doc.at("schema") == "streamtrace-report/1");
  CHECK(doc.at("timeline").is_array());
  CHECK(doc.at("timeline").empty());
  CHECK(doc.at("case").at("case_id") == "EMPTY-1");
}

TEST_CASE("report emission is byte-deterministic") {
  EvidenceSource::Options options;
  options.fixed_clock = parse_rfc3339("2024-01-01T00:00:00Z");
  EvidenceSource src(fixture_dir() / "trees" / "crossref", "C-DET", "ex", options);
  CaseData data = accept_case(src);
  EvidenceReport report = assemble_report(src, std::move(data));
  for (ReportFormat f : {ReportFormat::JSON, ReportFormat::CSV, ReportFormat::HTML}) {
    std::string once = emit_report(report, f);
    std::string twice = emit_report(report, f);
    CHECK(once == twice);
  }
}

TEST_CASE("JSON round-trip preserves the logical content") {
  EvidenceSource::Options options;
  options.fixed_clock = parse_rfc3339("2024-01-01T00:00:00Z");
  EvidenceSource src(fixture_dir() / "trees" / "single_log", "C-RT", "ex", options);
  CaseData data = accept_case(src);
  EvidenceReport report = assemble_report(src, std::move(data));
  auto doc = nlohmann::json::parse(emit_report(report, ReportFormat::JSON));

  CHECK(doc.at("case").at("case_id") == "C-RT");
  CHECK(doc.at("installations").size() == report.data.installations.size());
  CHECK(doc.at("timeline").size() == report.timeline.size());
  CHECK(doc.at("manifest").size() == report.manifest.size());
  for (size_t i = 0; i < report.timeline.size(); ++i) {
    const auto& ev = doc.at("timeline")[i];
    CHECK(ev.at("event_kind") == report.timeline[i].event_kind);
    CHECK(ev.at("subject") == report.timeline[i].subject);
    CHECK(ev.at("evidence_file") == report.timeline[i].evidence_file);
  }
}

TEST_CASE("traceability: every timeline event's hash matches the manifest") {
  EvidenceSource src(fixture_dir() / "trees" / "accept", "c", "e");
  CaseData data = accept_case(src);
  auto timeline = build_timeline(data, src);
  REQUIRE(!timeline.empty());
  for (const TimelineEvent& e : timeline) {
    auto entry = src.manifest_entry(e.evidence_file);
    REQUIRE_MESSAGE(entry.has_value(), "missing manifest entry for " << e.evidence_file);
    CHECK(entry->sha256 == e.evidence_sha256);
  }
}

TEST_CASE("CSV quoting round-trips through a reference CSV reader") {
  TimelineEvent e = make_event(parse_local_timestamp("2019-06-01 10:00:00"),
                               EventSource::LogCurrent, "video_played",
                               "http://host/play?a=1,2&b=\"x\"");
  e.detail["note"] = "line1\nline2, with comma";
  e.evidence_file = "logs/kodi.log";
  std::string csv = emit_timeline_csv({e});

  testsupport::TempDir tmp("csv");
  std::ofstream(tmp.path / "t.csv", std::ios::binary) << csv;
  // reference parser: Python's csv module
  auto result = testsupport::run_command(
      "python3 -c \"import csv,json,sys; rows=list(csv.reader(open('" +
      (tmp.path / "t.csv").string() +
      "', newline=''))); print(json.dumps(rows))\"");
  REQUIRE(result.exit_code == 0);
  auto rows = nlohmann::json::parse(result.out);
  REQUIRE(rows.size() == 2);  // header + one record
  CHECK(rows[1][4] == "http://host/play?a=1,2&b=\"x\"");
  CHECK(rows[0][0] == "timestamp");
  CHECK(rows[1][0] == "2019-06-01T10:00:00?");

  // CRLF line endings per RFC 4180
  CHECK(csv.find("\r\n") != std::string::npos);
}

TEST_CASE("HTML report embeds the JSON and stays self-contained") {
  testsupport::TempDir tmp("html");
  EvidenceSource src(tmp.path, "C-HTML", "ex");
  EvidenceReport report = assemble_report(src, CaseData{});
  std::string html = emit_report(report, ReportFormat::HTML);
  CHECK(html.find("<script type=\"application/json\" id=\"streamtrace-report\">") !=
        std::string::npos);
  CHECK(html.find("C-HTML") != std::string::npos);
  CHECK(html.find("src=\"http") == std::string::npos);  // nothing fetched remotely
  CHECK(html.find("href=\"http") == std::string::npos);

  // the embedded JSON block parses after unescaping
  size_t start = html.find("id=\"streamtrace-report\">");
  size_t open = html.find('\n', start) + 1;
  size_t close = html.find("\n</script>", open);
  std::string embedded = html.substr(open, close - open);
  auto doc = nlohmann::json::parse(embedded);
  CHECK(doc.at("case").at("case_id") == "C-HTML");
}
