#include <doctest.h>

#include "test_support.hpp"

#include "streamtrace/errors.hpp"
#include "streamtrace/kodi_db.hpp"
#include "streamtrace/profiles.hpp"

using namespace streamtrace;
using testsupport::fixture_dir;
using testsupport::open_fixture_db;
using testsupport::read_json;

namespace {

const ColumnMaps& maps() {
  static ColumnMaps m = load_profiles().columns;
  return m;
}

}  // namespace

TEST_CASE("parse_create_table_columns") {
  int alias = -1;
  auto cols = parse_create_table_columns(
      "CREATE TABLE installed (id INTEGER PRIMARY KEY, addonID TEXT UNIQUE, enabled BOOLEAN,"
      " installDate TEXT, lastUpdated TEXT, lastUsed TEXT, origin TEXT NOT NULL DEFAULT '')",
      &alias);
  REQUIRE(cols.size() == 7);
  CHECK(cols[0] == "id");
  CHECK(cols[1] == "addonID");
  CHECK(cols[6] == "origin");
  CHECK(alias == 0);

  cols = parse_create_table_columns(
      "CREATE TABLE t (\"quoted col\" TEXT, [bracketed] INT, `ticked` REAL,"
      " PRIMARY KEY (\"quoted col\"))",
      &alias);
  REQUIRE(cols.size() == 3);
  CHECK(cols[0] == "quoted col");
  CHECK(cols[1] == "bracketed");
  CHECK(cols[2] == "ticked");
  CHECK(alias == -1);

  // table constraints are not columns
  cols = parse_create_table_columns(
      "CREATE TABLE x (a INTEGER, b TEXT, UNIQUE(a, b), CHECK(a > 0),"
      " FOREIGN KEY(a) REFERENCES y(z))",
      &alias);
  REQUIRE(cols.size() == 2);
}

TEST_CASE("classify_path source kinds") {
  CHECK(classify_path("http://host/stream/video") == SourceKind::NetworkURL);
  CHECK(classify_path("smb://nas.local/share/") == SourceKind::NetworkURL);
  CHECK(classify_path("plugin://plugin.video.example/") == SourceKind::NetworkURL);
  CHECK(classify_path("/media/usb0/movies/") == SourceKind::RemovableOrExternal);
  CHECK(classify_path("/mnt/external/") == SourceKind::RemovableOrExternal);
  CHECK(classify_path("/home/user/Videos/") == SourceKind::LocalFixed);
  CHECK(classify_path("C:\\Users\\X\\Videos\\") == SourceKind::LocalFixed);
  CHECK(classify_path("E:\\films\\") == SourceKind::RemovableOrExternal);
  CHECK(classify_path("\\\\server\\share\\") == SourceKind::NetworkURL);
  CHECK(classify_path("stack:///a/b.avi , /a/b2.avi") == SourceKind::Unknown);
  CHECK(classify_path("") == SourceKind::Unknown);
}

TEST_CASE("extract_addons: installed table with the installer-origin serial") {
  sqlite::Database db = open_fixture_db("f09_addons27.db");
  AddonExtraction got = extract_addons(db, maps(), true);

  REQUIRE(got.addons.size() >= 4);
  const AddonRecord* tmdb = nullptr;
  const AddonRecord* exodus = nullptr;
  for (const AddonRecord& a : got.addons) {
    if (a.addon_id == "metadata.themoviedb.org") tmdb = &a;
    if (a.addon_id == "repository.exodusredux") exodus = &a;
  }
  REQUIRE(tmdb != nullptr);
  REQUIRE(tmdb->origin.has_value());
  CHECK(*tmdb->origin == "b6a50484-93a0-4afb-a01c-8d17e059feda");
  CHECK(tmdb->origin_installer_heuristic);  // UUID-shaped: installer-loaded

  REQUIRE(exodus != nullptr);
  CHECK(!exodus->origin.has_value());  // empty origin reported as absent
  REQUIRE(exodus->enabled.has_value());
  CHECK(*exodus->enabled);
  REQUIRE(exodus->install_date.has_value());
  CHECK(exodus->install_date->original == "2019-05-21 13:02:11");
  CHECK(exodus->install_date->display() == "2019-05-21T13:02:11?");

  // repo table
  bool found_repo = false;
  for (const RepoRecord& r : got.repos) {
    if (r.repo_id == "repository.exodusredux") {
      found_repo = true;
      REQUIRE(r.version.has_value());
      CHECK(*r.version == "0.0.9");
      REQUIRE(r.last_checked.has_value());
      CHECK(r.last_checked->original == "2019-06-01 10:16:02");
    }
  }
  CHECK(found_repo);
}

TEST_CASE("extract_addons: empty addons DB yields two empty lists") {
  sqlite::Database db = open_fixture_db("f22_addons_empty.db");
  AddonExtraction got = extract_addons(db, maps(), true);
  CHECK(got.addons.empty());
  CHECK(got.repos.empty());
}

TEST_CASE("extract_addons: Isengard-era schema maps what exists") {
  sqlite::Database db = open_fixture_db("ubu_addons19.db");
  AddonExtraction got = extract_addons(db, maps(), false);
  REQUIRE(got.addons.size() == 2);
  CHECK(got.addons[0].addon_id == "plugin.video.oldtube");
  CHECK(!got.addons[0].enabled.has_value());       // v19 has no enabled column
  CHECK(!got.addons[0].install_date.has_value());  // nor install dates
  CHECK(got.addons[0].extras.count("version"));    // unmapped columns preserved
  REQUIRE(got.repos.size() == 1);
  CHECK(got.repos[0].repo_id == "repository.superrepo");
}

TEST_CASE("extract_addons: no recognized tables") {
  sqlite::Database db = open_fixture_db("f21_unrelated.db");
  CHECK_THROWS_AS(extract_addons(db, maps(), false), Error);
  try {
    extract_addons(db, maps(), false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NoRecognizedTables);
  }
}

TEST_CASE("schema tolerance: renamed non-essential column changes nothing essential") {
  sqlite::Database db = open_fixture_db("f19_renamed.db");
  AddonExtraction got = extract_addons(db, maps(), false);
  REQUIRE(got.addons.size() == 1);
  CHECK(got.addons[0].addon_id == "plugin.video.example");
  REQUIRE(got.addons[0].install_date.has_value());
  CHECK(got.addons[0].install_date->original == "2019-05-21 13:05:47");
}

TEST_CASE("schema tolerance: dropped essential column yields unknown, never a crash") {
  sqlite::Database db = open_fixture_db("f20_dropped.db");
  AddonExtraction got = extract_addons(db, maps(), false);
  REQUIRE(got.addons.size() == 1);
  CHECK(got.addons[0].addon_id == "plugin.video.example");
  CHECK(!got.addons[0].origin.has_value());  // column absent entirely
}

TEST_CASE("liveness propagation and carved addon recovery") {
  sqlite::Database db = open_fixture_db("crossref_addons27.db");
  AddonExtraction with_carved = extract_addons(db, maps(), true);
  const AddonRecord* carved = nullptr;
  for (const AddonRecord& a : with_carved.addons)
    if (a.addon_id == "script.module.uninstalled") carved = &a;
  REQUIRE(carved != nullptr);
  CHECK(carved->liveness == sqlite::Liveness::CarvedFreeblock);
  REQUIRE(carved->origin.has_value());
  CHECK(*carved->origin == "repository.exodusredux");
  REQUIRE(carved->install_date.has_value());
  CHECK(carved->install_date->original == "2019-05-22 09:00:00");

  sqlite::Database db2 = open_fixture_db("crossref_addons27.db");
  AddonExtraction without = extract_addons(db2, maps(), false);
  for (const AddonRecord& a : without.addons) {
    CHECK(a.liveness == sqlite::Liveness::Live);
    CHECK(a.addon_id != "script.module.uninstalled");
  }
}

TEST_CASE("count consistency: live addon records equal the reference row count") {
  sqlite::Database db = open_fixture_db("f09_addons27.db");
  AddonExtraction got = extract_addons(db, maps(), false);
  nlohmann::json dump = read_json(fixture_dir() / "expected" / "f09_addons27.json");
  size_t expected = dump.at("tables").at("installed").at("rows").size();
  CHECK(got.addons.size() == expected);
}

TEST_CASE("extract_playback joins files to paths and classifies sources") {
  sqlite::Database db = open_fixture_db("f10_myvideos93.db");
  std::vector<PlaybackRecord> got = extract_playback(db, maps(), false);
  REQUIRE(got.size() == 6);

  std::map<std::string, const PlaybackRecord*> by_name;
  for (const PlaybackRecord& p : got) by_name[p.file_name] = &p;

  REQUIRE(by_name.count("carnival_rio.mkv"));
  CHECK(by_name["carnival_rio.mkv"]->path == "/media/usb0/movies/");
  CHECK(by_name["carnival_rio.mkv"]->source_kind == SourceKind::RemovableOrExternal);
  REQUIRE(by_name["carnival_rio.mkv"]->play_count.has_value());
  CHECK(*by_name["carnival_rio.mkv"]->play_count == 1);
  REQUIRE(by_name["carnival_rio.mkv"]->last_played.has_value());
  CHECK(by_name["carnival_rio.mkv"]->last_played->original == "2019-05-29 22:41:17");

  CHECK(by_name["channel1.m3u8"]->source_kind == SourceKind::NetworkURL);
  CHECK(by_name["holiday.mp4"]->source_kind == SourceKind::LocalFixed);
  CHECK(by_name["heist_movie.avi"]->source_kind == SourceKind::RemovableOrExternal);

  // unplayed entries included with play_count absent or zero
  REQUIRE(by_name.count("unwatched_clip.mp4"));
  const PlaybackRecord* unwatched = by_name["unwatched_clip.mp4"];
  CHECK((!unwatched->play_count.has_value() || *unwatched->play_count == 0));
  CHECK(!unwatched->last_played.has_value());
}

TEST_CASE("extract_playback: empty DB and missing tables") {
  sqlite::Database empty = open_fixture_db("f23_myvideos_empty.db");
  CHECK(extract_playback(empty, maps(), true).empty());

  sqlite::Database wrong = open_fixture_db("f21_unrelated.db");
  CHECK_THROWS_AS(extract_playback(wrong, maps(), false), Error);
}

TEST_CASE("extract_textures: rows, empty DB, carved-only row") {
  sqlite::Database db = open_fixture_db("f11_textures13.db");
  std::vector<TextureRecord> got = extract_textures(db, maps(), true);
  const TextureRecord* live = nullptr;
  const TextureRecord* carved = nullptr;
  for (const TextureRecord& t : got) {
    if (t.url == "http://img.example.net/poster.jpg") live = &t;
    if (t.url == "http://img.example.net/thumb_deleted.jpg") carved = &t;
  }
  REQUIRE(live != nullptr);
  CHECK(live->liveness == sqlite::Liveness::Live);
  REQUIRE(live->cached_path.has_value());
  CHECK(*live->cached_path == "1/1a2b3c4d.jpg");

  REQUIRE(carved != nullptr);
  CHECK(carved->liveness == sqlite::Liveness::CarvedFreeblock);
  REQUIRE(carved->cached_path.has_value());
  CHECK(*carved->cached_path == "3/d00dfeed.jpg");

  sqlite::Database empty = open_fixture_db("f24_textures_empty.db");
  CHECK(extract_textures(empty, maps(), true).empty());
}

TEST_CASE("extract_usage: verbatim rows against the reference dump") {
  sqlite::Database db = open_fixture_db("f12_viewmodes.db");
  std::vector<UsageRecord> got = extract_usage(db, maps(), false);
  nlohmann::json dump = read_json(fixture_dir() / "expected" / "f12_viewmodes.json");
  const auto& expected = dump.at("tables").at("view");
  REQUIRE(got.size() == expected.at("rows").size());
  for (size_t r = 0; r < got.size(); ++r) {
    CHECK(got[r].table_name == "view");
    REQUIRE(got[r].raw_columns.size() == expected.at("columns").size());
    for (size_t c = 0; c < got[r].raw_columns.size(); ++c) {
      CHECK(got[r].raw_columns[c].first == expected.at("columns")[c].get<std::string>());
      CHECK(testsupport::cell_matches(got[r].raw_columns[c].second,
                                      expected.at("rows")[r].at("values")[c], false, 0));
    }
  }
}

TEST_CASE("extract_usage: unexpected extra column is preserved") {
  sqlite::Database db = open_fixture_db("f25_viewmodes_extra.db");
  std::vector<UsageRecord> got = extract_usage(db, maps(), false);
  REQUIRE(!got.empty());
  bool saw_extra = false;
  for (const auto& [name, value] : got[0].raw_columns)
    if (name == "customFlag") saw_extra = true;
  CHECK(saw_extra);
}
