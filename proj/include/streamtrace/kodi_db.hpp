#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "streamtrace/profiles.hpp"
#include "streamtrace/sqlite_core.hpp"
#include "streamtrace/util.hpp"

namespace streamtrace {

struct AddonRecord {
  std::string addon_id;
  std::optional<bool> enabled;
  std::optional<LocalClockTime> install_date;
  std::optional<LocalClockTime> last_updated;
  std::optional<LocalClockTime> last_used;
  std::optional<std::string> origin;
  bool origin_installer_heuristic = false;  // origin is UUID-shaped (heuristic)
  sqlite::Liveness liveness = sqlite::Liveness::Live;
  std::map<std::string, std::string> extras;  // unmapped columns, verbatim
};

struct RepoRecord {
  std::string repo_id;
  std::optional<std::string> checksum;
  std::optional<LocalClockTime> last_checked;
  std::optional<std::string> version;
  sqlite::Liveness liveness = sqlite::Liveness::Live;
};

enum class SourceKind { LocalFixed, RemovableOrExternal, NetworkURL, Unknown };

const char* source_kind_name(SourceKind k) noexcept;

struct PlaybackRecord {
  std::string file_name;
  std::string path;
  std::optional<int64_t> play_count;
  std::optional<LocalClockTime> last_played;
  SourceKind source_kind = SourceKind::Unknown;
  sqlite::Liveness liveness = sqlite::Liveness::Live;
};

struct TextureRecord {
  std::string url;
  std::optional<std::string> cached_path;
  sqlite::Liveness liveness = sqlite::Liveness::Live;
};

struct UsageRecord {
  std::string table_name;
  std::vector<std::pair<std::string, sqlite::CellValue>> raw_columns;
  sqlite::Liveness liveness = sqlite::Liveness::Live;
};

struct AddonExtraction {
  std::vector<AddonRecord> addons;
  std::vector<RepoRecord> repos;
};

// Column names parsed out of a CREATE TABLE statement, with the
// INTEGER PRIMARY KEY rowid-alias column flagged (its values are stored as
// NULL; the rowid carries the value).
struct TableModel {
  std::string name;
  uint32_t root_page = 0;
  std::vector<std::string> columns;
  int rowid_alias_column = -1;
};

std::vector<std::string> parse_create_table_columns(const std::string& sql,
                                                    int* rowid_alias_out = nullptr);
std::vector<TableModel> table_models(sqlite::Database& db);

// Deterministic path-shape rule: known network schemes -> NetworkURL,
// removable mount points and non-system drive letters -> RemovableOrExternal.
SourceKind classify_path(std::string_view path);

AddonExtraction extract_addons(sqlite::Database& db, const ColumnMaps& maps,
                               bool include_carved = true);
std::vector<PlaybackRecord> extract_playback(sqlite::Database& db, const ColumnMaps& maps,
                                             bool include_carved = true);
std::vector<TextureRecord> extract_textures(sqlite::Database& db, const ColumnMaps& maps,
                                            bool include_carved = true);
std::vector<UsageRecord> extract_usage(sqlite::Database& db, const ColumnMaps& maps,
                                       bool include_carved = true);

std::string cell_to_string(const sqlite::CellValue& v);

}  // namespace streamtrace
