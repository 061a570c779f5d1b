#include "streamtrace/kodi_db.hpp"

#include <algorithm>
#include <cctype>

#include <json.hpp>

#include "streamtrace/errors.hpp"

namespace streamtrace {

using sqlite::CellValue;
using sqlite::Liveness;
using sqlite::SqliteRecord;

const char* source_kind_name(SourceKind k) noexcept {
  switch (k) {
    case SourceKind::LocalFixed: return "LocalFixed";
    case SourceKind::RemovableOrExternal: return "RemovableOrExternal";
    case SourceKind::NetworkURL: return "NetworkURL";
    case SourceKind::Unknown: return "Unknown";
  }
  return "Unknown";
}

namespace {

std::string strip_identifier_quotes(std::string s) {
  if (s.size() >= 2) {
    char a = s.front(), b = s.back();
    if ((a == '"' && b == '"') || (a == '\'' && b == '\'') || (a == '`' && b == '`') ||
        (a == '[' && b == ']'))
      return s.substr(1, s.size() - 2);
  }
  return s;
}

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool is_table_constraint(const std::string& first_token) {
  static const char* kKeywords[] = {"primary", "unique", "check", "foreign", "constraint"};
  std::string lower = to_lower(first_token);
  for (const char* k : kKeywords)
    if (lower == k) return true;
  return false;
}

}  // namespace

std::vector<std::string> parse_create_table_columns(const std::string& sql,
                                                    int* rowid_alias_out) {
  if (rowid_alias_out) *rowid_alias_out = -1;
  std::vector<std::string> out;
  size_t open = sql.find('(');
  if (open == std::string::npos) return out;

  // split the parenthesized column list on top-level commas
  int depth = 0;
  char quote = 0;
  size_t start = open + 1;
  std::vector<std::string> segments;
  size_t i = open;
  for (; i < sql.size(); ++i) {
    char c = sql[i];
    if (quote) {
      if (c == quote) quote = 0;
      continue;
    }
    if (c == '\'' || c == '"' || c == '`') {
      quote = c;
    } else if (c == '(') {
      if (++depth == 1) start = i + 1;
    } else if (c == ')') {
      if (--depth == 0) {
        segments.push_back(trim(sql.substr(start, i - start)));
        break;
      }
    } else if (c == ',' && depth == 1) {
      segments.push_back(trim(sql.substr(start, i - start)));
      start = i + 1;
    }
  }

  bool without_rowid = to_lower(sql.substr(std::min(i, sql.size()))).find("without rowid") !=
                       std::string::npos;

  for (const std::string& seg : segments) {
    if (seg.empty()) continue;
    // first token: the column name (or a table-constraint keyword)
    size_t tok_end = 0;
    if (seg[0] == '"' || seg[0] == '\'' || seg[0] == '`' || seg[0] == '[') {
      char close = seg[0] == '[' ? ']' : seg[0];
      size_t pos = seg.find(close, 1);
      tok_end = pos == std::string::npos ? seg.size() : pos + 1;
    } else {
      while (tok_end < seg.size() &&
             (std::isalnum(static_cast<unsigned char>(seg[tok_end])) || seg[tok_end] == '_'))
        ++tok_end;
    }
    std::string token = seg.substr(0, tok_end);
    if (token.empty() || is_table_constraint(token)) continue;
    std::string rest_lower = to_lower(seg.substr(tok_end));
    out.push_back(strip_identifier_quotes(token));
    if (rowid_alias_out && !without_rowid) {
      size_t ip = rest_lower.find("integer");
      if (ip != std::string::npos &&
          rest_lower.find("primary key", ip) != std::string::npos)
        *rowid_alias_out = static_cast<int>(out.size()) - 1;
    }
  }
  return out;
}

std::vector<TableModel> table_models(sqlite::Database& db) {
  std::vector<TableModel> out;
  for (const sqlite::SchemaObject& obj : db.read_schema()) {
    if (obj.object_type != "table" || obj.root_page == 0) continue;
    TableModel m;
    m.name = obj.name;
    m.root_page = obj.root_page;
    m.columns = parse_create_table_columns(obj.sql_text, &m.rowid_alias_column);
    out.push_back(std::move(m));
  }
  return out;
}

SourceKind classify_path(std::string_view path) {
  if (path.empty()) return SourceKind::Unknown;

  // scheme://
  size_t colon = path.find("://");
  if (colon != std::string::npos && colon > 0) {
    std::string scheme = to_lower(std::string(path.substr(0, colon)));
    static const char* kNetwork[] = {"http", "https", "ftp",  "ftps", "rtmp", "rtmps",
                                     "rtsp", "rtp",   "udp",  "tcp",  "mms",  "smb",
                                     "nfs",  "upnp",  "dav",  "davs", "sftp", "ssh",
                                     "plugin", "pvr"};
    for (const char* s : kNetwork)
      if (scheme == s) return SourceKind::NetworkURL;
    return SourceKind::Unknown;  // stack://, zip://, special:// and friends
  }

  // drive letters: C: is the system disk, everything else is treated as
  // removable/external for triage purposes
  if (path.size() >= 3 && std::isalpha(static_cast<unsigned char>(path[0])) && path[1] == ':' &&
      (path[2] == '\\' || path[2] == '/')) {
    char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(path[0])));
    return letter == 'C' ? SourceKind::LocalFixed : SourceKind::RemovableOrExternal;
  }

  if (path[0] == '/') {
    static const char* kRemovableRoots[] = {"/media/", "/mnt/", "/run/media/", "/Volumes/",
                                            "/storage/", "/sdcard/"};
    std::string p(path);
    if (!p.ends_with("/")) p += "/";
    for (const char* root : kRemovableRoots)
      if (p.rfind(root, 0) == 0) return SourceKind::RemovableOrExternal;
    return SourceKind::LocalFixed;
  }
  if (path.size() >= 2 && path[0] == '\\' && path[1] == '\\')
    return SourceKind::NetworkURL;  // UNC share
  return SourceKind::Unknown;
}

namespace {

struct ResolvedFields {
  std::map<std::string, int> index;  // field name -> column index
  int find(const std::string& field) const {
    auto it = index.find(field);
    return it == index.end() ? -1 : it->second;
  }
};

ResolvedFields resolve_fields(const std::vector<std::string>& columns,
                              const std::map<std::string, std::vector<std::string>>& wanted) {
  ResolvedFields out;
  for (const auto& [field, candidates] : wanted) {
    for (const std::string& cand : candidates) {
      for (size_t i = 0; i < columns.size(); ++i) {
        if (iequals(columns[i], cand)) {
          out.index[field] = static_cast<int>(i);
          break;
        }
      }
      if (out.index.count(field)) break;
    }
  }
  return out;
}

const TableModel* find_table(const std::vector<TableModel>& models,
                             const std::vector<std::string>& candidates) {
  for (const std::string& cand : candidates)
    for (const TableModel& m : models)
      if (iequals(m.name, cand)) return &m;
  return nullptr;
}

// Live rows align head-first (rows older than an ALTER TABLE ADD COLUMN
// simply lack trailing values). Carved rows align tail-first: header
// clobbering destroys leading serial types, so recovered values are the
// trailing columns.
int alignment_offset(const SqliteRecord& rec, size_t column_count) {
  if (rec.liveness == Liveness::Live) return 0;
  if (rec.values.size() < column_count)
    return static_cast<int>(column_count - rec.values.size());
  return 0;
}

const CellValue* cell_at(const SqliteRecord& rec, int column_index, int offset) {
  int idx = column_index - offset;
  if (idx < 0 || idx >= static_cast<int>(rec.values.size())) return nullptr;
  return &rec.values[static_cast<size_t>(idx)];
}

std::optional<std::string> string_at(const SqliteRecord& rec, int column_index, int offset,
                                     const TableModel& table) {
  if (column_index < 0) return std::nullopt;
  if (rec.liveness == Liveness::Live && column_index == table.rowid_alias_column &&
      rec.rowid)
    return std::to_string(*rec.rowid);
  const CellValue* v = cell_at(rec, column_index, offset);
  if (!v) return std::nullopt;
  switch (v->kind) {
    case CellValue::Kind::Text: return v->text_value;
    case CellValue::Kind::Integer: return std::to_string(v->integer_value);
    case CellValue::Kind::Float: return cell_to_string(*v);
    default: return std::nullopt;
  }
}

std::optional<int64_t> int_at(const SqliteRecord& rec, int column_index, int offset,
                              const TableModel& table) {
  if (column_index < 0) return std::nullopt;
  if (column_index == table.rowid_alias_column && rec.rowid &&
      rec.liveness == Liveness::Live)
    return rec.rowid;
  const CellValue* v = cell_at(rec, column_index, offset);
  if (!v || v->kind != CellValue::Kind::Integer) return std::nullopt;
  return v->integer_value;
}

// records from one table: live rows plus carved rows attributed to it
struct TableRecords {
  std::vector<SqliteRecord> rows;
};

// A carved record belongs to a table when its page is owned by that table
// (freeblock carving) or, for freelist pages, when its shape fits the
// table's column count.
bool carved_belongs_to(const SqliteRecord& rec, const TableModel& table,
                       const std::map<uint32_t, std::string>& page_owner) {
  auto it = page_owner.find(rec.page_number);
  if (it != page_owner.end()) return iequals(it->second, table.name);
  size_t n = table.columns.size();
  return rec.values.size() <= n && rec.values.size() + 2 >= n;
}

TableRecords gather_rows(sqlite::Database& db, const TableModel& table, bool include_carved,
                         const std::vector<SqliteRecord>* carved,
                         const std::map<uint32_t, std::string>& page_owner) {
  TableRecords out;
  out.rows = db.walk_table(table.root_page);
  if (include_carved && carved) {
    for (const SqliteRecord& rec : *carved)
      if (carved_belongs_to(rec, table, page_owner)) out.rows.push_back(rec);
  }
  return out;
}

std::map<uint32_t, std::string> owner_map(sqlite::Database& db) {
  std::map<uint32_t, std::string> out;
  for (const sqlite::PageClass& pc : db.classify_pages())
    if (pc.kind == sqlite::PageClassKind::Table && !pc.owner.empty())
      out[pc.page_number] = pc.owner;
  return out;
}

std::optional<LocalClockTime> time_at(const SqliteRecord& rec, int column_index, int offset,
                                      const TableModel& table) {
  auto text = string_at(rec, column_index, offset, table);
  if (!text || text->empty()) return std::nullopt;
  return parse_local_timestamp(*text);
}

}  // namespace

std::string cell_to_string(const CellValue& v) {
  switch (v.kind) {
    case CellValue::Kind::Null: return "";
    case CellValue::Kind::Integer: return std::to_string(v.integer_value);
    case CellValue::Kind::Float: {
      nlohmann::json j = v.float_value;
      return j.dump();
    }
    case CellValue::Kind::Text: return v.text_value;
    case CellValue::Kind::Blob: return "0x" + hex_lower(v.blob_value);
  }
  return "";
}

AddonExtraction extract_addons(sqlite::Database& db, const ColumnMaps& maps,
                               bool include_carved) {
  AddonExtraction out;
  auto role_it = maps.roles.find(DbRole::Addons);
  const RoleColumnMap& map =
      role_it != maps.roles.end() ? role_it->second : RoleColumnMap{};

  std::vector<TableModel> models = table_models(db);
  const TableModel* addon_table = find_table(models, map.addon_tables);
  const TableModel* repo_table = find_table(models, map.repo_tables);
  if (!addon_table && !repo_table)
    raise(Errc::NoRecognizedTables, db.path_label() + ": no addon or repo table");

  std::vector<SqliteRecord> carved;
  std::map<uint32_t, std::string> owners;
  if (include_carved) {
    carved = db.carve_deleted();
    owners = owner_map(db);
  }

  if (addon_table) {
    ResolvedFields fields = resolve_fields(addon_table->columns, map.fields);
    std::vector<char> mapped(addon_table->columns.size(), 0);
    for (const auto& [field, idx] : fields.index) mapped[idx] = 1;

    for (const SqliteRecord& rec :
         gather_rows(db, *addon_table, include_carved, &carved, owners).rows) {
      int off = alignment_offset(rec, addon_table->columns.size());
      AddonRecord a;
      a.liveness = rec.liveness;
      a.addon_id =
          string_at(rec, fields.find("addon_id"), off, *addon_table).value_or("(unknown)");
      if (a.addon_id.empty()) a.addon_id = "(unknown)";
      if (auto e = int_at(rec, fields.find("enabled"), off, *addon_table))
        a.enabled = (*e != 0);
      a.install_date = time_at(rec, fields.find("install_date"), off, *addon_table);
      a.last_updated = time_at(rec, fields.find("last_updated"), off, *addon_table);
      a.last_used = time_at(rec, fields.find("last_used"), off, *addon_table);
      auto origin = string_at(rec, fields.find("origin"), off, *addon_table);
      if (origin && !origin->empty()) {
        a.origin = origin;
        a.origin_installer_heuristic = is_uuid_shaped(*origin);
      }
      for (size_t c = 0; c < addon_table->columns.size(); ++c) {
        if (mapped[c]) continue;
        const CellValue* v = cell_at(rec, static_cast<int>(c), off);
        if (v && v->kind != CellValue::Kind::Null)
          a.extras[addon_table->columns[c]] = cell_to_string(*v);
      }
      out.addons.push_back(std::move(a));
    }
  }

  if (repo_table) {
    ResolvedFields fields = resolve_fields(repo_table->columns, map.repo_fields);
    for (const SqliteRecord& rec :
         gather_rows(db, *repo_table, include_carved, &carved, owners).rows) {
      int off = alignment_offset(rec, repo_table->columns.size());
      RepoRecord r;
      r.liveness = rec.liveness;
      r.repo_id = string_at(rec, fields.find("repo_id"), off, *repo_table).value_or("");
      if (r.repo_id.empty()) continue;  // carved residue with no identity
      r.checksum = string_at(rec, fields.find("checksum"), off, *repo_table);
      r.last_checked = time_at(rec, fields.find("last_checked"), off, *repo_table);
      r.version = string_at(rec, fields.find("version"), off, *repo_table);
      out.repos.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<PlaybackRecord> extract_playback(sqlite::Database& db, const ColumnMaps& maps,
                                             bool include_carved) {
  auto role_it = maps.roles.find(DbRole::MyVideos);
  const RoleColumnMap& map =
      role_it != maps.roles.end() ? role_it->second : RoleColumnMap{};

  std::vector<TableModel> models = table_models(db);
  const TableModel* files_table = find_table(models, map.file_tables);
  if (!files_table)
    raise(Errc::NoRecognizedTables, db.path_label() + ": no files table");
  const TableModel* path_table = find_table(models, map.path_tables);

  std::vector<SqliteRecord> carved;
  std::map<uint32_t, std::string> owners;
  if (include_carved) {
    carved = db.carve_deleted();
    owners = owner_map(db);
  }

  // path-id -> path string; live rows win over carved ones
  std::map<int64_t, std::string> paths;
  if (path_table) {
    ResolvedFields pf = resolve_fields(path_table->columns, map.path_fields);
    auto rows = gather_rows(db, *path_table, include_carved, &carved, owners).rows;
    std::stable_sort(rows.begin(), rows.end(),
                     [](const SqliteRecord& a, const SqliteRecord& b) {
                       return (a.liveness == Liveness::Live) > (b.liveness == Liveness::Live);
                     });
    for (const SqliteRecord& rec : rows) {
      int off = alignment_offset(rec, path_table->columns.size());
      auto key = int_at(rec, pf.find("path_key"), off, *path_table);
      if (!key && rec.liveness != Liveness::Live && rec.rowid) key = rec.rowid;
      auto value = string_at(rec, pf.find("path_value"), off, *path_table);
      if (key && value && !paths.count(*key)) paths[*key] = *value;
    }
  }

  std::vector<PlaybackRecord> out;
  ResolvedFields ff = resolve_fields(files_table->columns, map.fields);
  for (const SqliteRecord& rec :
       gather_rows(db, *files_table, include_carved, &carved, owners).rows) {
    int off = alignment_offset(rec, files_table->columns.size());
    PlaybackRecord p;
    p.liveness = rec.liveness;
    p.file_name = string_at(rec, ff.find("file_name"), off, *files_table).value_or("");
    auto path_key = int_at(rec, ff.find("path_key"), off, *files_table);
    if (path_key) {
      auto it = paths.find(*path_key);
      if (it != paths.end()) p.path = it->second;
    }
    p.play_count = int_at(rec, ff.find("play_count"), off, *files_table);
    p.last_played = time_at(rec, ff.find("last_played"), off, *files_table);
    p.source_kind = classify_path(p.path.empty() ? p.file_name : p.path);
    if (p.file_name.empty() && p.path.empty()) continue;  // nothing usable
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<TextureRecord> extract_textures(sqlite::Database& db, const ColumnMaps& maps,
                                            bool include_carved) {
  auto role_it = maps.roles.find(DbRole::Textures);
  const RoleColumnMap& map =
      role_it != maps.roles.end() ? role_it->second : RoleColumnMap{};

  std::vector<TableModel> models = table_models(db);
  const TableModel* table = find_table(models, map.tables);
  if (!table) raise(Errc::NoRecognizedTables, db.path_label() + ": no texture table");

  std::vector<SqliteRecord> carved;
  std::map<uint32_t, std::string> owners;
  if (include_carved) {
    carved = db.carve_deleted();
    owners = owner_map(db);
  }

  ResolvedFields fields = resolve_fields(table->columns, map.fields);
  std::vector<TextureRecord> out;
  for (const SqliteRecord& rec :
       gather_rows(db, *table, include_carved, &carved, owners).rows) {
    int off = alignment_offset(rec, table->columns.size());
    TextureRecord t;
    t.liveness = rec.liveness;
    t.url = string_at(rec, fields.find("url"), off, *table).value_or("");
    t.cached_path = string_at(rec, fields.find("cached_path"), off, *table);
    if (t.url.empty()) continue;
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<UsageRecord> extract_usage(sqlite::Database& db, const ColumnMaps& maps,
                                       bool include_carved) {
  auto role_it = maps.roles.find(DbRole::ViewModes);
  const RoleColumnMap& map =
      role_it != maps.roles.end() ? role_it->second : RoleColumnMap{};

  std::vector<TableModel> models = table_models(db);
  std::vector<const TableModel*> chosen;
  for (const std::string& cand : map.tables)
    for (const TableModel& m : models)
      if (iequals(m.name, cand)) chosen.push_back(&m);
  if (chosen.empty())  // verbatim philosophy: fall back to every user table
    for (const TableModel& m : models) chosen.push_back(&m);
  if (chosen.empty())
    raise(Errc::NoRecognizedTables, db.path_label() + ": no tables at all");

  std::vector<SqliteRecord> carved;
  std::map<uint32_t, std::string> owners;
  if (include_carved) {
    carved = db.carve_deleted();
    owners = owner_map(db);
  }

  std::vector<UsageRecord> out;
  for (const TableModel* table : chosen) {
    for (const SqliteRecord& rec :
         gather_rows(db, *table, include_carved, &carved, owners).rows) {
      int off = alignment_offset(rec, table->columns.size());
      UsageRecord u;
      u.table_name = table->name;
      u.liveness = rec.liveness;
      size_t n = std::max(table->columns.size(), rec.values.size());
      for (size_t c = 0; c < n; ++c) {
        std::string name = c < table->columns.size() ? table->columns[c]
                                                     : "col" + std::to_string(c);
        const CellValue* v = cell_at(rec, static_cast<int>(c), off);
        CellValue value = v ? *v : CellValue::null();
        if (rec.liveness == Liveness::Live && static_cast<int>(c) == table->rowid_alias_column &&
            rec.rowid && value.kind == CellValue::Kind::Null)
          value = CellValue::integer(*rec.rowid);
        u.raw_columns.emplace_back(name, std::move(value));
      }
      out.push_back(std::move(u));
    }
  }
  return out;
}

}  // namespace streamtrace
