#include "streamtrace/locator.hpp"

#include <algorithm>
#include <set>

#include "streamtrace/errors.hpp"
#include "streamtrace/util.hpp"

namespace streamtrace {

namespace {

const char* kDbStems[] = {"Addons", "ADSP", "EPG", "MyMusic",
                          "MyVideos", "Textures", "TV", "ViewModes"};
const DbRole kDbRoles[] = {DbRole::Addons, DbRole::ADSP, DbRole::EPG, DbRole::MyMusic,
                           DbRole::MyVideos, DbRole::Textures, DbRole::TV, DbRole::ViewModes};

}  // namespace

DatabaseRole classify_database(const std::string& filename) {
  DatabaseRole out;
  out.filename = filename;

  std::string stem = filename;
  std::string lower = to_lower(stem);
  if (lower.size() > 3 && lower.ends_with(".db")) stem = stem.substr(0, stem.size() - 3);

  size_t digits_begin = stem.size();
  while (digits_begin > 0 && std::isdigit(static_cast<unsigned char>(stem[digits_begin - 1])))
    --digits_begin;
  if (digits_begin < stem.size()) {
    const std::string digits = stem.substr(digits_begin);
    if (digits.size() <= 6) out.suffix = std::stoi(digits);
    stem = stem.substr(0, digits_begin);
  }

  for (size_t i = 0; i < std::size(kDbStems); ++i) {
    if (iequals(stem, kDbStems[i])) {
      out.role = kDbRoles[i];
      return out;
    }
  }
  out.role = DbRole::Unknown;
  return out;
}

std::optional<std::pair<std::string, VersionConfidence>> infer_version(
    const std::map<DbRole, int>& suffixes, const VersionTable& table) {
  if (suffixes.empty()) raise(Errc::NoSuffixes, "no database suffixes to infer from");

  // release "family" = first word of the release string (e.g. "Leia")
  auto family = [](const std::string& release) {
    size_t sp = release.find(' ');
    return sp == std::string::npos ? release : release.substr(0, sp);
  };

  std::vector<std::string> candidates;
  for (const auto& [role, suffix] : suffixes) {
    auto rit = table.releases.find(role);
    if (rit == table.releases.end()) continue;
    auto sit = rit->second.find(suffix);
    if (sit == rit->second.end()) continue;
    candidates.push_back(sit->second);
  }
  if (candidates.empty()) return std::nullopt;

  std::set<std::string> families;
  for (const auto& c : candidates) families.insert(family(c));
  if (families.size() == 1) {
    // prefer the most specific (longest) release string among agreeing votes
    std::string best = candidates.front();
    for (const auto& c : candidates)
      if (c.size() > best.size()) best = c;
    return std::make_pair(best, VersionConfidence::Exact);
  }
  std::set<std::string> unique(candidates.begin(), candidates.end());
  std::string joined;
  for (const auto& c : unique) {
    if (!joined.empty()) joined += " | ";
    joined += c;
  }
  return std::make_pair(joined, VersionConfidence::Ambiguous);
}

namespace {

struct TreeIndex {
  // every directory, as root-relative '/'-joined paths, sorted
  std::vector<std::string> directories;
};

void walk_dirs(const EvidenceSource& src, const std::string& rel, TreeIndex& out, int depth) {
  if (depth > 64) return;
  for (const DirEntry& e : src.list_dir(rel)) {
    if (e.kind != DirEntry::Kind::Directory) continue;
    std::string child = rel.empty() ? e.name : rel + "/" + e.name;
    out.directories.push_back(child);
    walk_dirs(src, child, out, depth + 1);
  }
}

// component-wise tail match; '*' matches exactly one component
bool tail_matches(const std::vector<std::string>& dir_parts,
                  const std::vector<std::string>& pattern_parts) {
  if (pattern_parts.size() > dir_parts.size()) return false;
  size_t off = dir_parts.size() - pattern_parts.size();
  for (size_t i = 0; i < pattern_parts.size(); ++i) {
    if (pattern_parts[i] == "*") continue;
    if (!iequals(dir_parts[off + i], pattern_parts[i])) return false;
  }
  return true;
}

std::optional<std::string> find_child_dir(const EvidenceSource& src, const std::string& parent,
                                          const std::string& name_ci) {
  if (!src.is_directory(parent)) return std::nullopt;
  for (const DirEntry& e : src.list_dir(parent)) {
    if (e.kind == DirEntry::Kind::Directory && iequals(e.name, name_ci))
      return parent.empty() ? e.name : parent + "/" + e.name;
  }
  return std::nullopt;
}

std::vector<DatabaseFile> collect_databases(const EvidenceSource& src,
                                            const std::string& db_dir) {
  std::vector<DatabaseFile> out;
  if (!src.is_directory(db_dir)) return out;
  std::vector<DirEntry> entries = src.list_dir(db_dir);
  std::set<std::string> names;
  for (const DirEntry& e : entries)
    if (e.kind == DirEntry::Kind::File) names.insert(e.name);

  for (const DirEntry& e : entries) {
    if (e.kind != DirEntry::Kind::File) continue;
    if (!to_lower(e.name).ends_with(".db")) continue;
    DatabaseFile f;
    f.relative_path = db_dir + "/" + e.name;
    f.role = classify_database(e.name);
    for (const char* suffix : {"-wal", "-shm", "-journal"})
      if (names.count(e.name + suffix)) f.sidecars.push_back(f.relative_path + suffix);
    out.push_back(std::move(f));
  }
  std::sort(out.begin(), out.end(), [](const DatabaseFile& a, const DatabaseFile& b) {
    return a.relative_path < b.relative_path;
  });
  return out;
}

// the paper names kodi.txt at the home root; field installs keep kodi.log
// in temp — probe both locations and all names
std::vector<LogFileRef> collect_logs(const EvidenceSource& src, const std::string& home) {
  std::vector<LogFileRef> out;
  std::vector<std::string> locations{home};
  if (auto temp = find_child_dir(src, home, "temp")) locations.push_back(*temp);

  struct Name {
    const char* name;
    int session_index;
  };
  const Name kNames[] = {{"kodi.log", 0}, {"kodi.txt", 0}, {"kodi.old.log", 1},
                         {"kodi.old.txt", 1}, {"xbmc.log", 0}, {"xbmc.old.log", 1}};
  bool have_current = false, have_previous = false;
  for (const std::string& loc : locations) {
    if (!src.is_directory(loc)) continue;
    for (const DirEntry& e : src.list_dir(loc)) {
      if (e.kind != DirEntry::Kind::File) continue;
      for (const Name& n : kNames) {
        if (!iequals(e.name, n.name)) continue;
        if (n.session_index == 0 && have_current) continue;
        if (n.session_index == 1 && have_previous) continue;
        out.push_back({loc + "/" + e.name, n.session_index});
        (n.session_index == 0 ? have_current : have_previous) = true;
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const LogFileRef& a, const LogFileRef& b) {
    return a.session_index < b.session_index;
  });
  return out;
}

std::optional<KodiInstallation> build_installation(const EvidenceSource& src,
                                                   const std::string& home, Platform platform,
                                                   const VersionTable& versions) {
  KodiInstallation inst;
  inst.home_path = home;
  inst.platform = platform;
  inst.userdata_dir = find_child_dir(src, home, "userdata");
  inst.addons_dir = find_child_dir(src, home, "addons");

  std::optional<std::string> db_dir;
  if (inst.userdata_dir) db_dir = find_child_dir(src, *inst.userdata_dir, "Database");
  if (!db_dir) db_dir = find_child_dir(src, home, "Database");
  if (db_dir) inst.databases = collect_databases(src, *db_dir);
  inst.logs = collect_logs(src, home);

  bool has_recognized_db = std::any_of(
      inst.databases.begin(), inst.databases.end(),
      [](const DatabaseFile& f) { return f.role.role != DbRole::Unknown; });
  if (!inst.userdata_dir && !inst.addons_dir && !has_recognized_db) return std::nullopt;

  std::map<DbRole, int> suffixes;
  for (const DatabaseFile& f : inst.databases)
    if (f.role.role != DbRole::Unknown && f.role.suffix && !suffixes.count(f.role.role))
      suffixes[f.role.role] = *f.role.suffix;
  if (!suffixes.empty()) {
    auto inferred = infer_version(suffixes, versions);
    VersionHint hint;
    // the hint's suffix: prefer the Addons suffix, else the first role present
    auto ait = suffixes.find(DbRole::Addons);
    hint.database_suffix = ait != suffixes.end() ? ait->second : suffixes.begin()->second;
    if (inferred) hint.release_name = inferred->first;
    inst.version_hint = hint;
  }
  return inst;
}

}  // namespace

std::vector<KodiInstallation> scan(const EvidenceSource& source, const ProfileSet& profiles) {
  TreeIndex index;
  walk_dirs(source, "", index, 0);
  std::sort(index.directories.begin(), index.directories.end());

  // home -> platform, first pattern in priority order wins
  std::map<std::string, Platform> homes;
  for (const std::string& dir : index.directories) {
    std::vector<std::string> parts = split(dir, '/');
    for (const auto& [platform, patterns] : profiles.locator.patterns) {
      bool matched = false;
      for (const std::string& pattern : patterns) {
        if (tail_matches(parts, split(pattern, '/'))) {
          matched = true;
          break;
        }
      }
      if (matched) {
        homes.emplace(dir, platform);  // keeps the highest-priority claim
        break;
      }
    }
  }

  // generic fallback: any Database directory holding a recognized database
  for (const std::string& dir : index.directories) {
    std::vector<std::string> parts = split(dir, '/');
    if (parts.empty() || !iequals(parts.back(), "Database")) continue;
    bool recognized = false;
    for (const DatabaseFile& f : collect_databases(source, dir))
      if (f.role.role != DbRole::Unknown) recognized = true;
    if (!recognized) continue;
    std::string parent = join({parts.begin(), parts.end() - 1}, '/');
    std::string home = parent;
    std::vector<std::string> parent_parts{parts.begin(), parts.end() - 1};
    if (!parent_parts.empty() && iequals(parent_parts.back(), "userdata"))
      home = join({parent_parts.begin(), parent_parts.end() - 1}, '/');
    bool inside_known = false;
    for (const auto& [known_home, platform] : homes) {
      if (home == known_home || home.rfind(known_home + "/", 0) == 0) inside_known = true;
    }
    if (!inside_known) homes.emplace(home, Platform::Generic);
  }

  std::vector<KodiInstallation> out;
  for (const auto& [home, platform] : homes) {
    auto inst = build_installation(source, home, platform, profiles.versions);
    if (inst) out.push_back(std::move(*inst));
  }
  std::sort(out.begin(), out.end(), [](const KodiInstallation& a, const KodiInstallation& b) {
    return a.home_path < b.home_path;
  });
  return out;
}

}  // namespace streamtrace
