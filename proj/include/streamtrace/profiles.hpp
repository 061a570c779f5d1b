#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

namespace streamtrace {

enum class Platform { Windows, LinuxDesktop, Android, OSMC, Generic };

const char* platform_name(Platform p) noexcept;
std::optional<Platform> platform_from_name(const std::string& name);

enum class DbRole { Addons, ADSP, EPG, MyMusic, MyVideos, Textures, TV, ViewModes, Unknown };

const char* db_role_name(DbRole r) noexcept;
std::optional<DbRole> db_role_from_name(const std::string& name);

// Per-platform home-folder path templates; '*' matches one path component.
// Entries keep file order, which is the match priority.
struct LocatorProfiles {
  std::vector<std::pair<Platform, std::vector<std::string>>> patterns;
};

// Bundled database-suffix -> Kodi release table. Ships as an editable data
// file; new Kodi releases change suffixes.
struct VersionTable {
  std::map<DbRole, std::map<int, std::string>> releases;
};

// Field -> candidate column names, per database role. The artifact fields
// are fixed; the column names vary across Kodi versions.
struct RoleColumnMap {
  std::vector<std::string> addon_tables;
  std::vector<std::string> repo_tables;
  std::vector<std::string> file_tables;
  std::vector<std::string> path_tables;
  std::vector<std::string> tables;
  std::map<std::string, std::vector<std::string>> fields;
  std::map<std::string, std::vector<std::string>> repo_fields;
  std::map<std::string, std::vector<std::string>> path_fields;
};

struct ColumnMaps {
  std::map<DbRole, RoleColumnMap> roles;
};

// Ordered pattern list, first match wins. Capture names map positionally
// onto regex groups 1..N.
struct LogRule {
  std::string category;
  std::string pattern;
  std::vector<std::string> captures;
  std::regex compiled;
};

struct LogProfile {
  std::vector<LogRule> rules;
};

struct ProfileSet {
  LocatorProfiles locator;
  VersionTable versions;
  ColumnMaps columns;
  LogProfile log_profile;
};

LocatorProfiles parse_platform_patterns(const std::string& json_text);
VersionTable parse_version_table(const std::string& json_text);
ColumnMaps parse_column_maps(const std::string& json_text);
LogProfile parse_log_profile(const std::string& json_text);

// Built-in defaults (embedded copies of the data files), overridable per
// file from a profiles directory.
ProfileSet load_profiles(const std::optional<std::filesystem::path>& override_dir = std::nullopt);

}  // namespace streamtrace
