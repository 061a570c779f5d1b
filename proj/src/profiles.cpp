#include "streamtrace/profiles.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "embedded_profiles.hpp"
#include "streamtrace/errors.hpp"

namespace streamtrace {

using nlohmann::ordered_json;

const char* platform_name(Platform p) noexcept {
  switch (p) {
    case Platform::Windows: return "Windows";
    case Platform::LinuxDesktop: return "LinuxDesktop";
    case Platform::Android: return "Android";
    case Platform::OSMC: return "OSMC";
    case Platform::Generic: return "Generic";
  }
  return "Generic";
}

std::optional<Platform> platform_from_name(const std::string& name) {
  if (name == "Windows") return Platform::Windows;
  if (name == "LinuxDesktop") return Platform::LinuxDesktop;
  if (name == "Android") return Platform::Android;
  if (name == "OSMC") return Platform::OSMC;
  if (name == "Generic") return Platform::Generic;
  return std::nullopt;
}

const char* db_role_name(DbRole r) noexcept {
  switch (r) {
    case DbRole::Addons: return "Addons";
    case DbRole::ADSP: return "ADSP";
    case DbRole::EPG: return "EPG";
    case DbRole::MyMusic: return "MyMusic";
    case DbRole::MyVideos: return "MyVideos";
    case DbRole::Textures: return "Textures";
    case DbRole::TV: return "TV";
    case DbRole::ViewModes: return "ViewModes";
    case DbRole::Unknown: return "Unknown";
  }
  return "Unknown";
}

std::optional<DbRole> db_role_from_name(const std::string& name) {
  static const std::pair<const char*, DbRole> kRoles[] = {
      {"Addons", DbRole::Addons},   {"ADSP", DbRole::ADSP},
      {"EPG", DbRole::EPG},         {"MyMusic", DbRole::MyMusic},
      {"MyVideos", DbRole::MyVideos}, {"Textures", DbRole::Textures},
      {"TV", DbRole::TV},           {"ViewModes", DbRole::ViewModes},
      {"Unknown", DbRole::Unknown}};
  for (const auto& [n, r] : kRoles)
    if (name == n) return r;
  return std::nullopt;
}

LocatorProfiles parse_platform_patterns(const std::string& json_text) {
  LocatorProfiles out;
  ordered_json doc = ordered_json::parse(json_text);
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    auto platform = platform_from_name(it.key());
    if (!platform) raise(Errc::InvalidArgument, "unknown platform " + it.key());
    std::vector<std::string> patterns;
    for (const auto& p : it.value()) patterns.push_back(p.get<std::string>());
    if (patterns.empty())
      raise(Errc::InvalidArgument, "platform " + it.key() + " has no home patterns");
    out.patterns.emplace_back(*platform, std::move(patterns));
  }
  return out;
}

VersionTable parse_version_table(const std::string& json_text) {
  VersionTable out;
  ordered_json doc = ordered_json::parse(json_text);
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    auto role = db_role_from_name(it.key());
    if (!role) raise(Errc::InvalidArgument, "unknown database role " + it.key());
    for (auto sit = it.value().begin(); sit != it.value().end(); ++sit)
      out.releases[*role][std::stoi(sit.key())] = sit.value().get<std::string>();
  }
  return out;
}

namespace {

std::vector<std::string> string_list(const ordered_json& j, const char* key) {
  std::vector<std::string> out;
  if (j.contains(key))
    for (const auto& v : j[key]) out.push_back(v.get<std::string>());
  return out;
}

std::map<std::string, std::vector<std::string>> field_map(const ordered_json& j,
                                                          const char* key) {
  std::map<std::string, std::vector<std::string>> out;
  if (j.contains(key))
    for (auto it = j[key].begin(); it != j[key].end(); ++it) {
      std::vector<std::string> candidates;
      for (const auto& c : it.value()) candidates.push_back(c.get<std::string>());
      out[it.key()] = std::move(candidates);
    }
  return out;
}

}  // namespace

ColumnMaps parse_column_maps(const std::string& json_text) {
  ColumnMaps out;
  ordered_json doc = ordered_json::parse(json_text);
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    auto role = db_role_from_name(it.key());
    if (!role) raise(Errc::InvalidArgument, "unknown database role " + it.key());
    RoleColumnMap m;
    m.addon_tables = string_list(it.value(), "addon_tables");
    m.repo_tables = string_list(it.value(), "repo_tables");
    m.file_tables = string_list(it.value(), "file_tables");
    m.path_tables = string_list(it.value(), "path_tables");
    m.tables = string_list(it.value(), "tables");
    m.fields = field_map(it.value(), "fields");
    m.repo_fields = field_map(it.value(), "repo_fields");
    m.path_fields = field_map(it.value(), "path_fields");
    out.roles[*role] = std::move(m);
  }
  return out;
}

LogProfile parse_log_profile(const std::string& json_text) {
  LogProfile out;
  ordered_json doc = ordered_json::parse(json_text);
  for (const auto& entry : doc) {
    LogRule rule;
    rule.category = entry.at("category").get<std::string>();
    rule.pattern = entry.at("pattern").get<std::string>();
    for (const auto& c : entry.at("captures")) rule.captures.push_back(c.get<std::string>());
    try {
      rule.compiled = std::regex(rule.pattern, std::regex::ECMAScript | std::regex::optimize);
    } catch (const std::regex_error& e) {
      raise(Errc::InvalidArgument,
            "bad log pattern for " + rule.category + ": " + e.what());
    }
    out.rules.push_back(std::move(rule));
  }
  return out;
}

namespace {

std::optional<std::string> read_override(const std::optional<std::filesystem::path>& dir,
                                         const char* filename) {
  if (!dir) return std::nullopt;
  std::filesystem::path p = *dir / filename;
  std::ifstream in(p);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ProfileSet load_profiles(const std::optional<std::filesystem::path>& override_dir) {
  ProfileSet set;
  set.locator = parse_platform_patterns(
      read_override(override_dir, "platform_patterns.json").value_or(embedded::kPlatformPatterns));
  set.versions = parse_version_table(
      read_override(override_dir, "version_table.json").value_or(embedded::kVersionTable));
  set.columns = parse_column_maps(
      read_override(override_dir, "column_maps.json").value_or(embedded::kColumnMaps));
  set.log_profile = parse_log_profile(
      read_override(override_dir, "log_profile_default.json").value_or(embedded::kLogProfile));
  return set;
}

}  // namespace streamtrace
