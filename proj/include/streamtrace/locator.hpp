#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "streamtrace/evidence_source.hpp"
#include "streamtrace/profiles.hpp"

namespace streamtrace {

struct DatabaseRole {
  DbRole role = DbRole::Unknown;
  std::string filename;
  std::optional<int> suffix;
};

struct DatabaseFile {
  std::string relative_path;
  DatabaseRole role;
  std::vector<std::string> sidecars;  // -wal / -shm / -journal companions
};

struct LogFileRef {
  std::string relative_path;
  int session_index = 0;  // 0 = current, 1 = previous
};

struct VersionHint {
  int database_suffix = 0;
  std::optional<std::string> release_name;
};

struct KodiInstallation {
  std::string home_path;
  Platform platform = Platform::Generic;
  std::optional<VersionHint> version_hint;
  std::vector<DatabaseFile> databases;
  std::vector<LogFileRef> logs;
  std::optional<std::string> addons_dir;
  std::optional<std::string> userdata_dir;
};

enum class VersionConfidence { Exact, Ambiguous };

// Stem matched case-insensitively against the known role names; the suffix
// is the trailing digit run, absent when the name carries no digits.
DatabaseRole classify_database(const std::string& filename);

// Bundled-table lookup. Throws NoSuffixes on an empty map; returns nullopt
// when no suffix is known to the table.
std::optional<std::pair<std::string, VersionConfidence>> infer_version(
    const std::map<DbRole, int>& suffixes, const VersionTable& table);

// Probes the per-platform layouts plus a generic fallback (any Database
// directory holding a recognized database). Deterministic order
// (lexicographic by home_path).
std::vector<KodiInstallation> scan(const EvidenceSource& source, const ProfileSet& profiles);

}  // namespace streamtrace
