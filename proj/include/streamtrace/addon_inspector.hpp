#pragma once

#include <optional>
#include <string>
#include <vector>

#include "streamtrace/evidence_source.hpp"
#include "streamtrace/kodi_db.hpp"
#include "streamtrace/util.hpp"

namespace streamtrace {

enum class AddonKind { Repository, VideoPlugin, Scraper, LanguageResource, Script, Other };

const char* addon_kind_name(AddonKind k) noexcept;

struct AddonDependency {
  std::string addon_id;
  std::string min_version;
  bool optional = false;
};

struct AddonManifest {
  std::string addon_id;
  std::string version;
  std::optional<std::string> provider;
  std::vector<AddonDependency> dependencies;
  std::optional<std::string> update_url;
  AddonKind kind = AddonKind::Other;
  std::string dir_path;
  bool has_code = false;
  bool has_license = false;
  std::vector<std::string> anomalies;   // IdMismatch, MalformedMetadata, ...
  std::vector<std::string> code_urls;   // URL literals scanned out of code files
  int code_file_count = 0;              // python files, hashed via the manifest
  int code_line_count = 0;
  std::string metadata_path;
};

struct AddonInspection {
  std::vector<AddonManifest> manifests;       // ordered by addon_id
  std::vector<std::string> unreadable_entries;  // subdirs with no usable metadata
};

struct PackageArtifact {
  std::string zip_name;
  std::string relative_path;
  std::string implied_addon_id;
  std::optional<std::string> implied_version;
  bool nonstandard_name = false;
  std::optional<LocalClockTime> file_mtime;  // filesystem clock, untrusted
  std::optional<LocalClockTime> zip_earliest;
  std::optional<LocalClockTime> zip_latest;
  std::string sha256;
};

enum class DiscrepancyKind { DiskOnly, DbOnlyLive, DbOnlyCarved, VersionMismatch };

const char* discrepancy_kind_name(DiscrepancyKind k) noexcept;

struct Discrepancy {
  DiscrepancyKind kind = DiscrepancyKind::DiskOnly;
  std::string addon_id;
  std::string detail;
};

AddonInspection inspect_addons(const EvidenceSource& source, const std::string& addons_dir);
std::vector<PackageArtifact> inspect_packages(const EvidenceSource& source,
                                              const std::string& packages_dir);

// Disk vs database vs packages synthesis: sideloads, uninstalls (carved
// rows with no folder), and version disagreements.
std::vector<Discrepancy> cross_reference(const std::vector<AddonManifest>& manifests,
                                         const std::vector<AddonRecord>& addon_records,
                                         const std::vector<PackageArtifact>& packages);

// "id-version.zip" name grammar; returns false for nonstandard names.
bool parse_package_name(const std::string& zip_name, std::string& addon_id,
                        std::string& version);

}  // namespace streamtrace
