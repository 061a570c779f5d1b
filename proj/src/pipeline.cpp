#include "streamtrace/pipeline.hpp"

#include <memory>

#include "streamtrace/errors.hpp"

namespace streamtrace {

namespace {

DatabaseArtifacts extract_database(const EvidenceSource& source, const ProfileSet& profiles,
                                   const DatabaseFile& file, const PipelineOptions& options) {
  DatabaseArtifacts out;
  out.file = file;
  try {
    auto page_source =
        std::make_shared<sqlite::EvidencePageSource>(source, file.relative_path);
    sqlite::Database db(std::move(page_source), file.relative_path);
    out.parsed = true;
    out.page_count = db.header().page_count;
    switch (file.role.role) {
      case DbRole::Addons:
        out.addons = extract_addons(db, profiles.columns, options.include_carved);
        break;
      case DbRole::MyVideos:
        out.playback = extract_playback(db, profiles.columns, options.include_carved);
        break;
      case DbRole::Textures:
        out.textures = extract_textures(db, profiles.columns, options.include_carved);
        break;
      case DbRole::ViewModes:
        out.usage = extract_usage(db, profiles.columns, options.include_carved);
        break;
      default:
        // not field-mapped: inventoried and hashed always, dumped verbatim
        // on demand; the schema walk runs either way so page anomalies get
        // recorded
        if (options.raw_dumps)
          out.usage = extract_usage(db, profiles.columns, options.include_carved);
        else
          db.read_schema();
        break;
    }
    out.anomalies = db.anomalies();
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

LogArtifacts extract_log(const EvidenceSource& source, const ProfileSet& profiles,
                         const LogFileRef& file, const PipelineOptions& options) {
  LogArtifacts out;
  out.file = file;
  // ranged reads so an oversized file cannot abort the whole triage
  uint64_t size = source.file_size(file.relative_path);
  uint64_t take = std::min(size, options.max_log_bytes);
  std::vector<uint8_t> bytes;
  bytes.reserve(static_cast<size_t>(take));
  constexpr uint64_t kChunk = 8ull << 20;
  for (uint64_t offset = 0; offset < take;) {
    std::vector<uint8_t> chunk =
        source.read_range(file.relative_path, offset, std::min(kChunk, take - offset));
    if (chunk.empty()) break;
    offset += chunk.size();
    bytes.insert(bytes.end(), chunk.begin(), chunk.end());
  }
  auto [events, summary] = parse_log(bytes, file.session_index, profiles.log_profile);
  out.events = std::move(events);
  out.summary = std::move(summary);
  return out;
}

}  // namespace

InstallationArtifacts extract_installation(const EvidenceSource& source,
                                           const ProfileSet& profiles,
                                           const KodiInstallation& install,
                                           const PipelineOptions& options) {
  InstallationArtifacts out;
  out.install = install;

  out.databases.resize(install.databases.size());
#pragma omp parallel for schedule(dynamic)
  for (size_t i = 0; i < install.databases.size(); ++i) {
    out.databases[i] = extract_database(source, profiles, install.databases[i], options);
  }

  for (const DatabaseArtifacts& db : out.databases) {
    for (const std::string& sidecar : db.file.sidecars) {
      source.hash_file(sidecar);
      out.warnings.push_back(sidecar +
                             ": WAL/journal sidecar present; frames not merged into the "
                             "main database image");
    }
    if (!db.error.empty())
      out.warnings.push_back(db.file.relative_path + ": " + db.error);
  }

  out.logs.resize(install.logs.size());
#pragma omp parallel for schedule(dynamic)
  for (size_t i = 0; i < install.logs.size(); ++i) {
    out.logs[i] = extract_log(source, profiles, install.logs[i], options);
  }

  const LogSessionSummary* current = nullptr;
  const LogSessionSummary* previous = nullptr;
  for (const LogArtifacts& log : out.logs) {
    if (log.file.session_index == 0 && !current) current = &log.summary;
    if (log.file.session_index == 1 && !previous) previous = &log.summary;
  }
  if (current) {
    out.sessions = pair_sessions(*current,
                                 previous ? std::optional<LogSessionSummary>(*previous)
                                          : std::nullopt);
    for (const std::string& w : out.sessions.warnings) out.warnings.push_back(w);
  } else if (!out.logs.empty()) {
    out.warnings.push_back("only a previous-session log exists; current log missing");
  }

  if (install.addons_dir) {
    out.addons_on_disk = inspect_addons(source, *install.addons_dir);
    std::string packages_dir = *install.addons_dir + "/packages";
    if (source.is_directory(packages_dir))
      out.packages = inspect_packages(source, packages_dir);
  }

  std::vector<AddonRecord> addon_records;
  for (const DatabaseArtifacts& db : out.databases)
    addon_records.insert(addon_records.end(), db.addons.addons.begin(),
                         db.addons.addons.end());
  out.discrepancies =
      cross_reference(out.addons_on_disk.manifests, addon_records, out.packages);
  return out;
}

CaseData run_extraction(const EvidenceSource& source, const ProfileSet& profiles,
                        const PipelineOptions& options) {
  CaseData out;
  std::vector<KodiInstallation> installations = scan(source, profiles);
  for (const KodiInstallation& install : installations)
    out.installations.push_back(extract_installation(source, profiles, install, options));
  if (installations.empty())
    out.global_warnings.push_back("no Kodi installations found in the evidence tree");
  return out;
}

}  // namespace streamtrace
