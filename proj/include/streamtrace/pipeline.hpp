#pragma once

#include <filesystem>
#include <optional>

#include "streamtrace/timeline_report.hpp"

namespace streamtrace {

struct PipelineOptions {
  bool include_carved = true;
  // raw verbatim table dumps for databases without field mappings
  // (MyMusic, EPG, TV, ADSP, unknown roles)
  bool raw_dumps = false;
  uint64_t max_log_bytes = 256ull << 20;
};

// Runs locator + every extractor over one evidence source. Per-database and
// per-log parsing fan out in parallel; the merge is single-threaded and
// deterministic.
CaseData run_extraction(const EvidenceSource& source, const ProfileSet& profiles,
                        const PipelineOptions& options = {});

InstallationArtifacts extract_installation(const EvidenceSource& source,
                                           const ProfileSet& profiles,
                                           const KodiInstallation& install,
                                           const PipelineOptions& options = {});

}  // namespace streamtrace
