// streamtrace: read-only Kodi triage over a mounted evidence tree.
// Informational output goes to stderr; stdout carries machine-parseable
// summaries only. Exit codes: 0 success, 2 operational error, 3 nothing
// found.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "streamtrace/errors.hpp"
#include "streamtrace/pipeline.hpp"
#include "streamtrace/profiles.hpp"
#include "streamtrace/timeline_report.hpp"

namespace fs = std::filesystem;
using namespace streamtrace;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 2;
constexpr int kExitNothingFound = 3;

struct CommonArgs {
  std::string root;
  std::string case_id = "unlabeled-case";
  std::string examiner = "unknown";
  std::string out_dir;
  std::string formats = "json";
  std::string profiles_dir;
  std::string fixed_clock;
  bool no_carve = false;
  bool raw_dumps = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_out) {
  cmd->add_option("--root", args.root, "Mounted evidence tree root")->required();
  cmd->add_option("--case-id", args.case_id, "Case label for the report header");
  cmd->add_option("--examiner", args.examiner, "Examiner name for the report header");
  auto* out = cmd->add_option("--out", args.out_dir, "Output directory (never inside --root)");
  if (needs_out) out->required();
  cmd->add_option("--formats", args.formats,
                  "Comma-separated report formats: json,csv,html (default json)");
  cmd->add_option("--profiles", args.profiles_dir,
                  "Directory overriding the bundled pattern/mapping data files");
  cmd->add_option("--fixed-clock", args.fixed_clock,
                  "RFC 3339 timestamp injected as opened_at (reproducible runs)");
  cmd->add_flag("--no-carve", args.no_carve, "Skip deleted-record carving");
}

EvidenceSource open_from(const CommonArgs& args) {
  EvidenceSource::Options options;
  if (!args.fixed_clock.empty()) {
    auto tp = parse_rfc3339(args.fixed_clock);
    if (!tp) raise(Errc::InvalidArgument, "unparseable --fixed-clock value");
    options.fixed_clock = tp;
  }
  return EvidenceSource(args.root, args.case_id, args.examiner, options);
}

ProfileSet profiles_from(const CommonArgs& args) {
  return load_profiles(args.profiles_dir.empty()
                           ? std::nullopt
                           : std::optional<fs::path>(args.profiles_dir));
}

void check_out_dir(const CommonArgs& args) {
  if (args.out_dir.empty()) return;
  fs::path root = fs::weakly_canonical(fs::absolute(args.root));
  fs::path out = fs::weakly_canonical(fs::absolute(args.out_dir));
  std::string root_s = root.string();
  std::string out_s = out.string();
  if (out_s == root_s || out_s.rfind(root_s + "/", 0) == 0)
    raise(Errc::InvalidArgument,
          "output directory must not be inside the evidence tree (never write into evidence)");
  fs::create_directories(out);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) raise(Errc::WriteFailure, path.string());
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) raise(Errc::WriteFailure, path.string());
}

void print_warnings(const CaseData& data) {
  for (const std::string& w : data.global_warnings) std::cerr << "warning: " << w << "\n";
  for (const InstallationArtifacts& inst : data.installations)
    for (const std::string& w : inst.warnings)
      std::cerr << "warning: " << inst.install.home_path << ": " << w << "\n";
}

int cmd_scan(const CommonArgs& args) {
  EvidenceSource source = open_from(args);
  ProfileSet profiles = profiles_from(args);
  std::vector<KodiInstallation> installations = scan(source, profiles);
  for (const KodiInstallation& inst : installations) {
    std::string release = inst.version_hint && inst.version_hint->release_name
                              ? *inst.version_hint->release_name
                              : "-";
    std::string suffix =
        inst.version_hint ? std::to_string(inst.version_hint->database_suffix) : "-";
    std::cout << inst.home_path << "\t" << platform_name(inst.platform) << "\t" << release
              << "\t" << suffix << "\t" << inst.databases.size() << "\t" << inst.logs.size()
              << "\n";
  }
  std::cerr << installations.size() << " Kodi installation(s) found\n";
  if (installations.empty()) {
    std::cerr << "no Kodi installations found\n";
    return kExitNothingFound;
  }
  return kExitOk;
}

int cmd_extract(const CommonArgs& args) {
  EvidenceSource source = open_from(args);
  ProfileSet profiles = profiles_from(args);
  check_out_dir(args);
  PipelineOptions options;
  options.include_carved = !args.no_carve;
  CaseData data = run_extraction(source, profiles, options);
  print_warnings(data);

  fs::path out(args.out_dir);
  for (size_t i = 0; i < data.installations.size(); ++i) {
    char name[48];
    std::snprintf(name, sizeof(name), "artifacts_%03zu.json", i);
    write_file(out / name, emit_installation_artifacts_json(data.installations[i]));
    std::cout << (out / name).string() << "\n";
  }
  write_file(out / "manifest.json", source.manifest_json());
  std::cerr << data.installations.size() << " artifact file(s) written to " << out.string()
            << "\n";
  return kExitOk;
}

int cmd_timeline(const CommonArgs& args) {
  EvidenceSource source = open_from(args);
  ProfileSet profiles = profiles_from(args);
  if (!args.out_dir.empty()) check_out_dir(args);
  PipelineOptions options;
  options.include_carved = !args.no_carve;
  CaseData data = run_extraction(source, profiles, options);
  print_warnings(data);
  std::vector<TimelineEvent> timeline = build_timeline(data, source);
  if (args.out_dir.empty()) {
    std::cout << emit_timeline_json(timeline);
  } else {
    fs::path out(args.out_dir);
    write_file(out / "timeline.json", emit_timeline_json(timeline));
    write_file(out / "timeline.csv", emit_timeline_csv(timeline));
    write_file(out / "manifest.json", source.manifest_json());
    std::cerr << "timeline written to " << out.string() << "\n";
  }
  return kExitOk;
}

int cmd_report(const CommonArgs& args) {
  EvidenceSource source = open_from(args);
  ProfileSet profiles = profiles_from(args);
  check_out_dir(args);
  PipelineOptions options;
  options.include_carved = !args.no_carve;
  CaseData data = run_extraction(source, profiles, options);
  print_warnings(data);
  EvidenceReport report = assemble_report(source, std::move(data));

  fs::path out(args.out_dir);
  for (const std::string& name : split(args.formats, ',')) {
    if (name.empty()) continue;
    auto format = report_format_from_name(name);
    if (!format) raise(Errc::UnsupportedFormat, name);
    std::string filename = std::string("report.") + report_format_extension(*format);
    write_file(out / filename, emit_report(report, *format));
    std::cout << (out / filename).string() << "\n";
  }
  write_file(out / "manifest.json", source.manifest_json());
  std::cout << (out / "manifest.json").string() << "\n";
  std::cerr << "report written to " << out.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streamtrace: forensic triage for Kodi media-center installations"};
  app.require_subcommand(1);

  CommonArgs scan_args, extract_args, timeline_args, report_args;
  CLI::App* scan_cmd = app.add_subcommand("scan", "Locate Kodi installations");
  add_common(scan_cmd, scan_args, false);
  CLI::App* extract_cmd =
      app.add_subcommand("extract", "Write per-installation artifact JSON files");
  add_common(extract_cmd, extract_args, true);
  CLI::App* timeline_cmd =
      app.add_subcommand("timeline", "Merge all artifacts into one chronological timeline");
  add_common(timeline_cmd, timeline_args, false);
  CLI::App* report_cmd =
      app.add_subcommand("report", "Emit the full evidence report plus hash manifest");
  add_common(report_cmd, report_args, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (scan_cmd->parsed()) return cmd_scan(scan_args);
    if (extract_cmd->parsed()) return cmd_extract(extract_args);
    if (timeline_cmd->parsed()) return cmd_timeline(timeline_args);
    if (report_cmd->parsed()) return cmd_report(report_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
