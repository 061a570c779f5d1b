#include "streamtrace/addon_inspector.hpp"

#include <sys/stat.h>

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>

#include "streamtrace/errors.hpp"
#include "streamtrace/xml_lite.hpp"
#include "streamtrace/zip_reader.hpp"

namespace streamtrace {

const char* addon_kind_name(AddonKind k) noexcept {
  switch (k) {
    case AddonKind::Repository: return "Repository";
    case AddonKind::VideoPlugin: return "VideoPlugin";
    case AddonKind::Scraper: return "Scraper";
    case AddonKind::LanguageResource: return "LanguageResource";
    case AddonKind::Script: return "Script";
    case AddonKind::Other: return "Other";
  }
  return "Other";
}

const char* discrepancy_kind_name(DiscrepancyKind k) noexcept {
  switch (k) {
    case DiscrepancyKind::DiskOnly: return "DiskOnly";
    case DiscrepancyKind::DbOnlyLive: return "DbOnlyLive";
    case DiscrepancyKind::DbOnlyCarved: return "DbOnlyCarved";
    case DiscrepancyKind::VersionMismatch: return "VersionMismatch";
  }
  return "DiskOnly";
}

namespace {

AddonKind kind_from_extension_point(const std::string& point) {
  if (point == "xbmc.addon.repository") return AddonKind::Repository;
  if (point == "xbmc.python.pluginsource") return AddonKind::VideoPlugin;
  if (point.rfind("xbmc.metadata.scraper", 0) == 0) return AddonKind::Scraper;
  if (point == "kodi.resource.language" || point == "xbmc.resource.language")
    return AddonKind::LanguageResource;
  if (point == "xbmc.python.script" || point == "xbmc.python.module")
    return AddonKind::Script;
  return AddonKind::Other;
}

AddonKind kind_from_id_prefix(const std::string& id) {
  if (id.rfind("repository.", 0) == 0) return AddonKind::Repository;
  if (id.rfind("plugin.video.", 0) == 0) return AddonKind::VideoPlugin;
  if (id.rfind("metadata.", 0) == 0) return AddonKind::Scraper;
  if (id.rfind("resource.language.", 0) == 0) return AddonKind::LanguageResource;
  if (id.rfind("script.", 0) == 0) return AddonKind::Script;
  return AddonKind::Other;
}

const std::regex kUrlPattern(R"((https?|ftp)://[^\s"'<>\\)]+)", std::regex::optimize);

std::vector<std::string> scan_urls(const std::vector<uint8_t>& bytes) {
  std::string text(bytes.begin(), bytes.end());
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto begin = std::sregex_iterator(text.begin(), text.end(), kUrlPattern);
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    std::string url = it->str();
    if (seen.insert(url).second) out.push_back(std::move(url));
  }
  return out;
}

std::optional<std::string> find_file_ci(const EvidenceSource& src, const std::string& dir,
                                        std::initializer_list<const char*> names) {
  if (!src.is_directory(dir)) return std::nullopt;
  for (const DirEntry& e : src.list_dir(dir)) {
    if (e.kind != DirEntry::Kind::File) continue;
    for (const char* n : names)
      if (iequals(e.name, n)) return dir + "/" + e.name;
  }
  return std::nullopt;
}

AddonManifest inspect_one(const EvidenceSource& src, const std::string& dir,
                          const std::string& dir_name) {
  AddonManifest m;
  m.dir_path = dir;
  m.addon_id = dir_name;  // fallback identity: the folder name

  auto meta_path = find_file_ci(src, dir, {"addon.xml", "add-on.xml"});
  if (!meta_path) {
    m.anomalies.push_back("MissingMetadata");
    m.kind = kind_from_id_prefix(dir_name);
    return m;
  }
  m.metadata_path = *meta_path;

  std::vector<uint8_t> bytes = src.read_file(*meta_path);
  XmlParseResult xml = parse_xml_forgiving(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  if (!xml.well_formed) m.anomalies.push_back("MalformedMetadata");

  const XmlNode* addon = xml.root_element();
  if (!addon || addon->name != "addon") {
    m.anomalies.push_back("NoAddonElement");
    m.kind = kind_from_id_prefix(dir_name);
    return m;
  }

  std::string declared_id = addon->attr("id").value_or("");
  if (!declared_id.empty()) {
    m.addon_id = declared_id;
    if (declared_id != dir_name) m.anomalies.push_back("IdMismatch");
  } else {
    m.anomalies.push_back("MissingId");
  }
  m.version = addon->attr("version").value_or("");
  if (auto p = addon->attr("provider-name")) m.provider = p;

  if (const XmlNode* requires_node = addon->find_child("requires")) {
    for (const XmlNode* imp : requires_node->find_all("import")) {
      AddonDependency dep;
      dep.addon_id = imp->attr("addon").value_or("");
      dep.min_version = imp->attr("version").value_or("");
      dep.optional = imp->attr("optional").value_or("false") == "true";
      if (!dep.addon_id.empty()) m.dependencies.push_back(std::move(dep));
    }
  }

  std::string code_entry = "addon.py";
  for (const XmlNode* ext : addon->find_all("extension")) {
    std::string point = ext->attr("point").value_or("");
    AddonKind k = kind_from_extension_point(point);
    if (k != AddonKind::Other && m.kind == AddonKind::Other) m.kind = k;
    if (point == "xbmc.addon.repository") {
      // the update URL lives in the repository <info> element
      if (const XmlNode* info = ext->find_child("info")) {
        if (!info->text.empty()) m.update_url = info->text;
      } else if (const XmlNode* dir_node = ext->find_child("dir")) {
        if (const XmlNode* info2 = dir_node->find_child("info"))
          if (!info2->text.empty()) m.update_url = info2->text;
      }
    }
    if (auto lib = ext->attr("library")) {
      if (!lib->empty()) code_entry = *lib;
    }
  }
  if (m.kind == AddonKind::Other) m.kind = kind_from_id_prefix(m.addon_id);

  m.has_code = find_file_ci(src, dir, {code_entry.c_str(), "addon.py", "default.py"})
                   .has_value();
  m.has_license = find_file_ci(src, dir, {"License.txt", "LICENSE.txt", "LICENSE",
                                          "license.txt"})
                      .has_value();

  // python files: hashed (via the read manifest), line-counted, and scanned
  // for URL literals, which are the investigative payload
  for (const DirEntry& e : src.list_dir(dir)) {
    if (e.kind != DirEntry::Kind::File) continue;
    if (!to_lower(e.name).ends_with(".py")) continue;
    std::vector<uint8_t> code = src.read_file(dir + "/" + e.name);
    m.code_file_count += 1;
    m.code_line_count +=
        static_cast<int>(std::count(code.begin(), code.end(), uint8_t('\n')));
    std::vector<std::string> urls = scan_urls(code);
    m.code_urls.insert(m.code_urls.end(), urls.begin(), urls.end());
  }
  std::sort(m.code_urls.begin(), m.code_urls.end());
  m.code_urls.erase(std::unique(m.code_urls.begin(), m.code_urls.end()), m.code_urls.end());
  return m;
}

}  // namespace

AddonInspection inspect_addons(const EvidenceSource& source, const std::string& addons_dir) {
  if (!source.is_directory(addons_dir)) raise(Errc::DirNotFound, addons_dir);
  AddonInspection out;
  for (const DirEntry& e : source.list_dir(addons_dir)) {
    if (e.kind == DirEntry::Kind::Symlink) {
      source.record_symlink(addons_dir + "/" + e.name);
      out.unreadable_entries.push_back(e.name + " (symlink, not followed)");
      continue;
    }
    if (e.kind != DirEntry::Kind::Directory) continue;
    if (iequals(e.name, "packages") || iequals(e.name, "temp")) continue;
    try {
      out.manifests.push_back(inspect_one(source, addons_dir + "/" + e.name, e.name));
    } catch (const Error& err) {
      out.unreadable_entries.push_back(e.name + ": " + err.what());
    }
  }
  std::sort(out.manifests.begin(), out.manifests.end(),
            [](const AddonManifest& a, const AddonManifest& b) {
              return a.addon_id != b.addon_id ? a.addon_id < b.addon_id
                                              : a.dir_path < b.dir_path;
            });
  return out;
}

bool parse_package_name(const std::string& zip_name, std::string& addon_id,
                        std::string& version) {
  std::string stem = zip_name;
  if (to_lower(stem).ends_with(".zip")) stem = stem.substr(0, stem.size() - 4);
  // id-version.zip: the version is the part after the last '-' that starts
  // with a digit
  size_t dash = stem.rfind('-');
  if (dash == std::string::npos || dash + 1 >= stem.size()) return false;
  std::string candidate = stem.substr(dash + 1);
  if (!std::isdigit(static_cast<unsigned char>(candidate[0]))) return false;
  for (char c : candidate)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '+' && c != '~')
      return false;
  addon_id = stem.substr(0, dash);
  version = candidate;
  return !addon_id.empty();
}

std::vector<PackageArtifact> inspect_packages(const EvidenceSource& source,
                                              const std::string& packages_dir) {
  if (!source.is_directory(packages_dir)) raise(Errc::DirNotFound, packages_dir);
  std::vector<PackageArtifact> out;
  for (const DirEntry& e : source.list_dir(packages_dir)) {
    if (e.kind != DirEntry::Kind::File) continue;
    if (!to_lower(e.name).ends_with(".zip")) continue;
    PackageArtifact p;
    p.zip_name = e.name;
    p.relative_path = packages_dir + "/" + e.name;

    std::string id, ver;
    if (parse_package_name(e.name, id, ver)) {
      p.implied_addon_id = id;
      p.implied_version = ver;
    } else {
      p.implied_addon_id = e.name.substr(0, e.name.size() - 4);
      p.nonstandard_name = true;
    }

    std::vector<uint8_t> bytes = source.read_file(p.relative_path);
    if (auto entry = source.manifest_entry(p.relative_path)) p.sha256 = entry->sha256;

    ZipDirectory dir = read_zip_directory(bytes);
    for (const ZipEntry& ze : dir.entries) {
      if (!p.zip_earliest || LocalClockTime::compare(ze.mtime, *p.zip_earliest) < 0)
        p.zip_earliest = ze.mtime;
      if (!p.zip_latest || LocalClockTime::compare(ze.mtime, *p.zip_latest) > 0)
        p.zip_latest = ze.mtime;
    }

    // filesystem mtime: a device clock, reported but never trusted
    struct stat st{};
    if (::stat((source.root() / p.relative_path).c_str(), &st) == 0) {
      std::tm tm{};
      gmtime_r(&st.st_mtime, &tm);
      p.file_mtime = local_time_from_parts(tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                                           tm.tm_hour, tm.tm_min, tm.tm_sec);
    }
    out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(), [](const PackageArtifact& a, const PackageArtifact& b) {
    return a.zip_name < b.zip_name;
  });
  return out;
}

std::vector<Discrepancy> cross_reference(const std::vector<AddonManifest>& manifests,
                                         const std::vector<AddonRecord>& addon_records,
                                         const std::vector<PackageArtifact>& packages) {
  std::vector<Discrepancy> out;

  std::map<std::string, const AddonManifest*> disk;
  for (const AddonManifest& m : manifests) disk.emplace(m.addon_id, &m);

  std::map<std::string, bool> db_live;  // id -> any live row
  for (const AddonRecord& r : addon_records) {
    if (r.addon_id.empty() || r.addon_id == "(unknown)") continue;
    auto [it, inserted] = db_live.emplace(r.addon_id, r.liveness == sqlite::Liveness::Live);
    if (!inserted && r.liveness == sqlite::Liveness::Live) it->second = true;
  }

  for (const auto& [id, manifest] : disk) {
    if (!db_live.count(id))
      out.push_back({DiscrepancyKind::DiskOnly, id,
                     "present on disk at " + manifest->dir_path +
                         " but absent from the addons database (sideload or cleaned DB)"});
  }
  for (const auto& [id, live] : db_live) {
    if (disk.count(id)) continue;
    if (live)
      out.push_back({DiscrepancyKind::DbOnlyLive, id,
                     "live database row with no matching addon folder"});
    else
      out.push_back({DiscrepancyKind::DbOnlyCarved, id,
                     "carved (deleted) database row with no addon folder: uninstall evidence"});
  }

  // version disagreement: a disk install whose version matches none of its
  // downloaded package zips
  std::map<std::string, std::set<std::string>> package_versions;
  for (const PackageArtifact& p : packages)
    if (p.implied_version) package_versions[p.implied_addon_id].insert(*p.implied_version);
  for (const auto& [id, manifest] : disk) {
    auto it = package_versions.find(id);
    if (it == package_versions.end() || manifest->version.empty()) continue;
    if (!it->second.count(manifest->version)) {
      std::string versions;
      for (const std::string& v : it->second) {
        if (!versions.empty()) versions += ", ";
        versions += v;
      }
      out.push_back({DiscrepancyKind::VersionMismatch, id,
                     "installed version " + manifest->version +
                         " matches no downloaded package (" + versions + ")"});
    }
  }

  std::sort(out.begin(), out.end(), [](const Discrepancy& a, const Discrepancy& b) {
    if (a.addon_id != b.addon_id) return a.addon_id < b.addon_id;
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  return out;
}

}  // namespace streamtrace
