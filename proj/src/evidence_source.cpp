#include "streamtrace/evidence_source.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "streamtrace/errors.hpp"
#include "streamtrace/sha256.hpp"
#include "streamtrace/util.hpp"

namespace fs = std::filesystem;

namespace streamtrace {

EvidenceSource::EvidenceSource(fs::path root, std::string case_id, std::string examiner,
                               Options options)
    : root_(std::move(root)),
      case_id_(std::move(case_id)),
      examiner_(std::move(examiner)),
      options_(options) {
  std::error_code ec;
  fs::file_status st = fs::status(root_, ec);
  if (ec || !fs::exists(st)) raise(Errc::NotADirectory, root_.string() + " does not exist");
  if (!fs::is_directory(st)) raise(Errc::NotADirectory, root_.string() + " is not a directory");
  root_ = fs::absolute(root_).lexically_normal();
  opened_at_ = now_rfc3339();
}

std::string EvidenceSource::now_rfc3339() const {
  auto tp = options_.fixed_clock ? *options_.fixed_clock : std::chrono::system_clock::now();
  return format_rfc3339(tp);
}

fs::path EvidenceSource::resolve(const std::string& relative_path) const {
  if (relative_path.empty()) return root_;
  fs::path rel(relative_path);
  if (rel.is_absolute()) raise(Errc::PathEscapesRoot, relative_path);
  fs::path current = root_;
  std::vector<std::string> parts;
  for (const auto& part : rel) {
    std::string s = part.string();
    if (s.empty() || s == ".") continue;
    if (s == "..") raise(Errc::PathEscapesRoot, relative_path);
    parts.push_back(s);
  }
  for (size_t i = 0; i < parts.size(); ++i) {
    // intermediate components must be real directories; symlinks are
    // never followed, so a path through one does not exist in this view
    if (i + 1 < parts.size()) {
      std::error_code ec;
      fs::file_status st = fs::symlink_status(current / parts[i], ec);
      if (ec || !fs::exists(st)) raise(Errc::FileNotFound, relative_path);
      if (fs::is_symlink(st)) raise(Errc::FileNotFound, relative_path + " (symlink component)");
      if (!fs::is_directory(st)) raise(Errc::FileNotFound, relative_path);
    }
    current /= parts[i];
  }
  return current;
}

void EvidenceSource::note_entry(HashManifestEntry entry) const {
  std::lock_guard<std::mutex> lock(manifest_mutex_);
  manifest_.emplace(entry.relative_path, std::move(entry));  // first read wins
}

void EvidenceSource::ensure_hashed(const std::string& relative_path,
                                   const fs::path& abs) const {
  {
    std::lock_guard<std::mutex> lock(manifest_mutex_);
    if (manifest_.count(relative_path)) return;
  }
  HashManifestEntry e;
  e.relative_path = relative_path;
  uint64_t size = 0;
  e.sha256 = Sha256::hex_of_file(abs, &size);
  e.size_bytes = size;
  e.read_at = now_rfc3339();
  note_entry(std::move(e));
}

std::vector<uint8_t> EvidenceSource::read_file(const std::string& relative_path) const {
  fs::path abs = resolve(relative_path);
  std::error_code ec;
  fs::file_status st = fs::symlink_status(abs, ec);
  if (ec || !fs::exists(st)) raise(Errc::FileNotFound, relative_path);
  if (fs::is_symlink(st)) raise(Errc::FileNotFound, relative_path + " (symlink, not followed)");
  if (!fs::is_regular_file(st)) raise(Errc::FileNotFound, relative_path + " (not a regular file)");
  uint64_t size = fs::file_size(abs, ec);
  if (ec) raise(Errc::PermissionDenied, relative_path);
  if (size > options_.max_in_memory_bytes)
    raise(Errc::FileTooLarge, relative_path + " exceeds in-memory cap; use ranged reads");

  std::ifstream in(abs, std::ios::binary);
  if (!in) raise(Errc::PermissionDenied, relative_path);
  std::vector<uint8_t> bytes(size);
  if (size > 0) {
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
    if (static_cast<uint64_t>(in.gcount()) != size)
      bytes.resize(static_cast<size_t>(in.gcount()));
  }

  {
    std::lock_guard<std::mutex> lock(manifest_mutex_);
    if (!manifest_.count(relative_path)) {
      HashManifestEntry e;
      e.relative_path = relative_path;
      e.sha256 = Sha256::hex_of(bytes);
      e.size_bytes = bytes.size();
      e.read_at = now_rfc3339();
      manifest_.emplace(relative_path, std::move(e));
    }
  }
  return bytes;
}

std::vector<uint8_t> EvidenceSource::read_range(const std::string& relative_path, uint64_t offset,
                                                uint64_t length) const {
  fs::path abs = resolve(relative_path);
  std::error_code ec;
  fs::file_status st = fs::symlink_status(abs, ec);
  if (ec || !fs::exists(st)) raise(Errc::FileNotFound, relative_path);
  if (fs::is_symlink(st) || !fs::is_regular_file(st))
    raise(Errc::FileNotFound, relative_path);
  ensure_hashed(relative_path, abs);

  std::ifstream in(abs, std::ios::binary);
  if (!in) raise(Errc::PermissionDenied, relative_path);
  in.seekg(static_cast<std::streamoff>(offset));
  std::vector<uint8_t> bytes(length);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(length));
  bytes.resize(static_cast<size_t>(std::max<std::streamsize>(in.gcount(), 0)));
  return bytes;
}

void EvidenceSource::hash_file(const std::string& relative_path) const {
  fs::path abs = resolve(relative_path);
  std::error_code ec;
  fs::file_status st = fs::symlink_status(abs, ec);
  if (ec || !fs::exists(st) || !fs::is_regular_file(st))
    raise(Errc::FileNotFound, relative_path);
  ensure_hashed(relative_path, abs);
}

uint64_t EvidenceSource::file_size(const std::string& relative_path) const {
  fs::path abs = resolve(relative_path);
  std::error_code ec;
  uint64_t size = fs::file_size(abs, ec);
  if (ec) raise(Errc::FileNotFound, relative_path);
  return size;
}

bool EvidenceSource::exists(const std::string& relative_path) const {
  try {
    fs::path abs = resolve(relative_path);
    std::error_code ec;
    return fs::exists(fs::symlink_status(abs, ec)) && !ec;
  } catch (const Error&) {
    return false;
  }
}

bool EvidenceSource::is_directory(const std::string& relative_path) const {
  try {
    std::error_code ec;
    fs::file_status st = fs::symlink_status(resolve(relative_path), ec);
    return !ec && fs::is_directory(st);
  } catch (const Error&) {
    return false;
  }
}

bool EvidenceSource::is_regular_file(const std::string& relative_path) const {
  try {
    std::error_code ec;
    fs::file_status st = fs::symlink_status(resolve(relative_path), ec);
    return !ec && fs::is_regular_file(st);
  } catch (const Error&) {
    return false;
  }
}

bool EvidenceSource::is_symlink(const std::string& relative_path) const {
  try {
    std::error_code ec;
    fs::file_status st = fs::symlink_status(resolve(relative_path), ec);
    return !ec && fs::is_symlink(st);
  } catch (const Error&) {
    return false;
  }
}

std::vector<DirEntry> EvidenceSource::list_dir(const std::string& relative_path) const {
  fs::path abs = resolve(relative_path);
  std::error_code ec;
  if (!fs::is_directory(fs::symlink_status(abs, ec)) || ec)
    raise(Errc::DirNotFound, relative_path);
  std::vector<DirEntry> out;
  for (const auto& de : fs::directory_iterator(abs, ec)) {
    DirEntry e;
    e.name = de.path().filename().string();
    std::error_code sec;
    fs::file_status st = de.symlink_status(sec);
    if (sec)
      e.kind = DirEntry::Kind::Other;
    else if (fs::is_symlink(st))
      e.kind = DirEntry::Kind::Symlink;
    else if (fs::is_directory(st))
      e.kind = DirEntry::Kind::Directory;
    else if (fs::is_regular_file(st))
      e.kind = DirEntry::Kind::File;
    out.push_back(std::move(e));
  }
  if (ec) raise(Errc::PermissionDenied, relative_path);
  std::sort(out.begin(), out.end(),
            [](const DirEntry& a, const DirEntry& b) { return a.name < b.name; });
  return out;
}

std::string EvidenceSource::record_symlink(const std::string& relative_path) const {
  fs::path abs = resolve(relative_path);
  std::error_code ec;
  fs::path target = fs::read_symlink(abs, ec);
  if (ec) raise(Errc::FileNotFound, relative_path);
  std::string target_str = target.string();
  HashManifestEntry e;
  e.relative_path = relative_path;
  e.kind = "symlink";
  e.symlink_target = target_str;
  e.sha256 = Sha256::hex_of(
      {reinterpret_cast<const uint8_t*>(target_str.data()), target_str.size()});
  e.size_bytes = target_str.size();
  e.read_at = now_rfc3339();
  note_entry(std::move(e));
  return target_str;
}

std::vector<HashManifestEntry> EvidenceSource::export_manifest() const {
  std::lock_guard<std::mutex> lock(manifest_mutex_);
  std::vector<HashManifestEntry> out;
  out.reserve(manifest_.size());
  for (const auto& [path, entry] : manifest_) out.push_back(entry);
  return out;  // map iteration is already sorted by relative_path
}

std::optional<HashManifestEntry> EvidenceSource::manifest_entry(
    const std::string& relative_path) const {
  std::lock_guard<std::mutex> lock(manifest_mutex_);
  auto it = manifest_.find(relative_path);
  if (it == manifest_.end()) return std::nullopt;
  return it->second;
}

std::string EvidenceSource::manifest_json() const {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& e : export_manifest()) {
    nlohmann::ordered_json obj;
    obj["path"] = e.relative_path;
    obj["sha256"] = e.sha256;
    obj["size"] = e.size_bytes;
    obj["read_at"] = e.read_at;
    if (e.kind != "file") {
      obj["kind"] = e.kind;
      obj["target"] = e.symlink_target;
    }
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

}  // namespace streamtrace
