#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace streamtrace {

struct HashManifestEntry {
  std::string relative_path;  // '/'-separated, relative to the evidence root
  std::string sha256;         // 64 lowercase hex chars
  uint64_t size_bytes = 0;
  std::string read_at;        // RFC 3339 UTC, tool clock
  std::string kind = "file";  // "file" | "symlink"
  std::string symlink_target; // set when kind == "symlink"
};

struct DirEntry {
  enum class Kind { File, Directory, Symlink, Other };
  std::string name;
  Kind kind = Kind::Other;
};

// Rooted, strictly read-only view of a mounted evidence tree. Every file
// touched is recorded in the chain-of-custody manifest exactly once.
// Symbolic links are never followed. Safe for concurrent reads; manifest
// appends are serialized internally.
class EvidenceSource {
public:
  struct Options {
    uint64_t max_in_memory_bytes = 1ull << 30;  // whole-file read cap
    std::optional<std::chrono::system_clock::time_point> fixed_clock;
  };

  EvidenceSource(std::filesystem::path root, std::string case_id, std::string examiner,
                 Options options);
  EvidenceSource(std::filesystem::path root, std::string case_id, std::string examiner)
      : EvidenceSource(std::move(root), std::move(case_id), std::move(examiner), Options{}) {}

  const std::filesystem::path& root() const { return root_; }
  const std::string& case_id() const { return case_id_; }
  const std::string& examiner() const { return examiner_; }
  const std::string& opened_at() const { return opened_at_; }

  // Whole-file read; refuses files over the in-memory cap (FileTooLarge).
  std::vector<uint8_t> read_file(const std::string& relative_path) const;

  // Ranged read for large files; the file is hash-manifested (streamed) on
  // first touch. Reads past EOF return the available prefix.
  std::vector<uint8_t> read_range(const std::string& relative_path, uint64_t offset,
                                  uint64_t length) const;

  uint64_t file_size(const std::string& relative_path) const;

  // Streamed hash into the manifest without loading the file.
  void hash_file(const std::string& relative_path) const;

  bool exists(const std::string& relative_path) const;
  bool is_directory(const std::string& relative_path) const;
  bool is_regular_file(const std::string& relative_path) const;
  bool is_symlink(const std::string& relative_path) const;

  // Sorted by name; never follows symlinks.
  std::vector<DirEntry> list_dir(const std::string& relative_path) const;

  // Records a symlink manifest entry (hash of the target string) and
  // returns the target text.
  std::string record_symlink(const std::string& relative_path) const;

  // Entries sorted by relative_path; stable across calls with no new reads.
  std::vector<HashManifestEntry> export_manifest() const;
  std::optional<HashManifestEntry> manifest_entry(const std::string& relative_path) const;

  // External manifest format: JSON array of {path, sha256, size, read_at}.
  std::string manifest_json() const;

  std::string now_rfc3339() const;

private:
  std::filesystem::path resolve(const std::string& relative_path) const;
  void note_entry(HashManifestEntry entry) const;
  void ensure_hashed(const std::string& relative_path, const std::filesystem::path& abs) const;

  std::filesystem::path root_;
  std::string case_id_;
  std::string examiner_;
  std::string opened_at_;
  Options options_;

  mutable std::mutex manifest_mutex_;
  mutable std::map<std::string, HashManifestEntry> manifest_;
};

}  // namespace streamtrace
