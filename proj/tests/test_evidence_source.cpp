#include <doctest.h>

#include "test_support.hpp"

#include "streamtrace/errors.hpp"
#include "streamtrace/evidence_source.hpp"

using namespace streamtrace;
using testsupport::TempDir;

namespace {

void write(const std::filesystem::path& p, const std::string& content) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  f << content;
}

}  // namespace

TEST_CASE("open_source requires an existing directory") {
  TempDir tmp("open");
  EvidenceSource src(tmp.path, "C-2024-001", "examiner-a");
  CHECK(src.export_manifest().empty());
  CHECK(src.case_id() == "C-2024-001");
  CHECK(src.opened_at().size() == 20);  // RFC 3339 Zulu

  CHECK_THROWS_AS(EvidenceSource("/nonexistent/path/xyz", "c", "e"), Error);
  try {
    EvidenceSource("/nonexistent/path/xyz", "c", "e");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotADirectory);
  }

  write(tmp.path / "afile.txt", "hello");
  try {
    EvidenceSource((tmp.path / "afile.txt").string(), "c", "e");
    FAIL("expected NotADirectory");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotADirectory);
  }
}

TEST_CASE("read_file hashes into the manifest") {
  TempDir tmp("read");
  write(tmp.path / "empty.bin", "");
  write(tmp.path / "sub" / "data.txt", "forensic bytes\n");
  EvidenceSource src(tmp.path, "c", "e");

  SUBCASE("empty file has the fixed empty-input hash") {
    auto bytes = src.read_file("empty.bin");
    CHECK(bytes.empty());
    auto entry = src.manifest_entry("empty.bin");
    REQUIRE(entry.has_value());
    CHECK(entry->sha256 ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(entry->size_bytes == 0);
  }

  SUBCASE("traversal escape is rejected") {
    try {
      src.read_file("../etc/passwd");
      FAIL("expected PathEscapesRoot");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::PathEscapesRoot);
    }
    try {
      src.read_file("sub/../../etc/passwd");
      FAIL("expected PathEscapesRoot");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::PathEscapesRoot);
    }
  }

  SUBCASE("missing file") {
    try {
      src.read_file("nope.bin");
      FAIL("expected FileNotFound");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::FileNotFound);
    }
  }

  SUBCASE("known fixture bytes match the reference hashing tool") {
    auto expected = testsupport::read_json(testsupport::fixture_dir() / "expected" /
                                           "sha_sample.json");
    EvidenceSource fsrc(testsupport::fixture_dir(), "c", "e");
    fsrc.read_file("sample.bin");
    auto entry = fsrc.manifest_entry("sample.bin");
    REQUIRE(entry.has_value());
    CHECK(entry->sha256 == expected.at("sha256").get<std::string>());
    CHECK(entry->size_bytes == expected.at("size").get<uint64_t>());
  }

  SUBCASE("repeated reads of an unchanged file yield one identical entry") {
    auto a = src.read_file("sub/data.txt");
    auto first = src.manifest_entry("sub/data.txt");
    auto b = src.read_file("sub/data.txt");
    auto second = src.manifest_entry("sub/data.txt");
    CHECK(a == b);
    REQUIRE(first.has_value());
    REQUIRE(second.has_value());
    CHECK(first->sha256 == second->sha256);
    CHECK(first->read_at == second->read_at);
    CHECK(src.export_manifest().size() == 1);
  }
}

TEST_CASE("export_manifest is sorted and stable") {
  TempDir tmp("manifest");
  write(tmp.path / "zz.bin", "z");
  write(tmp.path / "aa.bin", "a");
  EvidenceSource src(tmp.path, "c", "e");
  CHECK(src.export_manifest().empty());

  src.read_file("zz.bin");
  src.read_file("aa.bin");
  auto m1 = src.export_manifest();
  REQUIRE(m1.size() == 2);
  CHECK(m1[0].relative_path == "aa.bin");
  CHECK(m1[1].relative_path == "zz.bin");

  // same files read in the other order on a fresh source: same sorted output
  EvidenceSource src2(tmp.path, "c", "e");
  src2.read_file("aa.bin");
  src2.read_file("zz.bin");
  auto m2 = src2.export_manifest();
  REQUIRE(m2.size() == 2);
  CHECK(m2[0].relative_path == m1[0].relative_path);
  CHECK(m2[1].relative_path == m1[1].relative_path);
  CHECK(m2[0].sha256 == m1[0].sha256);
}

TEST_CASE("symlinks are recorded, never followed") {
  TempDir tmp("symlink");
  write(tmp.path / "real.txt", "real content");
  std::filesystem::create_symlink("real.txt", tmp.path / "link.txt");
  std::filesystem::create_directory_symlink(tmp.path / "sub", tmp.path / "dirlink");
  EvidenceSource src(tmp.path, "c", "e");

  try {
    src.read_file("link.txt");
    FAIL("expected FileNotFound for symlink read");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::FileNotFound);
  }

  std::string target = src.record_symlink("link.txt");
  CHECK(target == "real.txt");
  auto entry = src.manifest_entry("link.txt");
  REQUIRE(entry.has_value());
  CHECK(entry->kind == "symlink");
  CHECK(entry->symlink_target == "real.txt");

  // a path THROUGH a symlinked directory does not exist in the rooted view
  try {
    src.read_file("dirlink/x.txt");
    FAIL("expected FileNotFound");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::FileNotFound);
  }
}

TEST_CASE("in-memory cap refuses whole-file reads but ranged reads work") {
  TempDir tmp("cap");
  std::string big(4096, 'B');
  write(tmp.path / "big.bin", big);
  EvidenceSource::Options options;
  options.max_in_memory_bytes = 1024;
  EvidenceSource src(tmp.path, "c", "e", options);

  try {
    src.read_file("big.bin");
    FAIL("expected FileTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::FileTooLarge);
  }

  auto range = src.read_range("big.bin", 100, 16);
  CHECK(range.size() == 16);
  CHECK(range[0] == 'B');
  auto entry = src.manifest_entry("big.bin");
  REQUIRE(entry.has_value());  // streamed hash despite the cap
  CHECK(entry->size_bytes == big.size());

  // reads past EOF return the available prefix
  auto tail = src.read_range("big.bin", 4090, 100);
  CHECK(tail.size() == 6);
}

TEST_CASE("manifest JSON format") {
  TempDir tmp("json");
  write(tmp.path / "f.bin", "x");
  EvidenceSource src(tmp.path, "c", "e");
  src.read_file("f.bin");
  auto doc = nlohmann::json::parse(src.manifest_json());
  REQUIRE(doc.is_array());
  REQUIRE(doc.size() == 1);
  CHECK(doc[0].at("path") == "f.bin");
  CHECK(doc[0].at("sha256").get<std::string>().size() == 64);
  CHECK(doc[0].at("size") == 1);
  std::string read_at = doc[0].at("read_at").get<std::string>();
  CHECK(read_at.find('T') != std::string::npos);
  CHECK(read_at.back() == 'Z');
}
