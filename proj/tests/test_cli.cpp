#include <doctest.h>

#include "test_support.hpp"

using testsupport::TempDir;
using testsupport::cli_path;
using testsupport::fixture_dir;
using testsupport::run_command;

namespace {

std::string tree(const char* name) {
  return (fixture_dir() / "trees" / name).string();
}

}  // namespace

TEST_CASE("scan: seeded tree summary, empty tree exit 3, bad root exit 2") {
  auto ok = run_command(cli_path() + " scan --root " + tree("accept"));
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("Users/Alice/AppData/Roaming/Kodi\tWindows") != std::string::npos);
  CHECK(ok.out.find("27") != std::string::npos);

  auto empty = run_command(cli_path() + " scan --root " + tree("empty"));
  CHECK(empty.exit_code == 3);
  CHECK(empty.out.find("no Kodi installations found") != std::string::npos);

  auto bad = run_command(cli_path() + " scan --root /no/such/evidence/root");
  CHECK(bad.exit_code == 2);
}

TEST_CASE("extract: artifacts per installation, --no-carve drops carved records") {
  TempDir out("extract");
  auto r = run_command(cli_path() + " extract --root " + tree("crossref") + " --out " +
                       (out.path / "a").string());
  CHECK(r.exit_code == 0);
  auto doc = testsupport::read_json(out.path / "a" / "artifacts_000.json");
  bool carved_present = false;
  for (const auto& db : doc.at("databases"))
    if (db.contains("addons"))
      for (const auto& a : db.at("addons"))
        if (a.at("liveness") != "live") carved_present = true;
  CHECK(carved_present);
  CHECK(std::filesystem::exists(out.path / "a" / "manifest.json"));

  auto r2 = run_command(cli_path() + " extract --root " + tree("crossref") + " --out " +
                        (out.path / "b").string() + " --no-carve");
  CHECK(r2.exit_code == 0);
  auto doc2 = testsupport::read_json(out.path / "b" / "artifacts_000.json");
  for (const auto& db : doc2.at("databases"))
    if (db.contains("addons"))
      for (const auto& a : db.at("addons")) CHECK(a.at("liveness") == "live");
}

TEST_CASE("extract: one artifacts file per installation") {
  TempDir out("multi");
  auto r = run_command(cli_path() + " extract --root " + tree("accept") + " --out " +
                       out.path.string());
  CHECK(r.exit_code == 0);
  CHECK(std::filesystem::exists(out.path / "artifacts_000.json"));
  CHECK(std::filesystem::exists(out.path / "artifacts_003.json"));
  CHECK(!std::filesystem::exists(out.path / "artifacts_004.json"));
}

TEST_CASE("report: formats, warning on stderr, refusal to write into evidence") {
  TempDir out("report");
  auto r = run_command(cli_path() + " report --root " + tree("single_log") + " --out " +
                       out.path.string() +
                       " --formats json,csv --fixed-clock 2024-01-01T00:00:00Z");
  CHECK(r.exit_code == 0);
  CHECK(std::filesystem::exists(out.path / "report.json"));
  CHECK(std::filesystem::exists(out.path / "report.csv"));
  CHECK(!std::filesystem::exists(out.path / "report.html"));
  CHECK(std::filesystem::exists(out.path / "manifest.json"));
  // single-log preservation warning reaches the examiner
  CHECK(r.out.find("previous session log absent") != std::string::npos);

  auto refused = run_command(cli_path() + " report --root " + tree("single_log") +
                             " --out " + tree("single_log") + "/outputs");
  CHECK(refused.exit_code == 2);
  CHECK(refused.out.find("must not be inside") != std::string::npos);

  auto badfmt = run_command(cli_path() + " report --root " + tree("single_log") +
                            " --out " + (out.path / "x").string() + " --formats yaml");
  CHECK(badfmt.exit_code == 2);
}

TEST_CASE("timeline subcommand prints canonical JSON to stdout") {
  auto r = run_command(cli_path() + " timeline --root " + tree("crossref") +
                       " --fixed-clock 2024-01-01T00:00:00Z 2>/dev/null");
  CHECK(r.exit_code == 0);
  auto doc = nlohmann::json::parse(r.out);
  REQUIRE(doc.is_array());
  CHECK(!doc.empty());
  bool saw_uninstall = false;
  for (const auto& e : doc)
    if (e.at("subject") == "script.module.uninstalled" &&
        e.at("liveness") == "carved_freeblock")
      saw_uninstall = true;
  CHECK(saw_uninstall);
}

TEST_CASE("end-to-end determinism and evidence immutability") {
  TempDir out("determinism");
  std::string root = tree("accept");
  std::string before = testsupport::hash_tree(root);

  auto r1 = run_command(cli_path() + " report --root " + root + " --out " +
                        (out.path / "run1").string() +
                        " --formats json,csv,html --fixed-clock 2024-01-01T00:00:00Z");
  auto r2 = run_command(cli_path() + " report --root " + root + " --out " +
                        (out.path / "run2").string() +
                        " --formats json,csv,html --fixed-clock 2024-01-01T00:00:00Z");
  CHECK(r1.exit_code == 0);
  CHECK(r2.exit_code == 0);

  for (const char* name : {"report.json", "report.csv", "report.html", "manifest.json"}) {
    auto a = testsupport::read_bytes(out.path / "run1" / name);
    auto b = testsupport::read_bytes(out.path / "run2" / name);
    CHECK_MESSAGE(a == b, name << " differs between runs");
  }

  std::string after = testsupport::hash_tree(root);
  CHECK(before == after);
}
