#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <json.hpp>

#include "support.hpp"

namespace fs = std::filesystem;
using motseg::testing::read_text;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(MOTSEG_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("cli exit codes") {
  const auto dir = motseg::testing::scratch_dir("cli_codes");
  CHECK(run("--help") == 0);
  CHECK(run("") == 2);
  CHECK(run("trajectory --bogus") == 2);
  CHECK(run("trajectory --out " + (dir / "t.json").string() + " --camera-dir 0,0,0") == 2);
  CHECK(run("trajectory --out " + (dir / "t.json").string() + " --format xml") == 2);
  CHECK(run("simulate " + (dir / "missing.json").string() + " --out " + (dir / "d").string()) == 2);
  CHECK(run("evaluate --pred " + (dir / "none").string() + " --gt " + (dir / "none").string()) == 3);
}

TEST_CASE("trajectory export and rerun from its resolved config") {
  const auto dir = motseg::testing::scratch_dir("cli_traj");
  const auto a = dir / "a.json";
  REQUIRE(run("trajectory --n 31 --ne 7 --camera-dir 0,1,0 --out " + a.string()) == 0);
  const auto poses = nlohmann::json::parse(read_text(a));
  CHECK(poses.size() == 62);
  CHECK(poses[0]["rotation"].size() == 9);

  const auto resolved = nlohmann::json::parse(read_text(dir / "a.json.resolved_config.json"));
  CHECK(resolved["command"] == "trajectory");
  CHECK(resolved["settings"]["n"] == 31);

  const auto b = dir / "b.json";
  REQUIRE(run("trajectory --config " + (dir / "a.json.resolved_config.json").string() + " --out " + b.string()) == 0);
  CHECK(read_text(a) == read_text(b));

  // Unknown settings in a config are rejected.
  auto bad = resolved;
  bad["settings"]["typo"] = 1;
  std::ofstream(dir / "bad.json") << bad.dump();
  CHECK(run("trajectory --config " + (dir / "bad.json").string()) == 2);
  // So is a config written by another command.
  bad = resolved;
  bad["command"] = "simulate";
  std::ofstream(dir / "other.json") << bad.dump();
  CHECK(run("trajectory --config " + (dir / "other.json").string()) == 2);
}

TEST_CASE("simulate writes a dataset reproducible from its config") {
  const auto dir = motseg::testing::scratch_dir("cli_sim");
  REQUIRE(run("simulate --poses 3 --no-companions --out " + (dir / "a").string()) == 0);
  CHECK(fs::exists(dir / "a" / "manifest.json"));
  CHECK(fs::exists(dir / "a" / "scene.json"));
  REQUIRE(run("simulate --config " + (dir / "a" / "resolved_config.json").string() + " --out " + (dir / "b").string()) ==
          0);
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file() || entry.path().filename() == "resolved_config.json") continue;
    const auto other = dir / "b" / fs::relative(entry.path(), dir / "a");
    REQUIRE(fs::exists(other));
    CHECK(read_text(entry.path()) == read_text(other));
    ++compared;
  }
  CHECK(compared > 10);
}
