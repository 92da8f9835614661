// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <string>

#include "hvacdr/util/io.hpp"

#ifdef HVACDR_CLI_PATH

namespace fs = std::filesystem;
using hvacdr::util::read_text;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(HVACDR_CLI_PATH) + " -q " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh(const std::string& name) {
  auto p = fs::temp_directory_path() / ("hvacdr_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("exit codes") {
    auto out = fresh("codes");
    CHECK(run("schedule --bogus") == 3);
    CHECK(run("train --data " + (out / "missing").string() + " --out " + out.string()) == 4);
    auto cfg = out / "bad.json";
    hvacdr::util::write_text(cfg, "{\"zones\": [9]}");
    CHECK(run("scenario --date 2012-07-04 --config " + cfg.string() + " --out " + (out / "s").string()) == 3);
    CHECK(run("scenario --date 2012-13-45 --out " + (out / "s").string()) == 3);
    fs::remove_all(out);
  }

  TEST_CASE("seeded reruns are byte-identical") {
    auto root = fresh("rerun");
    auto cfg = root / "cfg.json";
    hvacdr::util::write_text(cfg, "{\"season\": {\"first_day\": \"2012-07-01\", \"last_day\": \"2012-07-05\"}}");
    for (const char* d : {"a", "b"}) {
      REQUIRE(run("simulate --seed 4 --config " + cfg.string() + " --out " + (root / d).string()) == 0);
      REQUIRE(run("scenario --date 2012-07-03 --on-peak 2 --config " + cfg.string() + " --out " +
                  (root / d / "scen").string()) == 0);
    }
    int files = 0;
    for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
      if (!e.is_regular_file() || e.path().filename() == "manifest.json") continue;
      auto twin = root / "b" / fs::relative(e.path(), root / "a");
      CHECK(read_text(e.path()) == read_text(twin));
      ++files;
    }
    CHECK(files >= 6);
    fs::remove_all(root);
  }
}

#endif
