#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "lipbesov/commands.hpp"
#include "lipbesov/io.hpp"

using namespace lipbesov;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const char* env = std::getenv("LIPBESOV_SCRATCH");
  fs::path root = env ? fs::path(env) : fs::temp_directory_path() / "lipbesov_cli";
  fs::path dir = root / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Run {
  int status;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "lipbesov");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

}  // namespace

TEST_CASE("norm compute on a constant field prints 0") {
  const fs::path dir = scratch("norm_const");
  const fs::path cfg = dir / "c.json";
  write_atomic(cfg.string(),
               dump_json(Json{{"space", {{"size", 65}}}, {"field", {{"kind", "constant"}, {"value", 3.0}}}}));
  const Run r = run({"norm", "compute", "--config", cfg.string(), "--variant", "besov",
                     "--out-dir", (dir / "out").string()});
  CHECK(r.status == kExitOk);
  CHECK(r.out == "0\n");
  CHECK(fs::exists(dir / "out" / "norm.json"));
  CHECK(fs::exists(dir / "out" / "timing.json"));
}

TEST_CASE("tampered cube dump exits 2 naming the point") {
  const fs::path dir = scratch("tamper");
  const std::string out = (dir / "out").string();
  const Run built = run({"cubes", "build", "--set", "space.size=65", "--out-dir", out});
  REQUIRE(built.status == kExitOk);
  Json dump = read_json((dir / "out" / "cubes.json").string());
  auto& cubes = dump["levels"][3]["cubes"];
  REQUIRE(cubes.size() >= 2);
  auto& from = cubes[0]["members"];
  int moved = -1;
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (from[i] != cubes[0]["center"]) {
      moved = from[i].get<int>();
      from.erase(i);
      break;
    }
  }
  REQUIRE(moved >= 0);
  cubes[1]["members"].push_back(moved);
  const fs::path bad = dir / "bad.json";
  write_atomic(bad.string(), dump_json(dump));
  const Run r = run({"cubes", "verify", "--set", "space.size=65", "--dump", bad.string(),
                     "--out-dir", out});
  CHECK(r.status == kExitViolation);
  CHECK((r.out + r.err).find("point " + std::to_string(moved)) != std::string::npos);

  const Run ok = run({"cubes", "verify", "--set", "space.size=65", "--dump",
                      (dir / "out" / "cubes.json").string(), "--out-dir", out});
  CHECK(ok.status == kExitOk);
}

TEST_CASE("usage and format errors exit 1") {
  const fs::path dir = scratch("errors");
  const std::string out = (dir / "out").string();
  CHECK(run({"space", "build", "--set", "space.bogus=1", "--out-dir", out}).status == kExitUsage);
  CHECK(run({"nonsense"}).status == kExitUsage);
  const Run r = run({"lab", "equivalence", "--set", "space.size=65", "--set", "norm.p=0.5",
                     "--out-dir", out});
  CHECK(r.status == kExitUsage);
  CHECK(r.err.find("hypothesis") != std::string::npos);
}

TEST_CASE("reruns are byte-identical and the effective config reproduces the run") {
  const fs::path dir = scratch("determinism");
  const std::string a = (dir / "a").string(), b = (dir / "b").string(), c = (dir / "c").string();
  // The fitted eta at n = 65 sits just below the default beta = gamma = 0.9.
  const std::vector<std::string> base = {"lab",           "equivalence",        "--set",
                                         "space.size=65", "lab.ensemble.seed=9", "norm.beta=0.8",
                                         "norm.gamma=0.8"};
  auto with_out = [&](const std::string& o) {
    auto v = base;
    v.push_back("--out-dir");
    v.push_back(o);
    return v;
  };
  REQUIRE(run(with_out(a)).status == kExitOk);
  REQUIRE(run(with_out(b)).status == kExitOk);
  for (const char* f : {"equivalence.json", "equivalence.csv"}) {
    CHECK(read_text((fs::path(a) / f).string()) == read_text((fs::path(b) / f).string()));
  }
  // Reload the emitted config; only output.dir differs.
  const Run r = run({"lab", "equivalence", "--config", (fs::path(a) / "effective_config.json").string(),
                     "--out-dir", c});
  REQUIRE(r.status == kExitOk);
  CHECK(read_text((fs::path(a) / "equivalence.json").string()) ==
        read_text((fs::path(c) / "equivalence.json").string()));

  // Thread count does not change results.
  const std::string d = (dir / "d").string();
  auto threaded = with_out(d);
  threaded.push_back("--threads");
  threaded.push_back("3");
  REQUIRE(run(threaded).status == kExitOk);
  CHECK(read_text((fs::path(a) / "equivalence.json").string()) ==
        read_text((fs::path(d) / "equivalence.json").string()));
}
