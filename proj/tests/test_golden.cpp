#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "joinstate/runtime.hpp"

using namespace joinstate;
namespace fs = std::filesystem;

// Every corpus program has a manifest under expected/ with its checker
// verdict, diagnostic codes and one seeded run.
TEST_CASE("golden corpus") {
  const fs::path dir(JOINSTATE_CORPUS_DIR);
  size_t seen = 0;
  for (auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".cob") continue;
    ++seen;
    const std::string name = entry.path().stem().string();
    CAPTURE(name);
    std::ifstream src(entry.path()), man(dir / "expected" / (name + ".json"));
    REQUIRE(man.good());
    std::stringstream ss;
    ss << src.rdbuf();
    nlohmann::json want = nlohmann::json::parse(man);

    CoreProgram p = compile(ss.str());
    Report rep = checkProgram(p);
    CHECK((rep.accepted ? "accepted" : "rejected") == want["verdict"].get<std::string>());
    CHECK(rep.codes() == want["codes"].get<std::vector<std::string>>());

    const auto& w = want["run"];
    RunOptions ro;
    ro.seed = w["seed"].get<uint64_t>();
    ro.maxSteps = w["maxSteps"].get<size_t>();
    RunResult r = run(p, rep, ro);
    CHECK(runVerdictName(r.verdict) == w["verdict"].get<std::string>());
    if (w.contains("deadlocked")) CHECK(r.deadlocked == w["deadlocked"].get<std::vector<std::string>>());
    if (w.contains("steps")) CHECK(r.steps == w["steps"].get<size_t>());
    if (w.contains("output")) CHECK(r.output == w["output"].get<std::vector<std::string>>());
    if (w.contains("outputPrefix")) {
      auto prefix = w["outputPrefix"].get<std::vector<std::string>>();
      REQUIRE(r.output.size() >= prefix.size());
      CHECK(std::equal(prefix.begin(), prefix.end(), r.output.begin()));
    }
  }
  CHECK(seen == 12);
}
