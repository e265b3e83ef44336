// joinstate: check, run, explain and fuzz join-calculus programs.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "joinstate/checker.hpp"
#include "joinstate/oracle.hpp"
#include "joinstate/runtime.hpp"

using namespace joinstate;

namespace {

enum Exit { kOk = 0, kRejected = 1, kMonitor = 2, kDeadlock = 3, kBudget = 4, kUsage = 64, kData = 65 };

struct Loaded {
  CoreProgram program;
  Report report;
};

bool load(const std::string& path, int bound, Loaded& out, int& exitCode) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "joinstate: cannot open " << path << "\n";
    exitCode = kUsage;
    return false;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    out.program = compile(ss.str());
  } catch (const FrontendError& e) {
    std::cerr << path << ":" << e.what() << "\n";
    exitCode = kData;
    return false;
  } catch (const TypeError& e) {
    std::cerr << path << ": " << e.what() << "\n";
    exitCode = kData;
    return false;
  }
  out.report = checkProgram(out.program, bound);
  return true;
}

void printDiagnostics(const std::string& path, const Report& r) {
  for (auto& d : r.diagnostics) std::cerr << path << ":" << showDiagnostic(d) << "\n";
}

uint64_t defaultSeed() {
  const char* env = std::getenv("JOINSTATE_SEED");
  if (!env) return 0;
  try {
    return std::stoull(env);
  } catch (const std::exception&) {
    return 0;
  }
}

std::string patternsText(const std::vector<TagMultiset>& X) {
  std::string s = "{";
  for (size_t i = 0; i < X.size(); ++i) {
    s += i ? ", ⟨" : "⟨";
    for (size_t j = 0; j < X[i].size(); ++j) s += (j ? ", " : "") + X[i][j];
    s += "⟩";
  }
  return s + "}";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Type checker and chemical runtime for typed join-calculus programs"};
  app.require_subcommand(1);

  std::string file;
  int bound = 4;
  bool json = false;
  uint64_t seed = defaultSeed();
  size_t maxSteps = 100000;
  bool noTypecheck = false;
  std::string monitors = "on";
  std::string traceJsonPath;
  bool trace = false;
  bool showParikhSets = false;
  bool showDepsBlocks = false;
  size_t seeds = 100;
  bool solutions = false;
  bool expectViolation = false;

  auto* check = app.add_subcommand("check", "type-check a program");
  auto* runCmd = app.add_subcommand("run", "type-check, then execute a program");
  auto* explain = app.add_subcommand("explain", "print types, patterns, liveness and dependencies");
  auto* fuzz = app.add_subcommand("fuzz", "run many seeded schedules with monitors on");
  for (auto* c : {check, runCmd, explain, fuzz}) {
    c->add_option("file", file, "program source")->required();
    c->add_option("--bound", bound, "enumeration bound for the subtype fallback")->check(CLI::Range(0, 64));
    c->add_flag("--json", json, "machine-readable output");
  }
  for (auto* c : {runCmd, fuzz}) {
    c->add_option("--seed", seed, "scheduler seed (default $JOINSTATE_SEED or 0)");
    c->add_option("--max-steps", maxSteps, "step budget");
  }
  runCmd->add_flag("--no-typecheck", noTypecheck, "run even if the checker rejects the program");
  runCmd->add_option("--monitors", monitors, "conformance monitor")->check(CLI::IsMember({"on", "off"}));
  runCmd->add_option("--trace-json", traceJsonPath, "write the trace as JSON");
  runCmd->add_flag("--trace", trace, "print the trace to standard error");
  explain->add_flag("--parikh", showParikhSets, "print Parikh images");
  explain->add_flag("--deps", showDepsBlocks, "print dependency blocks");
  fuzz->add_option("--seeds", seeds, "number of schedules");
  fuzz->add_flag("--solutions", solutions, "re-type every intermediate state");
  fuzz->add_flag("--expect-violation", expectViolation, "the program is expected to be rejected");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  Loaded L;
  int code = kOk;
  if (!load(file, bound, L, code)) return code;
  const Report& rep = L.report;

  if (check->parsed()) {
    if (json)
      std::cout << reportJson(rep) << "\n";
    else if (rep.accepted)
      std::cout << file << ": accepted\n";
    printDiagnostics(file, rep);
    return rep.accepted ? kOk : kRejected;
  }

  if (explain->parsed()) {
    Engine engine(L.program.table, bound);
    nlohmann::json out = nlohmann::json::object();
    out["objects"] = nlohmann::json::array();
    for (auto& o : rep.objects) {
      nlohmann::json j = {{"name", o.name}, {"line", o.pos.line}, {"type", o.type},
                          {"patterns", o.patterns}, {"live", o.live}};
      std::vector<std::string> parikhLines;
      if (showParikhSets) {
        for (auto& [node, so] : rep.statics)
          if (node->name.text == o.name && node->pos.line == o.pos.line && show(so.type) == o.type) {
            parikhLines = showParikh(engine.parikhOf(so.type));
            break;
          }
        j["parikh"] = parikhLines;
      }
      out["objects"].push_back(j);
      if (!json) {
        std::cout << o.name << " (line " << o.pos.line << ") : " << o.type << "\n";
        std::cout << "  patterns " << patternsText(o.patterns) << "\n";
        std::cout << "  live " << (o.live ? "yes" : "no") << "\n";
        for (auto& l : parikhLines) std::cout << "  parikh " << l << "\n";
      }
    }
    if (showDepsBlocks) {
      out["dependencies"] = nlohmann::json::array();
      for (auto& [where, blocks] : rep.dependencies) {
        out["dependencies"].push_back({{"where", where}, {"blocks", blocks}});
        if (!json) std::cout << "deps " << where << ": " << blocks << "\n";
      }
    }
    out["verdict"] = rep.accepted ? "accepted" : "rejected";
    if (json) std::cout << out.dump(2) << "\n";
    printDiagnostics(file, rep);
    return kOk;
  }

  if (fuzz->parsed()) {
    if (!rep.accepted && !expectViolation) {
      printDiagnostics(file, rep);
      std::cerr << file << ": rejected by the checker; pass --expect-violation to fuzz it anyway\n";
      return kRejected;
    }
    FuzzOptions fo;
    fo.seeds = seeds;
    fo.firstSeed = seed;
    fo.maxSteps = maxSteps;
    fo.checkSolutions = solutions;
    fo.expectViolation = expectViolation;
    FuzzSummary s;
    try {
      s = fuzzSchedules(L.program, rep, fo);
    } catch (const RuntimeError& e) {
      std::cerr << file << ": runtime error: " << e.what() << "\n";
      return kRejected;
    }
    std::cout << fuzzJson(s) << "\n";
    return s.ok ? kOk : kRejected;
  }

  // run
  if (!rep.accepted) {
    printDiagnostics(file, rep);
    if (!noTypecheck) return kRejected;
  }
  RunOptions ro;
  ro.seed = seed;
  ro.maxSteps = maxSteps;
  ro.monitors = monitors == "on";
  ro.trace = trace || !traceJsonPath.empty();
  RunResult r;
  try {
    r = run(L.program, rep, ro);
  } catch (const RuntimeError& e) {
    std::cerr << file << ": runtime error: " << e.what() << "\n";
    return kRejected;
  }
  if (trace)
    for (auto& e : r.trace) std::cerr << showTraceLine(e) << "\n";
  if (!traceJsonPath.empty()) {
    std::ofstream tj(traceJsonPath);
    tj << traceJson(r.trace) << "\n";
  }
  if (json) {
    nlohmann::json j = {{"verdict", runVerdictName(r.verdict)},
                        {"steps", r.steps},
                        {"output", r.output},
                        {"deadlocked", r.deadlocked},
                        {"violations", r.violations},
                        {"objectsCreated", r.objectsCreated},
                        {"objectsByType", r.objectsByType}};
    std::cout << j.dump(2) << "\n";
  } else {
    for (auto& line : r.output) std::cout << line << "\n";
    std::cerr << "verdict: " << runVerdictName(r.verdict) << " after " << r.steps << " steps";
    if (!r.deadlocked.empty()) {
      std::cerr << " (";
      for (size_t i = 0; i < r.deadlocked.size(); ++i) std::cerr << (i ? ", " : "") << r.deadlocked[i];
      std::cerr << ")";
    }
    std::cerr << "\n";
    for (auto& v : r.violations) std::cerr << "violation: " << v << "\n";
  }
  switch (r.verdict) {
    case RunVerdict::Terminated: return kOk;
    case RunVerdict::Deadlocked: return kDeadlock;
    case RunVerdict::StepBudgetExhausted: return kBudget;
    case RunVerdict::MonitorViolation: return kMonitor;
  }
  return kOk;
}
