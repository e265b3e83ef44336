// Acceptance criteria: one PASS/FAIL line each, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "joinstate/oracle.hpp"

using namespace joinstate;

namespace {

// Pinned tolerances and budgets.
constexpr double kRejectSeconds = 1.0;
constexpr double kAcceptSeconds = 5.0;
constexpr double kPiSecondsPerSeed = 10.0;
constexpr double kPiTolerance = 4.0 / 2049;
constexpr double kPiAgreement = 1e-9;  // runtime sum vs direct summation
constexpr size_t kPiSeeds = 20;
constexpr size_t kWorkers = 2047;
constexpr size_t kSieveSteps = 20000;
constexpr size_t kFuzzSeeds = 100;
constexpr size_t kFuzzSieveSteps = 2000;  // the sieve never terminates
constexpr double kFuzzSeconds = 120.0;
constexpr size_t kPreserveSeeds = 10;
constexpr size_t kPreserveSteps = 200;
constexpr double kPreserveSeconds = 120.0;
constexpr size_t kPropertySamples = 500;
constexpr size_t kOracleBound = 6;
constexpr double kPropertySeconds = 120.0;

const char* kRejected[][2] = {
    {"future_deadlock", "IncompatibleDeps"},  {"missing_b", "ProtocolViolation"},
    {"extra_b", "ProtocolViolation"},         {"mutual", "IncompatibleDeps"},
    {"self_dependency", "SelfDependency"},    {"duplicate_argument", "DuplicateArgument"},
    {"duplicated_dependency", "IncompatibleDeps"}, {"sync_deadlock", "IncompatibleDeps"},
};
const char* kAccepted[] = {"future_user", "sync_ok", "pi", "sieve"};

std::string corpusDir = JOINSTATE_CORPUS_DIR;

std::string readCorpus(const std::string& name) {
  std::ifstream in(corpusDir + "/" + name + ".cob");
  if (!in) throw std::runtime_error("missing corpus file " + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

int failures = 0;

void criterion(int n, const std::string& title, const std::function<std::string(std::string&)>& body) {
  auto t0 = Clock::now();
  std::string detail;
  std::string problem;
  try {
    problem = body(detail);
  } catch (const std::exception& e) {
    problem = std::string("exception: ") + e.what();
  }
  double secs = since(t0);
  bool ok = problem.empty();
  if (!ok) ++failures;
  std::printf("%s %d %s (%.2f s)%s%s\n", ok ? "PASS" : "FAIL", n, title.c_str(), secs,
              detail.empty() ? "" : " - ", detail.c_str());
  if (!ok) std::printf("     %s\n", problem.c_str());
  std::fflush(stdout);
}

struct Prepared {
  CoreProgram program;
  Report report;
};

Prepared prepare(const std::string& name) {
  Prepared p{compile(readCorpus(name)), {}};
  p.report = checkProgram(p.program);
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) corpusDir = argv[1];

  criterion(1, "ill-typed corpus rejected with expected codes", [](std::string& detail) -> std::string {
    auto t0 = Clock::now();
    std::string bad;
    for (auto& c : kRejected) {
      Report r = prepare(c[0]).report;
      if (r.accepted || r.codes() != std::vector<std::string>{c[1]}) bad += std::string(" ") + c[0];
    }
    double s = since(t0);
    detail = std::to_string(std::size(kRejected)) + " programs";
    if (!bad.empty()) return "wrong verdict or codes:" + bad;
    if (s >= kRejectSeconds) return "took " + std::to_string(s) + " s";
    return "";
  });

  criterion(2, "well-typed corpus accepted", [](std::string& detail) -> std::string {
    auto t0 = Clock::now();
    std::string bad;
    for (auto* name : kAccepted) {
      Report r = prepare(name).report;
      if (!r.accepted) bad += std::string(" ") + name + "(" + showDiagnostic(r.diagnostics.front()) + ")";
    }
    double s = since(t0);
    detail = std::to_string(std::size(kAccepted)) + " programs";
    if (!bad.empty()) return "rejected:" + bad;
    if (s >= kAcceptSeconds) return "took " + std::to_string(s) + " s";
    return "";
  });

  criterion(3, "pi network terminates with 2047 workers near pi", [](std::string& detail) -> std::string {
    double direct = 0;
    for (int n = 0; n < 1024; ++n) direct += 4.0 * (n % 2 ? -1 : 1) / (2.0 * n + 1);
    if (std::fabs(direct - M_PI) > kPiTolerance) return "direct summation outside the remainder bound";
    Prepared p = prepare("pi");
    double worst = 0, slowest = 0;
    for (size_t seed = 0; seed < kPiSeeds; ++seed) {
      auto t0 = Clock::now();
      RunOptions ro;
      ro.seed = seed;
      RunResult r = run(p.program, p.report, ro);
      slowest = std::max(slowest, since(t0));
      if (r.verdict != RunVerdict::Terminated) return "seed " + std::to_string(seed) + ": " + runVerdictName(r.verdict);
      if (r.objectsByType["#Worker"] != kWorkers)
        return "seed " + std::to_string(seed) + ": " + std::to_string(r.objectsByType["#Worker"]) + " workers";
      if (r.output.size() != 1) return "seed " + std::to_string(seed) + ": expected a single print";
      double v = std::stod(r.output[0]);
      if (std::fabs(v - M_PI) > kPiTolerance) return "value " + r.output[0] + " too far from pi";
      worst = std::max(worst, std::fabs(v - direct));
    }
    char buf[120];
    std::snprintf(buf, sizeof buf, "%zu seeds, |v - direct sum| <= %.1e, slowest %.2f s", kPiSeeds, worst, slowest);
    detail = buf;
    if (worst > kPiAgreement) return "runtime disagrees with direct summation";
    if (slowest >= kPiSecondsPerSeed) return "a seed took " + std::to_string(slowest) + " s";
    return "";
  });

  criterion(4, "sieve prints 2 3 5 7 11 and keeps running", [](std::string& detail) -> std::string {
    Prepared p = prepare("sieve");
    RunOptions ro;
    ro.seed = 1;
    ro.maxSteps = kSieveSteps;
    RunResult r = run(p.program, p.report, ro);
    std::string out;
    for (size_t i = 0; i < r.output.size() && i < 8; ++i) out += (i ? " " : "") + r.output[i];
    detail = "prints " + out + " ...";
    const std::vector<std::string> want = {"2", "3", "5", "7", "11"};
    if (r.output.size() < want.size() || !std::equal(want.begin(), want.end(), r.output.begin()))
      return "unexpected output";
    if (r.verdict != RunVerdict::StepBudgetExhausted) return "verdict " + runVerdictName(r.verdict);
    return "";
  });

  criterion(5, "derivative facts hold exactly", [](std::string& detail) -> std::string {
    Prepared p = prepare("future_deadlock");
    const TypeTable& tab = p.program.table;
    Engine e(tab);
    TypePtr fut = ref("#FutureT");
    TypePtr d1 = derivativeConfig(fut, {"EMPTY", "Get"}, tab);
    TypePtr want1 = prod(msg("Resolve", {number()}), star(msg("Get", {ref("#Reply")})));
    TypePtr ab = star(prod(msg("A"), msg("B")));
    TypePtr d2 = derivative(ab, "B", tab);
    TypePtr want2 = prod(msg("A"), ab);
    TypePtr d3 = derivativeConfig(fut, {"RESOLVED"}, tab);
    SubtypeResult r1 = e.equivalent(d1, want1), r2 = e.equivalent(d2, want2);
    detail = "#FutureT[EMPTY,Get] = " + show(d1) + "; (*(A.B))[B] = " + show(d2) + "; #FutureT[RESOLVED] = " + show(d3);
    if (r1.verdict != Verdict::Yes) return "first equivalence: " + showVerdict(r1);
    if (!usable(d1, tab) || !relevant(d1, tab)) return "#FutureT[EMPTY,Get] should be usable and relevant";
    if (r2.verdict != Verdict::Yes) return "second equivalence: " + showVerdict(r2);
    if (relevant(d3, tab)) return "#FutureT[RESOLVED] should be irrelevant";
    return "";
  });

  criterion(6, "schedule fuzzing finds no violation or deadlock", [](std::string& detail) -> std::string {
    auto t0 = Clock::now();
    size_t runs = 0, violations = 0, deadlocks = 0;
    for (auto* name : kAccepted) {
      Prepared p = prepare(name);
      FuzzOptions fo;
      fo.seeds = kFuzzSeeds;
      fo.maxSteps = std::string(name) == "sieve" ? kFuzzSieveSteps : 100000;
      FuzzSummary s = fuzzSchedules(p.program, p.report, fo);
      runs += s.runs;
      violations += s.violations + (s.verdicts.count("MonitorViolation") ? s.verdicts["MonitorViolation"] : 0);
      deadlocks += s.verdicts.count("Deadlocked") ? s.verdicts["Deadlocked"] : 0;
      if (std::string(name) == "pi" && s.outputs.size() != 1) return "pi printed different values across seeds";
    }
    double secs = since(t0);
    detail = std::to_string(runs) + " runs, " + std::to_string(violations) + " violations, " +
             std::to_string(deadlocks) + " deadlocks";
    if (violations || deadlocks) return "monitors fired on an accepted program";
    if (secs >= kFuzzSeconds) return "took " + std::to_string(secs) + " s";
    return "";
  });

  criterion(7, "every visited state re-types", [](std::string& detail) -> std::string {
    auto t0 = Clock::now();
    size_t states = 0, bad = 0;
    for (auto* name : kAccepted) {
      Prepared p = prepare(name);
      FuzzOptions fo;
      fo.seeds = kPreserveSeeds;
      fo.maxSteps = kPreserveSteps;
      fo.checkSolutions = true;
      FuzzSummary s = fuzzSchedules(p.program, p.report, fo);
      states += s.solutionStates;
      bad += s.solutionFailures;
    }
    double secs = since(t0);
    detail = std::to_string(states) + " states, " + std::to_string(bad) + " failures";
    if (bad) return "some state does not re-type";
    if (secs >= kPreserveSeconds) return "took " + std::to_string(secs) + " s";
    return "";
  });

  criterion(8, "algebra laws and oracle agreement", [](std::string& detail) -> std::string {
    auto t0 = Clock::now();
    PropertyReport r = runPropertySuite(kPropertySamples, 2024, kOracleBound);
    double secs = since(t0);
    size_t checks = 0, failed = 0;
    std::string which;
    for (auto& l : r.laws) {
      checks += l.checked;
      failed += l.failed;
      if (l.failed) which += " [" + l.law + "]";
    }
    detail = std::to_string(checks) + " law checks, " + std::to_string(r.subtype.pairs) + " subtype and " +
             std::to_string(r.live.pairs) + " liveness comparisons, " + std::to_string(r.parikhChecked) +
             " membership checks; logged: " + std::to_string(r.subtype.beyondBound + r.live.beyondBound) +
             " beyond bound, " + std::to_string(r.subtype.inconclusive) + " inconclusive";
    if (failed) return "law failures:" + which;
    if (r.subtype.unreviewed || r.live.unreviewed) {
      std::string log;
      for (auto& l : r.subtype.log) log += "\n     " + l;
      for (auto& l : r.live.log) log += "\n     " + l;
      return "engine and oracle disagree" + log;
    }
    if (r.parikhFailed) return "Parikh membership disagrees with enumeration";
    if (secs >= kPropertySeconds) return "took " + std::to_string(secs) + " s";
    return "";
  });

  return failures ? 1 : 0;
}
