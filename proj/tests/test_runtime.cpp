#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "joinstate/runtime.hpp"

using namespace joinstate;

namespace {

std::string readCorpus(const std::string& name) {
  std::ifstream in(std::string(JOINSTATE_CORPUS_DIR) + "/" + name + ".cob");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Prepared {
  CoreProgram program;
  Report report;
  explicit Prepared(const std::string& src) : program(compile(src)), report(checkProgram(program)) {}
};

std::vector<std::string> mailboxKeys(const Runtime& rt, const std::string& name) {
  std::vector<std::string> out;
  for (auto& o : rt.objects())
    if (o.name == name)
      for (auto& [k, m] : o.mailbox)
        for (size_t i = 0; i < m.count; ++i) out.push_back(m.tag);
  return out;
}

std::multiset<std::string> allMessages(const Runtime& rt) {
  std::multiset<std::string> out;
  for (auto& o : rt.objects())
    for (auto& [k, m] : o.mailbox)
      for (size_t i = 0; i < m.count; ++i) out.insert(std::to_string(o.id) + ":" + k);
  return out;
}

}  // namespace

TEST_CASE("heating the future program") {
  Prepared p(readCorpus("future_deadlock"));
  Runtime rt(p.program, p.report, 1);
  CHECK(mailboxKeys(rt, "future") == std::vector<std::string>{"EMPTY"});
  CHECK(mailboxKeys(rt, "user") == std::vector<std::string>{"READ"});
  auto en = rt.enabledReactions();
  REQUIRE(en.size() == 1);
  CHECK(rt.objects()[en[0].object].name == "user");
  rt.step(en[0]);
  CHECK(rt.enabledReactions().empty());
  auto fut = mailboxKeys(rt, "future");
  std::sort(fut.begin(), fut.end());
  CHECK(fut == std::vector<std::string>{"EMPTY", "Get"});
  CHECK(mailboxKeys(rt, "user") == std::vector<std::string>{"WRITE"});
  // conformant but stuck: no monitor fires, future is deadlocked
  CHECK(rt.violations().empty());
  auto dead = rt.quiescence();
  CHECK(std::find(dead.begin(), dead.end(), "future") != dead.end());
}

TEST_CASE("joined molecule splits into the mailbox") {
  Prepared p("new a : *(A · B) [ A & B |> done ] in a!(A & B)");
  Runtime rt(p.program, p.report, 0);
  CHECK(mailboxKeys(rt, "a").size() == 2);
  REQUIRE(rt.enabledCount() == 1);
  CHECK(rt.stepRandom());
  CHECK(mailboxKeys(rt, "a").empty());
  CHECK(rt.quiescence().empty());
}

TEST_CASE("done heats to an empty soup") {
  Prepared p("done");
  Runtime rt(p.program, p.report, 0);
  CHECK(rt.enabledCount() == 0);
  CHECK(rt.quiescence().empty());
  CHECK(rt.violations().empty());
}

TEST_CASE("selection among identical payloads is collapsed") {
  Prepared p("new a : *G [ G |> done ] in a!G & a!G & a!G");
  Runtime rt(p.program, p.report, 0);
  CHECK(rt.enabledCount() == 1);
  Prepared q("new a : *G(#Number) [ G(n) |> done ] in a!G(1) & a!G(2) & a!G(1)");
  Runtime rq(q.program, q.report, 0);
  CHECK(rq.enabledCount() == 2);
}

TEST_CASE("resolved future replies and keeps its state") {
  Prepared p(readCorpus("future_user"));
  RunOptions ro;
  ro.trace = true;
  RunResult r = run(p.program, p.report, ro);
  CHECK(r.verdict == RunVerdict::Terminated);
  CHECK(r.output == std::vector<std::string>{"42"});
  bool sawResolvedGet = false;
  for (auto& e : r.trace)
    if (e.kind == TraceKind::Fire && e.tags.find("RESOLVED") != std::string::npos &&
        e.tags.find("Get") != std::string::npos)
      sawResolvedGet = true;
  CHECK(sawResolvedGet);
}

TEST_CASE("monitor catches a junk message") {
  Prepared p(readCorpus("extra_b"));
  RunResult r = run(p.program, p.report, {});
  CHECK(r.verdict == RunVerdict::MonitorViolation);
  CHECK(r.violations.size() == 1);
  RunOptions off;
  off.monitors = false;
  CHECK(run(p.program, p.report, off).verdict == RunVerdict::Deadlocked);
}

TEST_CASE("runs are deterministic in the seed") {
  Prepared p(readCorpus("sieve"));
  RunOptions ro;
  ro.seed = 11;
  ro.maxSteps = 3000;
  ro.trace = true;
  RunResult a = run(p.program, p.report, ro), b = run(p.program, p.report, ro);
  REQUIRE(a.trace.size() == b.trace.size());
  for (size_t i = 0; i < a.trace.size(); ++i) CHECK(showTraceLine(a.trace[i]) == showTraceLine(b.trace[i]));
  ro.seed = 12;
  RunResult c = run(p.program, p.report, ro);
  CHECK(c.output.front() == "2");
}

TEST_CASE("message conservation per step") {
  Prepared p(readCorpus("sync_ok"));
  Runtime rt(p.program, p.report, 3);
  while (rt.enabledCount() > 0) {
    auto before = allMessages(rt);
    auto en = rt.enabledReactions();
    const Enabled& choice = en.front();
    size_t consumed = choice.keys.size();
    rt.step(choice);
    auto after = allMessages(rt);
    // everything not consumed survives
    std::multiset<std::string> removed;
    for (auto& k : choice.keys) removed.insert(std::to_string(choice.object) + ":" + k);
    for (auto& m : before)
      if (!removed.count(m)) CHECK(after.count(m) >= 1);
    CHECK(before.size() - consumed <= after.size());
  }
  CHECK(rt.quiescence().empty());
}

TEST_CASE("pi network") {
  Prepared p(readCorpus("pi"));
  RunOptions ro;
  ro.seed = 5;
  RunResult r = run(p.program, p.report, ro);
  CHECK(r.verdict == RunVerdict::Terminated);
  CHECK(r.objectsByType["#Worker"] == 2047);
  REQUIRE(r.output.size() == 1);
  CHECK(std::fabs(std::stod(r.output[0]) - M_PI) <= 4.0 / 2049);
}

TEST_CASE("trace formats") {
  TraceEvent e{3, TraceKind::Fire, "user@3", "READ", "future=future@2"};
  CHECK(showTraceLine(e) == "3\tFire\tuser@3\tREAD\tfuture=future@2");
  CHECK(traceJson({e}).find("\"kind\": \"Fire\"") != std::string::npos);
  CHECK(showNumber(42) == "42");
  CHECK(showNumber(0.5) == "0.5");
}
