#include <doctest.h>

#include <fstream>
#include <sstream>

#include "joinstate/oracle.hpp"

using namespace joinstate;

namespace {

TypePtr a() { return msg("a"); }
TypePtr b() { return msg("b"); }

TypeTable futureTable() {
  TypeTable tab;
  tab.define("#Reply", msg("Reply", {number()}));
  tab.define("#FutureT", prod(sum(prod(msg("EMPTY"), msg("Resolve", {number()})), msg("RESOLVED", {number()})),
                              star(msg("Get", {ref("#Reply")}))));
  return tab;
}

Report checked(const CoreProgram& p) { return checkProgram(p); }

std::string readCorpus(const std::string& name) {
  std::ifstream in(std::string(JOINSTATE_CORPUS_DIR) + "/" + name + ".cob");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("subtype oracle examples") {
  TypeTable tab;
  auto no = oracleSubtype(a(), sum(a(), b()), 3, tab);
  CHECK_FALSE(no.holds);
  REQUIRE(no.counterexample);
  CHECK(showConfig(*no.counterexample) == "⟨b⟩");
  CHECK(oracleSubtype(sum(a(), b()), a(), 3, tab).holds);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    TypeGenSpec g;
    g.seed = seed;
    g.recursionProb = 0.3;
    RandomType t = randomType(g);
    CHECK(oracleSubtype(t.type, t.type, 4, t.table).holds);
  }
}

TEST_CASE("liveness oracle examples") {
  TypeTable tab = futureTable();
  CHECK_FALSE(oracleLive(ref("#FutureT"), {{"EMPTY", "Resolve"}, {"Get", "RESOLVED"}}, 5, tab));
  auto v = oracleLive(msg("m", {msg("Reply", {number()})}), {{"m", "m"}}, 3, tab);
  REQUIRE(v);
  CHECK(v->size() == 1);
  CHECK_FALSE(oracleLive(one(), {}, 5, tab));
}

TEST_CASE("random types") {
  TypeGenSpec leaf;
  leaf.seed = 1;
  leaf.maxDepth = 0;
  TypePtr t = randomType(leaf).type;
  CHECK((t->kind == Kind::Zero || t->kind == Kind::One || (t->kind == Kind::Msg && t->arity() == 0)));
  TypeGenSpec g;
  g.seed = 77;
  g.maxDepth = 4;
  g.recursionProb = 0.3;
  CHECK(randomType(g).type->key == randomType(g).type->key);
  for (uint64_t s = 0; s < 1000; ++s) {
    g.seed = s;
    RandomType r = randomType(g);
    CHECK_NOTHROW(r.table.resolve());
  }
}

TEST_CASE("property suite, small sample") {
  PropertyReport r = runPropertySuite(60, 9);
  for (auto& l : r.laws) {
    CAPTURE(l.law);
    CHECK(l.failed == 0);
  }
  CHECK(r.subtype.unreviewed == 0);
  CHECK(r.live.unreviewed == 0);
  CHECK(r.parikhFailed == 0);
  CHECK(r.ok());
}

TEST_CASE("schedule fuzzing") {
  CoreProgram user = compile(readCorpus("future_user"));
  Report ru = checked(user);
  FuzzOptions fo;
  fo.seeds = 100;
  FuzzSummary s = fuzzSchedules(user, ru, fo);
  CHECK(s.ok);
  CHECK(s.verdicts["Terminated"] == 100);
  CHECK(s.violations == 0);

  CoreProgram dead = compile(readCorpus("future_deadlock"));
  Report rd = checked(dead);
  fo.expectViolation = true;
  FuzzSummary d = fuzzSchedules(dead, rd, fo);
  CHECK(d.ok);
  CHECK(d.verdicts["Deadlocked"] == 100);
}
