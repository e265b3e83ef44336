#include <fstream>
#include <sstream>

#include "doctest.h"
#include "joinstate/syntax.hpp"

using namespace joinstate;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string corpus(const std::string& name) { return slurp(std::string(JOINSTATE_CORPUS_DIR) + "/" + name); }

const char* const kAll[] = {"future_deadlock.cob", "missing_b.cob",      "extra_b.cob",
                            "mutual.cob",          "self_dependency.cob", "duplicate_argument.cob",
                            "duplicated_dependency.cob", "sync_deadlock.cob", "sync_ok.cob",
                            "future_user.cob",     "pi.cob",             "sieve.cob"};

}  // namespace

TEST_CASE("smallest program") {
  auto p = parseProgram("done");
  CHECK(p.body->kind == ProcKind::Done);
  CHECK(p.decls.empty());
}

TEST_CASE("future listing parses to two objects in parallel") {
  auto p = parseProgram(corpus("future_deadlock.cob"));
  CHECK(p.decls.size() == 4);
  REQUIRE(p.body->kind == ProcKind::New);
  auto body = p.body->kids[0];
  REQUIRE(body->kind == ProcKind::Par);
  CHECK(body->kids[1]->kind == ProcKind::New);
  CHECK(body->kids[1]->kids[0]->kind == ProcKind::Send);
}

TEST_CASE("worker listing") {
  auto p = parseProgram(corpus("pi.cob"));
  REQUIRE(p.body->kind == ProcKind::Class);
  CHECK(p.body->rules.size() == 1);
  auto ctor = p.body->rules[0].body;
  REQUIRE(ctor->kind == ProcKind::New);
  CHECK(ctor->kids[0]->kind == ProcKind::If);
  auto c = countNodes(p.body);
  CHECK(c.blocks == 2);
  CHECK(c.syncCalls == 2);
}

TEST_CASE("type declarations") {
  auto sieve = parseProgram(corpus("sieve.cob"));
  auto tab = resolveTypes(sieve.decls);
  CHECK(tab.defs().size() == 5);
  CHECK_THROWS_AS(compile("type #T = #T + A\ndone"), FrontendError);
  CHECK_NOTHROW(compile("type #T = m(#T)\ndone"));
  CHECK_THROWS_AS(compile("type #T = A\nand #T = B\ndone"), FrontendError);
  CHECK_THROWS_AS(compile("type #T = #U\ndone"), FrontendError);
  CHECK_THROWS_AS(compile("type #T = A(1) + A\ndone"), FrontendError);
}

TEST_CASE("syntax errors carry positions") {
  try {
    parseProgram("new x : A [ A |> done ]\n  in x!A &");
    FAIL("expected a parse error");
  } catch (const FrontendError& e) {
    CHECK(e.pos.line == 2);
  }
  CHECK_THROWS_AS(parseProgram("x!A $ y!B"), FrontendError);
  CHECK_THROWS_AS(compile("x!A"), FrontendError);
  CHECK_THROWS_AS(compile("new o : *(A(1)) [ A(x) & A(x) |> done ] in done"), FrontendError);
}

TEST_CASE("pure let substitutes") {
  auto core = compile("let x = 1 in done");
  CHECK(core.body->kind == ProcKind::Done);
  auto c2 = compile("let x = 1 in System!Print(x + 2)");
  CHECK(printProcess(c2.body) == "System!Print(1 + 2)");
}

TEST_CASE("sync call desugars into continuation objects") {
  auto core = compile(corpus("sync_deadlock.cob"));
  std::string s = printProcess(core.body);
  CAPTURE(s);
  CHECK(s.find("new cont1 [ Reply(future) |> new cont2 [ CLOSURE(future) & Reply(r1) |> future!Resolve(r1) ] in "
               "cont2!CLOSURE(future) & future!Get(cont2) ] in Future!New(cont1)") != std::string::npos);
}

TEST_CASE("anonymous blocks capture through a closure message") {
  auto core = compile(corpus("pi.cob"));
  std::string s = printProcess(core.body);
  CAPTURE(s);
  CHECK(s.find("new anon2 [ CLOSURE(this) & Reply(v) |> this!Right(v) ] in anon2!CLOSURE(this)") !=
        std::string::npos);
  CHECK(s.find("CLOSURE(from, depth, this) & Reply(r") != std::string::npos);
}

TEST_CASE("desugaring preserves sends and adds continuation objects") {
  for (auto name : kAll) {
    CAPTURE(name);
    auto surface = parseProgram(corpus(name));
    auto before = countNodes(surface.body);
    auto core = desugar(surface);
    auto after = countNodes(core.body);
    CHECK(after.syncCalls == 0);
    CHECK(after.blocks == 0);
    CHECK(after.sends == before.sends + before.syncCalls + after.withCaptures);
    CHECK(after.objects == before.objects + before.syncCalls);
  }
}

TEST_CASE("printing and reparsing a core program is alpha-equivalent") {
  for (auto name : kAll) {
    CAPTURE(name);
    auto core = compile(corpus(name));
    std::string printed = printProcess(core.body);
    CAPTURE(printed);
    SurfaceProgram again = parseProgram(printed);
    // the printed core still needs the declarations for annotated objects
    again.decls = parseProgram(corpus(name)).decls;
    auto core2 = desugar(again);
    CHECK(alphaEquivalent(core.body, core2.body));
  }
}
