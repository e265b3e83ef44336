#include <doctest.h>

#include <fstream>
#include <sstream>

#include "joinstate/checker.hpp"

using namespace joinstate;

namespace {

std::string readCorpus(const std::string& name) {
  std::ifstream in(std::string(JOINSTATE_CORPUS_DIR) + "/" + name + ".cob");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Report checkFile(const std::string& name) {
  CoreProgram p = compile(readCorpus(name));
  return checkProgram(p);
}

std::string dump(const Report& r) {
  std::string s;
  for (auto& d : r.diagnostics) s += showDiagnostic(d) + "\n";
  return s;
}

}  // namespace

TEST_CASE("accepted corpus programs") {
  for (const char* name : {"future_user", "sync_ok", "pi", "sieve"}) {
    CAPTURE(name);
    Report r = checkFile(name);
    INFO(dump(r));
    CHECK(r.accepted);
  }
}

TEST_CASE("rejected corpus programs carry the expected code") {
  struct Case {
    const char* name;
    DiagCode code;
  };
  for (auto c : {Case{"future_deadlock", DiagCode::IncompatibleDeps},
                 Case{"missing_b", DiagCode::ProtocolViolation},
                 Case{"extra_b", DiagCode::ProtocolViolation},
                 Case{"mutual", DiagCode::IncompatibleDeps},
                 Case{"duplicated_dependency", DiagCode::IncompatibleDeps},
                 Case{"self_dependency", DiagCode::SelfDependency},
                 Case{"duplicate_argument", DiagCode::DuplicateArgument},
                 Case{"sync_deadlock", DiagCode::IncompatibleDeps}}) {
    CAPTURE(c.name);
    Report r = checkFile(c.name);
    INFO(dump(r));
    CHECK_FALSE(r.accepted);
    CHECK(r.codes() == std::vector<std::string>{codeName(c.code)});
  }
}

TEST_CASE("future deadlock is located in the reader's reaction") {
  Report r = checkFile("future_deadlock");
  REQUIRE(r.diagnostics.size() == 1);
  auto& names = r.diagnostics[0].names;
  CHECK(std::find(names.begin(), names.end(), "future") != names.end());
  CHECK(std::find(names.begin(), names.end(), "user") != names.end());
  CHECK(r.diagnostics[0].pos.line == 14);
}

TEST_CASE("inferred class and continuation types") {
  CoreProgram p = compile(readCorpus("pi"));
  Report r = checkProgram(p);
  std::map<std::string, std::string> types;
  for (auto& o : r.objects) types[o.name] = o.type;
  CHECK(types["Worker"] == "*New(#Number, #Number, #Reply)");
  CHECK(types.count("this"));
}

TEST_CASE("liveness and ambiguity diagnostics") {
  auto rep = [](const std::string& src) { return checkProgram(compile(src)); };
  CHECK(rep("new o : *(A · B) + C(D) [ A & B |> done ] in done").has(DiagCode::NotLive));
  CHECK(rep("new o : A [ A |> done | B |> done ] in o!A").has(DiagCode::DeadReaction));
  CHECK(rep("new o : M(A) + M(B) [ M(x) |> done ] in done").has(DiagCode::AmbiguousArgs));
  CHECK(rep("new o : A(B) [ A(x) |> done ] in o!A(o)").has(DiagCode::SelfDependency));
  Report unmet = rep("new p : B [ B |> done ] in new o : A(B) [ A(x) |> done ] in o!A(p)");
  CHECK(unmet.has(DiagCode::ObligationUnmet));
  CHECK(rep("new o : A(0) [ A(x) |> done ] in new p : 1 [ B |> done ] in o!A(p)")
            .has(DiagCode::UnusableArg));
}

TEST_CASE("report json") {
  Report r = checkFile("missing_b");
  std::string j = reportJson(r);
  CHECK(j.find("\"verdict\": \"rejected\"") != std::string::npos);
  CHECK(j.find("ProtocolViolation") != std::string::npos);
}
