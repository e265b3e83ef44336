#pragma once

#include <map>
#include <string>
#include <vector>

#include "joinstate/deps.hpp"
#include "joinstate/semilinear.hpp"
#include "joinstate/syntax.hpp"

namespace joinstate {

enum class DiagCode {
  ProtocolViolation,
  SelfDependency,
  DuplicateArgument,
  IncompatibleDeps,
  NotLive,
  AmbiguousArgs,
  DeadReaction,
  UnusableArg,
  ObligationUnmet,
  AritySumError,
};

std::string codeName(DiagCode c);

struct Diagnostic {
  DiagCode code;
  Pos pos;
  std::string message;
  std::vector<std::string> names;
  std::vector<std::string> types;
};

struct ObjectReport {
  std::string name;
  Pos pos;
  std::string type;
  std::vector<TagMultiset> patterns;
  bool live = true;
  bool stateless = false;
};

struct BoundedUse {
  Pos pos;
  std::string sub;
  std::string super;
  int bound = 0;
};

// What the runtime and the solution checker need to know about one object
// definition of the program.
struct StaticObject {
  TypePtr type;
  std::vector<TagMultiset> patterns;
  bool classOk = true;
  bool stateless = false;
};

struct Report {
  bool accepted = false;
  std::vector<Diagnostic> diagnostics;
  std::vector<ObjectReport> objects;
  std::vector<BoundedUse> bounded;
  std::map<const Proc*, StaticObject> statics;
  // Synthesized dependency blocks per reaction body and for the whole program.
  std::vector<std::pair<std::string, std::string>> dependencies;

  bool has(DiagCode c) const;
  std::vector<std::string> codes() const;  // sorted, deduplicated
};

Report checkProgram(const CoreProgram& program, int bound = 4);

// JSON: {verdict, diagnostics[], objects[], boundedSubtypeUses[]}
std::string reportJson(const Report& r);
std::string showDiagnostic(const Diagnostic& d);

// A running solution as seen by the type checker: definitions plus the
// messages currently in flight (heated, so nothing else is pending).
struct SolutionObject {
  int id = 0;
  std::string name;
  const Proc* def = nullptr;  // null for builtins
  TypePtr type;
  bool stateless = false;
  std::vector<TagMultiset> patterns;
};

struct SolutionArg {
  bool object = false;
  int id = 0;  // object id when object
};

struct SolutionMessage {
  int target = 0;
  std::string tag;
  std::vector<SolutionArg> args;
};

struct SolutionView {
  std::vector<SolutionObject> objects;
  std::vector<SolutionMessage> messages;
};

struct SolutionVerdict {
  bool ok = true;
  std::vector<std::string> problems;
};

SolutionVerdict checkSolution(const SolutionView& view, const Report& staticReport, Engine& engine);

}  // namespace joinstate
