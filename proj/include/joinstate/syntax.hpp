#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "joinstate/types.hpp"

namespace joinstate {

struct Pos {
  int line = 0;
  int col = 0;
};

std::string showPos(const Pos& p);

struct Proc;
struct Expr;
struct Rule;
using ProcPtr = std::shared_ptr<Proc>;
using ExprPtr = std::shared_ptr<Expr>;

// A name occurrence. id is assigned by name resolution; -1 before that.
struct Name {
  std::string text;
  int id = -1;
  Pos pos;
};

enum class ExprKind { Var, Num, Bool, Binary, Neg, Call, Block };

struct Expr {
  ExprKind kind = ExprKind::Num;
  Pos pos;
  Name var;            // Var; Call target
  double num = 0;
  bool boolean = false;
  std::string op;      // Binary operator, or Call method tag
  std::vector<ExprPtr> kids;
  std::vector<Rule> rules;  // Block (anonymous object)
};

struct PatMsg {
  std::string tag;
  std::vector<Name> vars;
  Pos pos;
};

struct Message {
  std::string tag;
  std::vector<ExprPtr> args;
  Pos pos;
};

struct Rule {
  std::vector<PatMsg> pattern;
  ProcPtr body;
  Pos pos;
};

enum class ProcKind { Done, Send, Par, New, Class, Let, If };

// Where an object definition came from. Only Declared objects carry an
// annotation; the checker infers the others.
enum class Origin { Declared, Class, Continuation, Anonymous };

// For desugared one-shot objects: the send that hands the object out.
struct Receiver {
  ProcPtr send;
  size_t msgIndex = 0;
  size_t argIndex = 0;
};

struct Proc {
  ProcKind kind = ProcKind::Done;
  Pos pos;
  Name name;                    // Send target; New/Class binder
  std::vector<Message> msgs;    // Send
  std::vector<ProcPtr> kids;    // Par parts; New/Class/Let body in kids[0]; If arms
  std::vector<Rule> rules;      // New/Class
  TypePtr type;                 // New annotation (may be null)
  bool stateless = false;
  Origin origin = Origin::Declared;
  std::vector<Name> captures;   // CLOSURE arguments of a desugared object
  std::optional<Receiver> receiver;
  std::vector<Name> letVars;    // Let
  ExprPtr expr;                 // Let right-hand side; If condition
};

struct TypeDecl {
  std::string name;
  TypePtr body;
  Pos pos;
};

struct SurfaceProgram {
  std::vector<TypeDecl> decls;
  ProcPtr body;
};

struct CoreProgram {
  ProcPtr body;
  TypeTable table;
  std::map<int, std::string> names;  // binder id -> display name
  int nextId = 0;
};

// Builtin objects have fixed binder ids.
constexpr int kSystemId = 0;
constexpr int kNumberId = 1;
TypePtr systemType();
TypePtr numberObjectType();
bool isBuiltinId(int id);

struct FrontendError : std::runtime_error {
  Pos pos;
  FrontendError(Pos p, const std::string& msg);
};

SurfaceProgram parseProgram(const std::string& source);
TypePtr parseType(const std::string& source);

// Builds the table and checks contractiveness and per-entry tag arity.
TypeTable resolveTypes(const std::vector<TypeDecl>& decls);

// Classes, sync calls, lets and anonymous blocks become core nodes; binders
// get unique ids.
CoreProgram desugar(const SurfaceProgram& program);

// Parse + resolve + desugar.
CoreProgram compile(const std::string& source);

// Renders surface or core processes in the concrete syntax accepted by
// parseProgram. Core output omits inferred annotations.
std::string printProcess(const ProcPtr& p);
std::string printExpr(const ExprPtr& e);

// Structural equality up to consistent renaming of bound names.
bool alphaEquivalent(const ProcPtr& a, const ProcPtr& b);

// Free names (by id) of a resolved core process, in order of first occurrence.
std::vector<Name> freeNames(const ProcPtr& p);

// Counts used by desugaring property tests.
struct NodeCounts {
  size_t sends = 0;
  size_t objects = 0;
  size_t syncCalls = 0;
  size_t blocks = 0;
  size_t withCaptures = 0;
};
NodeCounts countNodes(const ProcPtr& p);

}  // namespace joinstate
