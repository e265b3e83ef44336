#include <algorithm>
#include <functional>
#include <set>

#include "joinstate/syntax.hpp"

namespace joinstate {

TypePtr systemType() { return star(msg("Print", {number()})); }

TypePtr numberObjectType() { return star(msg("Pow", {number(), number(), msg("Reply", {number()})})); }

bool isBuiltinId(int id) { return id == kSystemId || id == kNumberId; }

namespace {

void checkArities(const TypePtr& t, std::map<std::string, size_t>& seen, const std::string& where) {
  if (t->kind == Kind::Msg) {
    auto [it, fresh] = seen.emplace(t->name, t->arity());
    if (!fresh && it->second != t->arity())
      throw TypeError("tag " + t->name + " used with arities " + std::to_string(it->second) + " and " +
                      std::to_string(t->arity()) + " in " + where);
    for (auto& a : t->kids) {
      std::map<std::string, size_t> inner;
      checkArities(a, inner, where);
    }
    return;
  }
  for (auto& k : t->kids) checkArities(k, seen, where);
}

void collectRefs(const TypePtr& t, std::vector<std::string>& out) {
  if (t->kind == Kind::Ref) out.push_back(t->name);
  for (auto& k : t->kids) collectRefs(k, out);
}

struct Binding {
  int id = -1;
  bool global = false;  // builtin or class
  ExprPtr subst;        // pure let
};

using Scope = std::map<std::string, Binding>;

bool containsCall(const ExprPtr& e) {
  if (e->kind == ExprKind::Call) return true;
  if (e->kind == ExprKind::Block) return false;
  return std::any_of(e->kids.begin(), e->kids.end(), containsCall);
}

// First call (left to right) whose arguments contain no further calls.
ExprPtr* innermostCall(ExprPtr& e) {
  if (e->kind == ExprKind::Block) return nullptr;
  for (auto& k : e->kids)
    if (auto* found = innermostCall(k)) return found;
  return e->kind == ExprKind::Call ? &e : nullptr;
}

ExprPtr cloneExpr(const ExprPtr& e) {
  auto c = std::make_shared<Expr>(*e);
  for (auto& k : c->kids) k = cloneExpr(k);
  return c;
}

ProcPtr cloneProc(const ProcPtr& p) {
  auto c = std::make_shared<Proc>(*p);
  for (auto& k : c->kids) k = cloneProc(k);
  for (auto& m : c->msgs)
    for (auto& a : m.args) a = cloneExpr(a);
  if (c->expr) c->expr = cloneExpr(c->expr);
  return c;
}

ExprPtr varExpr(const std::string& name, Pos pos) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Var;
  e->var = Name{name, -1, pos};
  e->pos = pos;
  return e;
}

// Free names of a surface process in order of first occurrence.
class SurfaceFree {
 public:
  std::vector<std::string> names;

  void proc(const ProcPtr& p, std::set<std::string> bound) {
    switch (p->kind) {
      case ProcKind::Done: return;
      case ProcKind::Send:
        use(p->name.text, bound);
        for (auto& m : p->msgs)
          for (auto& a : m.args) expr(a, bound);
        return;
      case ProcKind::Par:
        for (auto& k : p->kids) proc(k, bound);
        return;
      case ProcKind::New:
      case ProcKind::Class:
        bound.insert(p->name.text);
        rules(p->rules, bound);
        proc(p->kids[0], bound);
        return;
      case ProcKind::Let:
        expr(p->expr, bound);
        for (auto& v : p->letVars) bound.insert(v.text);
        proc(p->kids[0], bound);
        return;
      case ProcKind::If:
        expr(p->expr, bound);
        proc(p->kids[0], bound);
        proc(p->kids[1], bound);
        return;
    }
  }

  void rules(const std::vector<Rule>& rs, const std::set<std::string>& bound) {
    for (auto& r : rs) {
      auto inner = bound;
      for (auto& m : r.pattern)
        for (auto& v : m.vars) inner.insert(v.text);
      proc(r.body, inner);
    }
  }

  void expr(const ExprPtr& e, const std::set<std::string>& bound) {
    if (e->kind == ExprKind::Var || e->kind == ExprKind::Call) use(e->var.text, bound);
    if (e->kind == ExprKind::Block) rules(e->rules, bound);
    for (auto& k : e->kids) expr(k, bound);
  }

 private:
  void use(const std::string& n, const std::set<std::string>& bound) {
    if (bound.count(n) || std::find(names.begin(), names.end(), n) != names.end()) return;
    names.push_back(n);
  }
};

void collectIdents(const ProcPtr& p, std::set<std::string>& out);

void collectIdents(const ExprPtr& e, std::set<std::string>& out) {
  out.insert(e->var.text);
  for (auto& k : e->kids) collectIdents(k, out);
  for (auto& r : e->rules) {
    for (auto& m : r.pattern)
      for (auto& v : m.vars) out.insert(v.text);
    collectIdents(r.body, out);
  }
}

void collectIdents(const ProcPtr& p, std::set<std::string>& out) {
  out.insert(p->name.text);
  for (auto& v : p->letVars) out.insert(v.text);
  for (auto& k : p->kids) collectIdents(k, out);
  for (auto& m : p->msgs)
    for (auto& a : m.args) collectIdents(a, out);
  if (p->expr) collectIdents(p->expr, out);
  for (auto& r : p->rules) {
    for (auto& m : r.pattern)
      for (auto& v : m.vars) out.insert(v.text);
    collectIdents(r.body, out);
  }
}

class Desugarer {
 public:
  Desugarer(CoreProgram& out, std::set<std::string> taken) : out_(out), taken_(std::move(taken)) {}

  ProcPtr proc(const ProcPtr& p, const Scope& sc) {
    switch (p->kind) {
      case ProcKind::Done: return std::make_shared<Proc>(*p);
      case ProcKind::Par: {
        auto c = std::make_shared<Proc>(*p);
        for (auto& k : c->kids) k = proc(k, sc);
        return c;
      }
      case ProcKind::New:
      case ProcKind::Class: return object(p, sc);
      case ProcKind::If: return conditional(p, sc);
      case ProcKind::Let: return let(p, sc);
      case ProcKind::Send: return send(p, sc);
    }
    return nullptr;
  }

 private:
  CoreProgram& out_;
  std::set<std::string> taken_;
  std::map<std::string, int> counters_;

  std::string fresh(const std::string& stem) {
    for (;;) {
      std::string n = stem + std::to_string(++counters_[stem]);
      if (taken_.insert(n).second) return n;
    }
  }

  int bind(Scope& sc, const Name& n, bool global = false) {
    int id = out_.nextId++;
    out_.names[id] = n.text;
    sc[n.text] = Binding{id, global, nullptr};
    return id;
  }

  const Binding& lookup(const Scope& sc, const Name& n) const {
    auto it = sc.find(n.text);
    if (it == sc.end()) throw FrontendError(n.pos, "unknown name '" + n.text + "'");
    return it->second;
  }

  Name objectRef(const Scope& sc, const Name& n) const {
    const Binding& b = lookup(sc, n);
    if (b.subst) {
      if (b.subst->kind != ExprKind::Var) throw FrontendError(n.pos, "'" + n.text + "' is not an object");
      Name r = b.subst->var;
      r.pos = n.pos;
      return r;
    }
    return Name{n.text, b.id, n.pos};
  }

  ExprPtr expr(const ExprPtr& e, const Scope& sc) {
    switch (e->kind) {
      case ExprKind::Var: {
        const Binding& b = lookup(sc, e->var);
        if (b.subst) return cloneExpr(b.subst);
        auto c = std::make_shared<Expr>(*e);
        c->var.id = b.id;
        return c;
      }
      case ExprKind::Num:
      case ExprKind::Bool: return std::make_shared<Expr>(*e);
      case ExprKind::Binary:
      case ExprKind::Neg: {
        auto c = std::make_shared<Expr>(*e);
        for (auto& k : c->kids) k = expr(k, sc);
        return c;
      }
      case ExprKind::Call:
      case ExprKind::Block: throw FrontendError(e->pos, "internal: unexpected sugar in expression");
    }
    return nullptr;
  }

  std::vector<Rule> rules(const std::vector<Rule>& rs, const Scope& sc, const std::vector<Name>& closure) {
    std::vector<Rule> out;
    std::map<std::string, std::pair<size_t, Pos>> arity;
    for (auto& r : rs) {
      Scope inner = sc;
      Rule c;
      c.pos = r.pos;
      std::set<std::string> seen;
      std::vector<PatMsg> pattern = r.pattern;
      if (!closure.empty()) {
        PatMsg cl;
        cl.tag = "CLOSURE";
        cl.pos = r.pos;
        for (auto& n : closure) cl.vars.push_back(Name{n.text, -1, r.pos});
        pattern.insert(pattern.begin(), cl);
      }
      for (auto& m : pattern) {
        auto [it, first] = arity.emplace(m.tag, std::make_pair(m.vars.size(), m.pos));
        if (!first && it->second.first != m.vars.size())
          throw FrontendError(m.pos, "tag " + m.tag + " used with arities " + std::to_string(it->second.first) +
                                         " and " + std::to_string(m.vars.size()) + " in one class");
        PatMsg pm{m.tag, {}, m.pos};
        for (auto& v : m.vars) {
          if (!seen.insert(v.text).second)
            throw FrontendError(v.pos, "pattern variable '" + v.text + "' bound twice");
          pm.vars.push_back(Name{v.text, bind(inner, v), v.pos});
        }
        c.pattern.push_back(std::move(pm));
      }
      c.body = proc(r.body, inner);
      out.push_back(std::move(c));
    }
    return out;
  }

  ProcPtr object(const ProcPtr& p, const Scope& sc) {
    auto c = std::make_shared<Proc>();
    c->kind = ProcKind::New;
    c->pos = p->pos;
    c->stateless = p->kind == ProcKind::Class;
    c->origin = p->kind == ProcKind::Class ? Origin::Class : Origin::Declared;
    c->type = p->type;
    if (p->type) {
      std::vector<std::string> refs;
      collectRefs(p->type, refs);
      for (auto& r : refs)
        if (!isBaseName(r) && !out_.table.has(r)) throw FrontendError(p->pos, "unknown type name " + r);
    }
    Scope inner = sc;
    c->name = p->name;
    c->name.id = bind(inner, p->name, p->kind == ProcKind::Class);
    c->rules = rules(p->rules, inner, {});
    c->kids.push_back(proc(p->kids[0], inner));
    return c;
  }

  ProcPtr conditional(const ProcPtr& p, const Scope& sc) {
    if (containsCall(p->expr)) {
      auto copy = cloneProc(p);
      return proc(hoist(copy->expr, copy), sc);
    }
    auto c = std::make_shared<Proc>(*p);
    c->expr = expr(p->expr, sc);
    c->kids = {proc(p->kids[0], sc), proc(p->kids[1], sc)};
    return c;
  }

  // Replaces the innermost call in `slot` by a fresh variable and wraps
  // `scope` in a let binding it.
  ProcPtr hoist(ExprPtr& slot, const ProcPtr& scope) {
    ExprPtr* call = innermostCall(slot);
    std::string v = fresh("r");
    ExprPtr callExpr = *call;
    *call = varExpr(v, callExpr->pos);
    auto let = std::make_shared<Proc>();
    let->kind = ProcKind::Let;
    let->pos = callExpr->pos;
    let->letVars = {Name{v, -1, callExpr->pos}};
    let->expr = callExpr;
    let->kids = {scope};
    return let;
  }

  std::vector<Name> captures(const std::vector<std::string>& free, const Scope& sc, Pos pos) {
    std::vector<Name> out;
    for (auto& n : free) {
      auto it = sc.find(n);
      if (it == sc.end()) throw FrontendError(pos, "unknown name '" + n + "'");
      if (it->second.global) continue;
      out.push_back(Name{n, -1, pos});
    }
    return out;
  }

  ProcPtr let(const ProcPtr& p, const Scope& sc) {
    const ExprPtr& e = p->expr;
    bool topCall = e->kind == ExprKind::Call && !std::any_of(e->kids.begin(), e->kids.end(), containsCall);
    if (!topCall && containsCall(e)) {
      auto copy = cloneProc(p);
      return proc(hoist(copy->expr, copy), sc);
    }
    if (!topCall) {
      if (p->letVars.size() != 1)
        throw FrontendError(p->pos, "a pure let binds exactly one name");
      if (e->kind == ExprKind::Block) throw FrontendError(e->pos, "an anonymous object cannot be bound by let");
      Scope inner = sc;
      inner[p->letVars[0].text] = Binding{-1, false, expr(e, sc)};
      return proc(p->kids[0], inner);
    }
    return syncCall(p->letVars, e, p->kids[0], sc, p->pos);
  }

  // let x̄ = o.M(ē) in P
  ProcPtr syncCall(const std::vector<Name>& results, const ExprPtr& call, const ProcPtr& body, const Scope& sc,
                   Pos pos) {
    std::set<std::string> bound;
    for (auto& r : results) bound.insert(r.text);
    SurfaceFree fv;
    fv.proc(body, bound);
    std::vector<Name> ys = captures(fv.names, sc, pos);

    Name cont{fresh("cont"), -1, pos};
    auto surfaceObj = std::make_shared<Proc>();
    surfaceObj->kind = ProcKind::New;
    surfaceObj->pos = pos;
    surfaceObj->name = cont;
    Rule rule;
    rule.pos = pos;
    rule.pattern.push_back(PatMsg{"Reply", results, pos});
    rule.body = body;
    surfaceObj->rules = {rule};

    auto invoke = std::make_shared<Proc>();
    invoke->kind = ProcKind::Send;
    invoke->pos = call->pos;
    invoke->name = call->var;
    Message m{call->op, call->kids, call->pos};
    m.args.push_back(varExpr(cont.text, pos));
    invoke->msgs = {m};

    return oneShot(surfaceObj, ys, invoke, 0, m.args.size() - 1, Origin::Continuation, sc);
  }

  // new obj [CLOSURE(ȳ) & rules] in obj!CLOSURE(ȳ) & user, where user hands obj out
  ProcPtr oneShot(const ProcPtr& surfaceObj, const std::vector<Name>& ys, const ProcPtr& user, size_t msgIndex,
                  size_t argIndex, Origin origin, const Scope& sc) {
    auto c = std::make_shared<Proc>();
    c->kind = ProcKind::New;
    c->pos = surfaceObj->pos;
    c->origin = origin;
    Scope inner = sc;
    c->name = surfaceObj->name;
    c->name.id = bind(inner, surfaceObj->name);
    c->rules = rules(surfaceObj->rules, sc, ys);
    for (auto& y : ys) {
      Name r = y;
      const Binding& b = lookup(sc, y);
      r.id = b.subst && b.subst->kind == ExprKind::Var ? b.subst->var.id : b.id;
      c->captures.push_back(r);
    }

    ProcPtr userCore = proc(user, inner);
    std::vector<ProcPtr> parts;
    if (!ys.empty()) {
      auto cl = std::make_shared<Proc>();
      cl->kind = ProcKind::Send;
      cl->pos = c->pos;
      cl->name = c->name;
      Message m{"CLOSURE", {}, c->pos};
      for (auto& y : ys) m.args.push_back(expr(varExpr(y.text, c->pos), sc));
      cl->msgs = {m};
      parts.push_back(cl);
    }
    // the receiver is the send itself, possibly wrapped by further one-shot objects
    ProcPtr handOut = userCore;
    while (handOut->kind == ProcKind::New) {
      auto& body = handOut->kids[0];
      handOut = body->kind == ProcKind::Par ? body->kids.back() : body;
    }
    c->receiver = Receiver{handOut, msgIndex, argIndex};
    parts.push_back(userCore);
    if (parts.size() == 1) {
      c->kids = {parts[0]};
    } else {
      auto par = std::make_shared<Proc>();
      par->kind = ProcKind::Par;
      par->pos = c->pos;
      par->kids = parts;
      c->kids = {par};
    }
    return c;
  }

  ProcPtr send(const ProcPtr& p, const Scope& sc) {
    for (size_t i = 0; i < p->msgs.size(); ++i)
      for (size_t j = 0; j < p->msgs[i].args.size(); ++j)
        if (containsCall(p->msgs[i].args[j])) {
          auto copy = cloneProc(p);
          return proc(hoist(copy->msgs[i].args[j], copy), sc);
        }
    // anonymous blocks: the last one becomes the outermost object
    for (size_t i = p->msgs.size(); i-- > 0;)
      for (size_t j = p->msgs[i].args.size(); j-- > 0;) {
        const ExprPtr& a = p->msgs[i].args[j];
        if (a->kind != ExprKind::Block) continue;
        SurfaceFree fv;
        fv.rules(a->rules, {});
        std::vector<Name> ys = captures(fv.names, sc, a->pos);
        auto obj = std::make_shared<Proc>();
        obj->kind = ProcKind::New;
        obj->pos = a->pos;
        obj->name = Name{fresh("anon"), -1, a->pos};
        obj->rules = a->rules;
        auto copy = cloneProc(p);
        copy->msgs[i].args[j] = varExpr(obj->name.text, a->pos);
        return oneShot(obj, ys, copy, i, j, Origin::Anonymous, sc);
      }
    auto c = std::make_shared<Proc>(*p);
    c->name = objectRef(sc, p->name);
    for (auto& m : c->msgs)
      for (auto& a : m.args) a = expr(a, sc);
    return c;
  }
};

void freeIn(const ProcPtr& p, std::set<int>& bound, std::vector<Name>& out, std::set<int>& seen);

void freeInExpr(const ExprPtr& e, std::set<int>& bound, std::vector<Name>& out, std::set<int>& seen) {
  if (e->kind == ExprKind::Var && !bound.count(e->var.id) && seen.insert(e->var.id).second) out.push_back(e->var);
  for (auto& k : e->kids) freeInExpr(k, bound, out, seen);
}

void freeIn(const ProcPtr& p, std::set<int>& bound, std::vector<Name>& out, std::set<int>& seen) {
  switch (p->kind) {
    case ProcKind::Send:
      if (!bound.count(p->name.id) && seen.insert(p->name.id).second) out.push_back(p->name);
      for (auto& m : p->msgs)
        for (auto& a : m.args) freeInExpr(a, bound, out, seen);
      return;
    case ProcKind::New:
    case ProcKind::Class: {
      auto inner = bound;
      inner.insert(p->name.id);
      for (auto& r : p->rules) {
        auto rb = inner;
        for (auto& m : r.pattern)
          for (auto& v : m.vars) rb.insert(v.id);
        freeIn(r.body, rb, out, seen);
      }
      freeIn(p->kids[0], inner, out, seen);
      return;
    }
    case ProcKind::If: freeInExpr(p->expr, bound, out, seen); [[fallthrough]];
    default:
      for (auto& k : p->kids) freeIn(k, bound, out, seen);
  }
}

class Alpha {
 public:
  bool proc(const ProcPtr& a, const ProcPtr& b) {
    if (a->kind != b->kind) return false;
    switch (a->kind) {
      case ProcKind::Done: return true;
      case ProcKind::Send:
        if (!name(a->name, b->name) || a->msgs.size() != b->msgs.size()) return false;
        for (size_t i = 0; i < a->msgs.size(); ++i) {
          if (a->msgs[i].tag != b->msgs[i].tag || a->msgs[i].args.size() != b->msgs[i].args.size()) return false;
          for (size_t j = 0; j < a->msgs[i].args.size(); ++j)
            if (!expr(a->msgs[i].args[j], b->msgs[i].args[j])) return false;
        }
        return true;
      case ProcKind::New:
      case ProcKind::Class:
        if (a->stateless != b->stateless || a->rules.size() != b->rules.size()) return false;
        if ((a->type == nullptr) != (b->type == nullptr)) return false;
        if (a->type && normalize(a->type)->key != normalize(b->type)->key) return false;
        map_[a->name.id] = b->name.id;
        for (size_t i = 0; i < a->rules.size(); ++i) {
          auto& ra = a->rules[i];
          auto& rb = b->rules[i];
          if (ra.pattern.size() != rb.pattern.size()) return false;
          for (size_t k = 0; k < ra.pattern.size(); ++k) {
            if (ra.pattern[k].tag != rb.pattern[k].tag || ra.pattern[k].vars.size() != rb.pattern[k].vars.size())
              return false;
            for (size_t j = 0; j < ra.pattern[k].vars.size(); ++j) map_[ra.pattern[k].vars[j].id] = rb.pattern[k].vars[j].id;
          }
          if (!proc(ra.body, rb.body)) return false;
        }
        return a->kids.size() == b->kids.size() && proc(a->kids[0], b->kids[0]);
      case ProcKind::If:
        if (!expr(a->expr, b->expr)) return false;
        [[fallthrough]];
      default:
        if (a->kids.size() != b->kids.size()) return false;
        for (size_t i = 0; i < a->kids.size(); ++i)
          if (!proc(a->kids[i], b->kids[i])) return false;
        return true;
    }
  }

 private:
  std::map<int, int> map_;

  bool name(const Name& a, const Name& b) {
    auto it = map_.find(a.id);
    if (it != map_.end()) return it->second == b.id;
    return a.id == b.id;  // free names compare by identity
  }

  bool expr(const ExprPtr& a, const ExprPtr& b) {
    if (a->kind != b->kind || a->kids.size() != b->kids.size()) return false;
    switch (a->kind) {
      case ExprKind::Var: return name(a->var, b->var);
      case ExprKind::Num: return a->num == b->num;
      case ExprKind::Bool: return a->boolean == b->boolean;
      default:
        if (a->op != b->op) return false;
        for (size_t i = 0; i < a->kids.size(); ++i)
          if (!expr(a->kids[i], b->kids[i])) return false;
        return true;
    }
  }
};

void count(const ProcPtr& p, NodeCounts& c);

void countExpr(const ExprPtr& e, NodeCounts& c) {
  if (e->kind == ExprKind::Call) ++c.syncCalls;
  if (e->kind == ExprKind::Block) {
    ++c.blocks;
    ++c.objects;
    for (auto& r : e->rules) count(r.body, c);
  }
  for (auto& k : e->kids) countExpr(k, c);
}

void count(const ProcPtr& p, NodeCounts& c) {
  if (p->kind == ProcKind::Send) ++c.sends;
  if (p->kind == ProcKind::New || p->kind == ProcKind::Class) {
    ++c.objects;
    if (!p->captures.empty()) ++c.withCaptures;
  }
  for (auto& m : p->msgs)
    for (auto& a : m.args) countExpr(a, c);
  if (p->expr) countExpr(p->expr, c);
  for (auto& r : p->rules) count(r.body, c);
  for (auto& k : p->kids) count(k, c);
}

}  // namespace

TypeTable resolveTypes(const std::vector<TypeDecl>& decls) {
  TypeTable tab;
  for (auto& d : decls) {
    try {
      tab.define(d.name, d.body);
      std::map<std::string, size_t> seen;
      checkArities(d.body, seen, d.name);
    } catch (const TypeError& e) {
      throw FrontendError(d.pos, e.what());
    }
  }
  try {
    tab.resolve();
  } catch (const TypeError& e) {
    throw FrontendError(decls.empty() ? Pos{} : decls.front().pos, e.what());
  }
  return tab;
}

CoreProgram desugar(const SurfaceProgram& program) {
  CoreProgram out;
  out.table = resolveTypes(program.decls);
  out.names[kSystemId] = "System";
  out.names[kNumberId] = "Number";
  out.nextId = 2;
  std::set<std::string> taken;
  collectIdents(program.body, taken);
  Scope root;
  root["System"] = Binding{kSystemId, true, nullptr};
  root["Number"] = Binding{kNumberId, true, nullptr};
  Desugarer d(out, taken);
  out.body = d.proc(program.body, root);
  return out;
}

CoreProgram compile(const std::string& source) { return desugar(parseProgram(source)); }

bool alphaEquivalent(const ProcPtr& a, const ProcPtr& b) { return Alpha().proc(a, b); }

std::vector<Name> freeNames(const ProcPtr& p) {
  std::set<int> bound, seen;
  std::vector<Name> out;
  freeIn(p, bound, out, seen);
  return out;
}

NodeCounts countNodes(const ProcPtr& p) {
  NodeCounts c;
  count(p, c);
  return c;
}

}  // namespace joinstate
