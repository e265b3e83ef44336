#include "joinstate/checker.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

namespace joinstate {

std::string codeName(DiagCode c) {
  switch (c) {
    case DiagCode::ProtocolViolation: return "ProtocolViolation";
    case DiagCode::SelfDependency: return "SelfDependency";
    case DiagCode::DuplicateArgument: return "DuplicateArgument";
    case DiagCode::IncompatibleDeps: return "IncompatibleDeps";
    case DiagCode::NotLive: return "NotLive";
    case DiagCode::AmbiguousArgs: return "AmbiguousArgs";
    case DiagCode::DeadReaction: return "DeadReaction";
    case DiagCode::UnusableArg: return "UnusableArg";
    case DiagCode::ObligationUnmet: return "ObligationUnmet";
    case DiagCode::AritySumError: return "AritySumError";
  }
  return "?";
}

bool Report::has(DiagCode c) const {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [&](const Diagnostic& d) { return d.code == c; });
}

std::vector<std::string> Report::codes() const {
  std::set<std::string> s;
  for (auto& d : diagnostics) s.insert(codeName(d.code));
  return {s.begin(), s.end()};
}

std::string showDiagnostic(const Diagnostic& d) {
  return showPos(d.pos) + ": " + codeName(d.code) + ": " + d.message;
}

namespace {

using Env = std::map<int, TypePtr>;

struct Decl {
  TypePtr type;  // null: not yet known (class parameter under inference)
  bool stateless = false;
  bool global = false;
};
using Decls = std::map<int, Decl>;

// A send to an untyped class parameter, kept until its argument types are
// known. Arguments bound by an enclosing new are filled in at that binder.
struct Deferred {
  int target;
  std::vector<std::string> tags;
  std::vector<std::vector<TypePtr>> argTypes;
  std::vector<std::vector<int>> pending;  // binder id, or -1 when resolved
  bool failed = false;
};

struct Result {
  Env env;
  DependencyRelation deps;
  std::vector<Deferred> deferred;
};

bool isBaseType(const TypePtr& t) { return t && normalize(t)->kind == Kind::Base; }

void collectVars(const ExprPtr& e, std::vector<Name>& out) {
  if (!e) return;
  if (e->kind == ExprKind::Var) out.push_back(e->var);
  for (auto& k : e->kids) collectVars(k, out);
}

// Message leaves of a type built only from products of messages and 1.
bool singleConfigTags(const TypePtr& t, std::vector<std::string>& tags) {
  switch (t->kind) {
    case Kind::One:
    case Kind::Base: return true;
    case Kind::Msg: tags.push_back(t->name); return true;
    case Kind::Prod:
      for (auto& k : t->kids)
        if (!singleConfigTags(k, tags)) return false;
      return true;
    default: return false;
  }
}

bool mentionsBase(const TypePtr& t) {
  if (t->kind == Kind::Base) return true;
  if (t->kind == Kind::Msg) return false;
  return std::any_of(t->kids.begin(), t->kids.end(), mentionsBase);
}

bool hasMessages(const TypePtr& t) {
  if (t->kind == Kind::Msg || t->kind == Kind::Ref) return true;
  return std::any_of(t->kids.begin(), t->kids.end(), hasMessages);
}

void addUsage(Env& env, int id, const TypePtr& t) {
  auto it = env.find(id);
  if (it == env.end())
    env[id] = t;
  else if (isBaseType(it->second) && isBaseType(t))
    return;  // repeated uses of a number carry no protocol
  else
    it->second = prod(it->second, t);
}

class Checker {
 public:
  Checker(const CoreProgram& prog, Report& report, int bound)
      : prog_(prog), report_(report), engine_(prog.table, bound) {}

  void run() {
    Decls decls;
    decls[kSystemId] = {systemType(), true, true};
    decls[kNumberId] = {numberObjectType(), true, true};
    Result r = check(prog_.body, decls);
    report_.dependencies.push_back({"program", showDeps(r.deps, prog_.names)});
    for (auto& [id, usage] : r.env) {
      auto it = decls.find(id);
      if (it == decls.end()) continue;
      requireSub(it->second.type, usage, prog_.body->pos, DiagCode::ProtocolViolation,
                 "use of builtin '" + nameOf(id) + "'", {nameOf(id)});
    }
    report_.accepted = report_.diagnostics.empty();
  }

 private:
  const CoreProgram& prog_;
  Report& report_;
  Engine engine_;
  int silent_ = 0;       // >0: diagnostics dropped, per-object checks skipped
  bool inferring_ = false;
  std::set<int> underInference_;
  int inConditional_ = 0;
  std::map<std::string, TypePtr> oneShotCache_;

  std::string nameOf(int id) const {
    auto it = prog_.names.find(id);
    return it == prog_.names.end() ? "#" + std::to_string(id) : it->second;
  }

  void diag(DiagCode c, Pos pos, std::string message, std::vector<std::string> names = {},
            std::vector<std::string> types = {}) {
    if (silent_) return;
    if (inConditional_) message += " (arms of a conditional are combined as a choice)";
    report_.diagnostics.push_back({c, pos, std::move(message), std::move(names), std::move(types)});
  }

  // decl <= usage, recording bounded verdicts.
  bool requireSub(const TypePtr& decl, const TypePtr& usage, Pos pos, DiagCode code,
                  const std::string& what, std::vector<std::string> names) {
    if (!decl) return true;
    SubtypeResult r;
    try {
      r = engine_.subtype(decl, usage);
    } catch (const ArityError& e) {
      diag(DiagCode::AritySumError, pos, what + ": " + e.what(), names);
      return false;
    }
    if (r.verdict == Verdict::YesBounded && !silent_)
      report_.bounded.push_back({pos, show(decl), show(usage), r.bound});
    if (r.holds()) return true;
    std::string msg = what + ": declared " + show(decl) + " does not accept usage " + show(usage);
    if (r.counterexample) msg += "; e.g. " + showConfig(*r.counterexample);
    diag(code, pos, msg, std::move(names), {show(decl), show(usage)});
    return false;
  }

  // Dead or ambiguous message resolution, with the arity case singled out.
  void reportResolution(const ArgAssignment& a, const TypePtr& t,
                        const std::vector<PatternMsg>& pm, Pos pos, const std::string& who,
                        bool pattern) {
    if (a.status == Determinacy::Ambiguous) {
      diag(DiagCode::AmbiguousArgs, pos,
           "argument types of the " + std::string(pattern ? "pattern" : "molecule") + " for " +
               who + " are not determined by " + show(t),
           {who}, {show(t)});
      return;
    }
    try {
      const auto& alpha = engine_.parikhOf(t).alphabet;
      for (auto& m : pm)
        for (auto& s : alpha.slots)
          if (s.tag == m.tag && s.arity() != m.arity) {
            diag(DiagCode::AritySumError, pos,
                 "tag " + m.tag + " used with arity " + std::to_string(m.arity) + " but " +
                     show(t) + " gives it arity " + std::to_string(s.arity()),
                 {who}, {show(t)});
            return;
          }
    } catch (const std::exception&) {
    }
    if (pattern)
      diag(DiagCode::DeadReaction, pos,
           "no configuration of " + show(t) + " can trigger this reaction of " + who, {who},
           {show(t)});
    else
      diag(DiagCode::ProtocolViolation, pos,
           "no configuration of " + show(t) + " extends the molecule sent to " + who, {who},
           {show(t)});
  }

  Result check(const ProcPtr& p, const Decls& decls) {
    switch (p->kind) {
      case ProcKind::Done: return {};
      case ProcKind::Send: return checkSend(*p, decls);
      case ProcKind::Par: {
        Result acc;
        bool first = true;
        for (auto& k : p->kids) {
          Result r = check(k, decls);
          if (first) {
            acc = std::move(r);
            first = false;
            continue;
          }
          for (auto& [id, t] : r.env) addUsage(acc.env, id, t);
          JoinResult j = join(acc.deps, r.deps);
          if (j.ok()) {
            acc.deps = *j.relation;
          } else {
            auto [a, b] = j.witness;
            diag(DiagCode::IncompatibleDeps, k->pos,
                 "dependency between " + nameOf(a) + " and " + nameOf(b) +
                     " is created by both sides of a parallel composition",
                 {nameOf(a), nameOf(b)});
            acc.deps = mergeBranches(acc.deps, r.deps);
          }
          for (auto& d : r.deferred) acc.deferred.push_back(std::move(d));
        }
        return acc;
      }
      case ProcKind::If: {
        Result cond;
        std::vector<Name> vars;
        collectVars(p->expr, vars);
        for (auto& v : vars) useAsNumber(cond, v, decls);
        ++inConditional_;
        Result a = check(p->kids[0], decls);
        Result b = check(p->kids[1], decls);
        --inConditional_;
        Result out = std::move(cond);
        std::set<int> ids;
        for (auto& [id, _] : a.env) ids.insert(id);
        for (auto& [id, _] : b.env) ids.insert(id);
        for (int id : ids) {
          TypePtr ta = a.env.count(id) ? a.env[id] : one();
          TypePtr tb = b.env.count(id) ? b.env[id] : one();
          TypePtr both = (isBaseType(ta) && isBaseType(tb)) ? ta : sum(ta, tb);
          addUsage(out.env, id, both);
        }
        out.deps = mergeBranches(a.deps, b.deps);
        for (auto& d : a.deferred) out.deferred.push_back(std::move(d));
        for (auto& d : b.deferred) out.deferred.push_back(std::move(d));
        return out;
      }
      case ProcKind::New:
      case ProcKind::Class: return checkNew(*p, decls);
      case ProcKind::Let:
        // Lets are removed by desugaring; a leftover one is checked through its body.
        return p->kids.empty() ? Result{} : check(p->kids[0], decls);
    }
    return {};
  }

  void useAsNumber(Result& r, const Name& v, const Decls& decls) {
    if (v.id < 0) return;
    if (!decls.count(v.id)) {
      diag(DiagCode::ProtocolViolation, v.pos,
           "'" + v.text + "' is not in scope here (only the object and its pattern variables are)",
           {v.text});
      return;
    }
    addUsage(r.env, v.id, number());
  }

  Result checkSend(const Proc& p, const Decls& decls) {
    Result r;
    const std::string who = p.name.text;
    if (inferring_ && underInference_.count(p.name.id)) return r;
    auto dit = decls.find(p.name.id);
    if (dit == decls.end()) {
      diag(DiagCode::ProtocolViolation, p.pos,
           "'" + who + "' is not in scope here (only the object and its pattern variables are)",
           {who});
      return r;
    }
    const Decl& target = dit->second;

    std::vector<PatternMsg> pm;
    for (auto& m : p.msgs) pm.push_back({m.tag, m.args.size()});

    if (!target.type) {
      if (inferring_) return deferSend(p, decls);
      diag(DiagCode::ProtocolViolation, p.pos, "type of '" + who + "' could not be inferred", {who});
      return r;
    }
    if (isBaseType(target.type)) {
      diag(DiagCode::ProtocolViolation, p.pos, "'" + who + "' is a number, not an object", {who});
      return r;
    }

    ArgAssignment a;
    try {
      a = engine_.argDeterminate(target.type, pm);
    } catch (const ArityError& e) {
      diag(DiagCode::AritySumError, p.pos, e.what(), {who});
      return r;
    }
    if (a.status != Determinacy::Unique) {
      reportResolution(a, target.type, pm, p.pos, who, false);
      return r;
    }

    std::vector<int> objectArgs;
    std::set<int> seen;
    std::vector<TypePtr> molecule;
    for (size_t i = 0; i < p.msgs.size(); ++i) {
      const Message& m = p.msgs[i];
      for (size_t j = 0; j < m.args.size(); ++j) {
        const ExprPtr& e = m.args[j];
        const TypePtr& slot = a.args[i][j];
        if (e->kind != ExprKind::Var) {
          if (!nullable(slot, prog_.table)) {
            diag(DiagCode::ProtocolViolation, e->pos,
                 "a value is passed where " + show(slot) + " is expected by " + who, {who},
                 {show(slot)});
            return {};
          }
          std::vector<Name> vars;
          collectVars(e, vars);
          for (auto& v : vars) useAsNumber(r, v, decls);
          continue;
        }
        const Name& x = e->var;
        auto xit = decls.find(x.id);
        if (xit == decls.end()) {
          diag(DiagCode::ProtocolViolation, x.pos,
               "'" + x.text + "' is not in scope here (only the object and its pattern variables are)",
               {x.text});
          return {};
        }
        if (!usable(slot, prog_.table)) {
          diag(DiagCode::UnusableArg, x.pos,
               "argument slot " + show(slot) + " of " + m.tag + " can never be used", {x.text},
               {show(slot)});
          return {};
        }
        bool numeric = isBaseType(xit->second.type);
        if (numeric && !nullable(slot, prog_.table)) {
          diag(DiagCode::ProtocolViolation, x.pos,
               "number '" + x.text + "' is passed where " + show(slot) + " is expected", {x.text},
               {show(slot)});
          return {};
        }
        if (!numeric) {
          if (x.id == p.name.id) {
            diag(DiagCode::SelfDependency, x.pos,
                 "'" + x.text + "' is sent to itself as an argument", {x.text});
            return {};
          }
          if (!seen.insert(x.id).second) {
            diag(DiagCode::DuplicateArgument, x.pos,
                 "'" + x.text + "' occurs more than once among the arguments sent to " + who,
                 {x.text, who});
            return {};
          }
          objectArgs.push_back(x.id);
        }
        addUsage(r.env, x.id, slot);
      }
      molecule.push_back(msg(m.tag, a.args[i]));
    }
    addUsage(r.env, p.name.id, prod(molecule));
    if (!target.stateless) objectArgs.push_back(p.name.id);
    if (objectArgs.size() >= 2) r.deps = DependencyRelation::clique(objectArgs);
    return r;
  }

  Result deferSend(const Proc& p, const Decls& decls) {
    Result r;
    Deferred d;
    d.target = p.name.id;
    for (auto& m : p.msgs) {
      d.tags.push_back(m.tag);
      std::vector<TypePtr> types;
      std::vector<int> pending;
      for (auto& e : m.args) {
        if (e->kind != ExprKind::Var) {
          std::vector<Name> vars;
          collectVars(e, vars);
          for (auto& v : vars) useAsNumber(r, v, decls);
          types.push_back(number());
          pending.push_back(-1);
          continue;
        }
        auto it = decls.find(e->var.id);
        if (it == decls.end() || !it->second.type) {
          d.failed = true;
          types.push_back(one());
          pending.push_back(-1);
        } else if (isBaseType(it->second.type)) {
          addUsage(r.env, e->var.id, number());
          types.push_back(number());
          pending.push_back(-1);
        } else if (it->second.global) {
          addUsage(r.env, e->var.id, it->second.type);
          types.push_back(it->second.type);
          pending.push_back(-1);
        } else {
          types.push_back(nullptr);
          pending.push_back(e->var.id);
        }
      }
      d.argTypes.push_back(std::move(types));
      d.pending.push_back(std::move(pending));
    }
    r.deferred.push_back(std::move(d));
    return r;
  }

  Decls globalsOf(const Decls& decls) {
    Decls g;
    for (auto& [id, d] : decls)
      if (d.global) g[id] = d;
    return g;
  }

  Result checkNew(const Proc& p, const Decls& decls) {
    const int self = p.name.id;
    TypePtr t0;
    bool global = p.origin == Origin::Class;
    if (p.origin == Origin::Declared) {
      t0 = p.type;
      if (!t0) {
        diag(DiagCode::ProtocolViolation, p.pos, "object '" + p.name.text + "' has no type",
             {p.name.text});
        return {};
      }
    } else if (p.origin == Origin::Class) {
      t0 = inferClass(p, decls);
    } else {
      if (inferring_ && p.receiver && underInference_.count(p.receiver->send->name.id)) return {};
      t0 = inferOneShot(p, decls);
    }
    if (!t0) return {};

    Decls inner = decls;
    inner[self] = {t0, p.stateless, global};

    std::vector<TagMultiset> X;
    for (auto& rule : p.rules) {
      TagMultiset tags;
      for (auto& m : rule.pattern) tags.push_back(m.tag);
      std::sort(tags.begin(), tags.end());
      X.push_back(tags);
    }

    bool classOk = true;
    if (!silent_) {
      size_t before = report_.diagnostics.size();
      checkRules(self, t0, p.rules, inner);
      classOk = report_.diagnostics.size() == before;
    }

    Result r = check(p.kids[0], inner);
    resolveDeferred(r, self, t0);

    if (!silent_) {
      TypePtr usage = r.env.count(self) ? r.env[self] : one();
      requireSub(t0, usage, p.pos, DiagCode::ProtocolViolation,
                 "uses of '" + p.name.text + "'", {p.name.text});
      bool isLive = true;
      try {
        isLive = engine_.live(t0, X);
      } catch (const ArityError& e) {
        diag(DiagCode::AritySumError, p.pos, e.what(), {p.name.text});
      }
      if (!isLive)
        diag(DiagCode::NotLive, p.pos,
             "some configuration of " + show(t0) + " can never trigger a reaction of '" +
                 p.name.text + "'",
             {p.name.text}, {show(t0)});
      report_.objects.push_back({p.name.text, p.pos, show(t0), X, isLive, p.stateless});
      auto& so = report_.statics[&p];
      so.type = t0;
      so.patterns = X;
      so.classOk = classOk && isLive;
      so.stateless = p.stateless;
    }
    r.env.erase(self);
    r.deps = restrict(r.deps, self);
    return r;
  }

  // Fills in deferred arguments bound by this binder with the residual protocol
  // left after its other uses, which must form a single configuration.
  void resolveDeferred(Result& r, int self, const TypePtr& t0) {
    for (auto& d : r.deferred) {
      for (size_t i = 0; i < d.pending.size(); ++i)
        for (size_t j = 0; j < d.pending[i].size(); ++j) {
          if (d.pending[i][j] != self) continue;
          d.pending[i][j] = -1;
          TypePtr usage = r.env.count(self) ? normalize(r.env[self]) : one();
          std::vector<std::string> tags;
          if (!singleConfigTags(usage, tags)) {
            d.failed = true;
            d.argTypes[i][j] = one();
            continue;
          }
          TypePtr residual = derivativeConfig(t0, tags, prog_.table);
          d.argTypes[i][j] = residual;
          addUsage(r.env, self, residual);
        }
    }
  }

  void checkRules(int self, const TypePtr& t0, const std::vector<Rule>& rules, const Decls& inner) {
    Decls base = globalsOf(inner);
    base[self] = inner.at(self);
    for (auto& rule : rules) {
      std::vector<PatternMsg> pm;
      std::vector<std::string> tags;
      for (auto& m : rule.pattern) {
        pm.push_back({m.tag, m.vars.size()});
        tags.push_back(m.tag);
      }
      const std::string who = nameOf(self);
      ArgAssignment a;
      try {
        a = engine_.argDeterminate(t0, pm);
      } catch (const ArityError& e) {
        diag(DiagCode::AritySumError, rule.pos, e.what(), {who});
        continue;
      }
      if (a.status != Determinacy::Unique) {
        reportResolution(a, t0, pm, rule.pos, who, true);
        continue;
      }
      Decls rd = base;
      std::vector<std::pair<const Name*, TypePtr>> vars;
      for (size_t i = 0; i < rule.pattern.size(); ++i)
        for (size_t j = 0; j < rule.pattern[i].vars.size(); ++j) {
          const Name& v = rule.pattern[i].vars[j];
          rd[v.id] = {a.args[i][j], false, false};
          vars.push_back({&v, a.args[i][j]});
        }
      checkReaction(self, t0, tags, vars, rule, rd);
    }
  }

  void checkReaction(int self, const TypePtr& t0, const std::vector<std::string>& tags,
                     const std::vector<std::pair<const Name*, TypePtr>>& vars, const Rule& rule,
                     const Decls& rd) {
    Result r = check(rule.body, rd);
    if (!silent_) {
      std::string label = "reaction";
      for (auto& t : tags) label += " " + t;
      report_.dependencies.push_back(
          {label + " of " + nameOf(self) + " at " + showPos(rule.pos), showDeps(r.deps, prog_.names)});
    }
    for (auto& [v, t] : vars) {
      auto it = r.env.find(v->id);
      if (it == r.env.end()) {
        if (relevant(t, prog_.table))
          diag(DiagCode::ObligationUnmet, v->pos,
               "'" + v->text + "' of type " + show(t) + " is never used by the reaction body",
               {v->text}, {show(t)});
      } else {
        requireSub(t, it->second, v->pos, DiagCode::ProtocolViolation,
                   "uses of '" + v->text + "'", {v->text});
      }
      r.env.erase(v->id);
    }
    TypePtr s0 = r.env.count(self) ? r.env[self] : one();
    r.env.erase(self);
    TypePtr rest = derivativeConfig(t0, tags, prog_.table);
    requireSub(t0, prod(rest, s0), rule.pos, DiagCode::ProtocolViolation,
               "state of '" + nameOf(self) + "' after the reaction", {nameOf(self)});
    for (auto& [g, usage] : r.env) {
      auto it = rd.find(g);
      if (it == rd.end() || !it->second.type) continue;
      requireSub(it->second.type, usage, rule.pos, DiagCode::ProtocolViolation,
                 "uses of '" + nameOf(g) + "'", {nameOf(g)});
    }
  }

  TypePtr inferClass(const Proc& p, const Decls& decls) {
    const int self = p.name.id;
    Decls base = globalsOf(decls);
    base[self] = {nullptr, true, true};
    std::vector<TypePtr> summands;
    for (auto& rule : p.rules) {
      Decls rd = base;
      for (auto& m : rule.pattern)
        for (auto& v : m.vars) rd[v.id] = {nullptr, false, false};

      bool savedInferring = inferring_;
      inferring_ = true;
      ++silent_;
      underInference_.insert(self);
      Result r = check(rule.body, rd);
      underInference_.erase(self);
      --silent_;
      inferring_ = savedInferring;

      std::vector<TypePtr> msgs;
      for (auto& m : rule.pattern) {
        std::vector<TypePtr> args;
        for (auto& v : m.vars) {
          TypePtr usage = r.env.count(v.id) ? r.env[v.id] : one();
          for (auto& d : r.deferred) {
            if (d.target != v.id) continue;
            bool unresolved = d.failed;
            for (auto& row : d.pending)
              for (int id : row) unresolved = unresolved || id >= 0;
            if (unresolved) {
              diag(DiagCode::ProtocolViolation, v.pos,
                   "cannot infer the type of parameter '" + v.text + "' of class '" +
                       p.name.text + "'",
                   {v.text, p.name.text});
              return nullptr;
            }
            std::vector<TypePtr> mol;
            for (size_t i = 0; i < d.tags.size(); ++i) mol.push_back(msg(d.tags[i], d.argTypes[i]));
            usage = prod(usage, prod(mol));
          }
          usage = normalize(usage);
          if (!hasMessages(usage)) usage = mentionsBase(usage) ? number() : one();
          args.push_back(usage);
        }
        msgs.push_back(msg(m.tag, args));
      }
      summands.push_back(prod(msgs));
    }
    return star(sum(summands));
  }

  // CLOSURE(u)·R + 1, where R is the slot the object is handed out in and u
  // are the uses the reaction body makes of the captured names.
  TypePtr inferOneShot(const Proc& p, const Decls& decls) {
    if (!p.receiver) {
      diag(DiagCode::ProtocolViolation, p.pos, "object '" + p.name.text + "' has no type",
           {p.name.text});
      return nullptr;
    }
    const Proc& send = *p.receiver->send;
    auto tit = decls.find(send.name.id);
    if (tit == decls.end() || !tit->second.type) {
      if (!inferring_)
        diag(DiagCode::ProtocolViolation, p.pos,
             "cannot infer the type of '" + p.name.text + "': receiver type unknown",
             {p.name.text});
      return nullptr;
    }
    std::vector<PatternMsg> pm;
    for (auto& m : send.msgs) pm.push_back({m.tag, m.args.size()});
    ArgAssignment a;
    try {
      a = engine_.argDeterminate(tit->second.type, pm);
    } catch (const ArityError& e) {
      diag(DiagCode::AritySumError, send.pos, e.what(), {send.name.text});
      return nullptr;
    }
    if (a.status != Determinacy::Unique) {
      reportResolution(a, tit->second.type, pm, send.pos, send.name.text, false);
      return nullptr;
    }
    TypePtr recv = a.args[p.receiver->msgIndex][p.receiver->argIndex];
    if (p.captures.empty()) return sum(recv, one());

    std::string key = std::to_string(reinterpret_cast<uintptr_t>(&p)) + "|" + recv->key;
    std::vector<TypePtr> outer;
    for (auto& c : p.captures) {
      auto it = decls.find(c.id);
      TypePtr t = (it == decls.end()) ? number() : it->second.type;
      outer.push_back(t);
      key += "|" + (t ? t->key : std::string("?"));
    }
    if (auto it = oneShotCache_.find(key); it != oneShotCache_.end()) return it->second;

    Decls base = globalsOf(decls);
    base[p.name.id] = {sum(recv, one()), false, false};
    std::vector<TypePtr> usage(p.captures.size(), nullptr);
    ++silent_;
    for (auto& rule : p.rules) {
      Decls rd = base;
      std::vector<PatternMsg> rest;
      std::vector<const PatMsg*> restMsgs;
      const PatMsg* closure = nullptr;
      for (auto& m : rule.pattern) {
        if (m.tag == "CLOSURE" && !closure) {
          closure = &m;
        } else {
          rest.push_back({m.tag, m.vars.size()});
          restMsgs.push_back(&m);
        }
      }
      if (!closure || closure->vars.size() != p.captures.size()) continue;
      for (size_t i = 0; i < closure->vars.size(); ++i)
        rd[closure->vars[i].id] = {outer[i], false, false};
      ArgAssignment ra = engine_.argDeterminate(recv, rest);
      if (ra.status != Determinacy::Unique) continue;
      for (size_t i = 0; i < restMsgs.size(); ++i)
        for (size_t j = 0; j < restMsgs[i]->vars.size(); ++j)
          rd[restMsgs[i]->vars[j].id] = {ra.args[i][j], false, false};
      Result r = check(rule.body, rd);
      for (size_t i = 0; i < closure->vars.size(); ++i) {
        TypePtr u = r.env.count(closure->vars[i].id) ? r.env[closure->vars[i].id] : one();
        usage[i] = usage[i] ? sum(usage[i], u) : u;
      }
    }
    --silent_;
    for (auto& u : usage)
      if (!u) u = one();
    TypePtr t0 = sum(prod(msg("CLOSURE", usage), recv), one());
    oneShotCache_[key] = t0;
    return t0;
  }
};

}  // namespace

Report checkProgram(const CoreProgram& program, int bound) {
  Report report;
  Checker(program, report, bound).run();
  return report;
}

std::string reportJson(const Report& r) {
  using nlohmann::json;
  json j;
  j["verdict"] = r.accepted ? "accepted" : "rejected";
  j["diagnostics"] = json::array();
  for (auto& d : r.diagnostics)
    j["diagnostics"].push_back({{"code", codeName(d.code)},
                                {"line", d.pos.line},
                                {"col", d.pos.col},
                                {"message", d.message},
                                {"names", d.names},
                                {"types", d.types}});
  j["objects"] = json::array();
  for (auto& o : r.objects)
    j["objects"].push_back({{"name", o.name},
                            {"line", o.pos.line},
                            {"type", o.type},
                            {"patterns", o.patterns},
                            {"live", o.live},
                            {"stateless", o.stateless}});
  j["boundedSubtypeUses"] = json::array();
  for (auto& b : r.bounded)
    j["boundedSubtypeUses"].push_back(
        {{"line", b.pos.line}, {"col", b.pos.col}, {"sub", b.sub}, {"super", b.super}, {"bound", b.bound}});
  return j.dump(2);
}

SolutionVerdict checkSolution(const SolutionView& view, const Report& staticReport, Engine& engine) {
  SolutionVerdict out;
  const TypeTable& tab = engine.table();
  std::map<int, const SolutionObject*> objs;
  for (auto& o : view.objects) objs[o.id] = &o;
  auto label = [&](int id) {
    auto it = objs.find(id);
    return it == objs.end() ? std::to_string(id) : it->second->name + "@" + std::to_string(id);
  };
  auto fail = [&](std::string why) {
    out.ok = false;
    out.problems.push_back(std::move(why));
  };

  for (auto& o : view.objects) {
    if (!o.type) continue;
    if (o.def) {
      auto it = staticReport.statics.find(o.def);
      if (it != staticReport.statics.end() && !it->second.classOk)
        fail("definition of " + label(o.id) + " does not check against " + show(o.type));
    }
    if (!engine.live(o.type, o.patterns)) fail(label(o.id) + " is not live");
  }

  std::map<int, std::vector<const SolutionMessage*>> mailbox;
  for (auto& m : view.messages) mailbox[m.target].push_back(&m);

  Env usage;
  DependencyRelation deps;
  for (auto& [target, msgs] : mailbox) {
    auto oit = objs.find(target);
    if (oit == objs.end() || !oit->second->type) continue;
    const SolutionObject& o = *oit->second;
    std::vector<PatternMsg> pm;
    for (auto* m : msgs) pm.push_back({m->tag, m->args.size()});
    ArgAssignment a = engine.argDeterminate(o.type, pm);
    if (a.status != Determinacy::Unique) {
      fail("messages pending at " + label(target) + " do not fit " + show(o.type));
      continue;
    }
    std::vector<TypePtr> molecule;
    for (size_t i = 0; i < msgs.size(); ++i) {
      std::vector<int> cl;
      for (size_t j = 0; j < msgs[i]->args.size(); ++j) {
        const SolutionArg& arg = msgs[i]->args[j];
        const TypePtr& slot = a.args[i][j];
        if (!arg.object) {
          if (!nullable(slot, tab)) fail("a number sits in slot " + show(slot) + " at " + label(target));
          continue;
        }
        addUsage(usage, arg.id, slot);
        cl.push_back(arg.id);
      }
      molecule.push_back(msg(msgs[i]->tag, a.args[i]));
      if (!o.stateless) cl.push_back(target);
      std::sort(cl.begin(), cl.end());
      if (std::adjacent_find(cl.begin(), cl.end()) != cl.end()) {
        fail("a message at " + label(target) + " repeats a name among target and arguments");
        continue;
      }
      if (cl.size() >= 2) {
        JoinResult j = join(deps, DependencyRelation::clique(cl));
        if (!j.ok()) {
          fail("dependency between " + label(j.witness.first) + " and " + label(j.witness.second) +
               " arises twice");
          deps = mergeBranches(deps, DependencyRelation::clique(cl));
        } else {
          deps = *j.relation;
        }
      }
    }
    addUsage(usage, target, prod(molecule));
  }

  for (auto& o : view.objects) {
    if (!o.type) continue;
    TypePtr u = usage.count(o.id) ? usage[o.id] : one();
    if (!engine.subtype(o.type, u).holds())
      fail(label(o.id) + " is used as " + show(u) + " which " + show(o.type) + " does not allow");
  }
  return out;
}

}  // namespace joinstate
