#include "joinstate/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include <json.hpp>

namespace joinstate {

std::string showNumber(double n) {
  if (std::isfinite(n) && n == std::floor(n) && std::fabs(n) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f", n);
    return buf;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", n);
  return buf;
}

std::string Value::key() const {
  switch (kind) {
    case Kind::Object: return "@" + std::to_string(id);
    case Kind::Bool: return boolean ? "true" : "false";
    case Kind::Num: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", num);
      return buf;
    }
  }
  return "?";
}

std::string traceKindName(TraceKind k) {
  switch (k) {
    case TraceKind::Fire: return "Fire";
    case TraceKind::Quiesce: return "Quiesce";
    case TraceKind::MonitorViolation: return "MonitorViolation";
    case TraceKind::Print: return "Print";
  }
  return "?";
}

std::string showTraceLine(const TraceEvent& e) {
  return std::to_string(e.step) + "\t" + traceKindName(e.kind) + "\t" + e.object + "\t" + e.tags +
         "\t" + e.detail;
}

std::string traceJson(const std::vector<TraceEvent>& events) {
  nlohmann::json j = nlohmann::json::array();
  for (auto& e : events)
    j.push_back({{"step", e.step},
                 {"kind", traceKindName(e.kind)},
                 {"object", e.object},
                 {"tags", e.tags},
                 {"detail", e.detail}});
  return j.dump(2);
}

std::string runVerdictName(RunVerdict v) {
  switch (v) {
    case RunVerdict::Terminated: return "Terminated";
    case RunVerdict::Deadlocked: return "Deadlocked";
    case RunVerdict::StepBudgetExhausted: return "StepBudgetExhausted";
    case RunVerdict::MonitorViolation: return "MonitorViolation";
  }
  return "?";
}

Runtime::Runtime(const CoreProgram& program, const Report& report, uint64_t seed, bool monitors,
                 bool recordTrace)
    : program_(program), report_(report), rng_(seed), monitors_(monitors), record_(recordTrace) {
  addBuiltin(kSystemId, "System", systemType(), {{"Print"}});
  addBuiltin(kNumberId, "Number", numberObjectType(), {{"Pow"}});
  auto env = std::make_shared<std::map<int, Value>>();
  (*env)[kSystemId] = Value::object(kSystemId);
  (*env)[kNumberId] = Value::object(kNumberId);
  pending_.push_back({program.body, env});
  heat();
  refresh();
}

void Runtime::addBuiltin(int id, const std::string& name, TypePtr type, std::vector<TagMultiset> X) {
  Object o;
  o.id = id;
  o.name = name;
  o.type = std::move(type);
  o.patterns = std::move(X);
  o.stateless = true;
  objects_.push_back(std::move(o));
  refs_.push_back(0);
  relevantResidual_.push_back(0);
  dirty_.insert(id);
}

int Runtime::objectOf(const Value& v) const {
  if (v.kind != Value::Kind::Object || v.id < 0 || static_cast<size_t>(v.id) >= objects_.size())
    throw RuntimeError("message sent to a value that is not an object");
  return v.id;
}

Value Runtime::eval(const ExprPtr& e, const std::map<int, Value>& env) const {
  switch (e->kind) {
    case ExprKind::Var: {
      auto it = env.find(e->var.id);
      if (it == env.end()) throw RuntimeError("unbound name '" + e->var.text + "'");
      return it->second;
    }
    case ExprKind::Num: return Value::number(e->num);
    case ExprKind::Bool: return Value::truth(e->boolean);
    case ExprKind::Neg: {
      Value v = eval(e->kids[0], env);
      if (v.kind != Value::Kind::Num) throw RuntimeError("negation of a non-number");
      return Value::number(-v.num);
    }
    case ExprKind::Binary: {
      Value a = eval(e->kids[0], env), b = eval(e->kids[1], env);
      const std::string& op = e->op;
      if (op == "=" && a.kind == b.kind) return Value::truth(a.key() == b.key());
      if (a.kind != Value::Kind::Num || b.kind != Value::Kind::Num)
        throw RuntimeError("arithmetic on a non-number");
      if (op == "+") return Value::number(a.num + b.num);
      if (op == "-") return Value::number(a.num - b.num);
      if (op == "*") return Value::number(a.num * b.num);
      if (op == "/") return Value::number(a.num / b.num);
      if (op == "%") return Value::number(std::fmod(a.num, b.num));
      if (op == "<") return Value::truth(a.num < b.num);
      if (op == ">") return Value::truth(a.num > b.num);
      if (op == "<=") return Value::truth(a.num <= b.num);
      if (op == ">=") return Value::truth(a.num >= b.num);
      throw RuntimeError("unknown operator " + op);
    }
    case ExprKind::Call:
    case ExprKind::Block: throw RuntimeError("surface expression left in a core program");
  }
  throw RuntimeError("bad expression");
}

void Runtime::deliver(int target, const std::string& tag, std::vector<Value> args) {
  std::string key = tag + "(";
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) key += ",";
    key += args[i].key();
    if (args[i].kind == Value::Kind::Object) refs_[objectOf(args[i])]++;
  }
  key += ")";
  Object& o = objects_[target];
  Mail& m = o.mailbox[key];
  if (m.count == 0) {
    m.tag = tag;
    m.args = std::move(args);
  }
  m.count++;
  o.messages++;
  dirty_.insert(target);
}

void Runtime::heat() {
  while (!pending_.empty()) {
    Pending p = std::move(pending_.back());
    pending_.pop_back();
    const Proc& proc = *p.proc;
    switch (proc.kind) {
      case ProcKind::Done: break;
      case ProcKind::Par:
        for (auto it = proc.kids.rbegin(); it != proc.kids.rend(); ++it) pending_.push_back({*it, p.env});
        break;
      case ProcKind::If: {
        Value c = eval(proc.expr, *p.env);
        if (c.kind != Value::Kind::Bool) throw RuntimeError("condition is not a boolean");
        pending_.push_back({proc.kids[c.boolean ? 0 : 1], p.env});
        break;
      }
      case ProcKind::Let:
        throw RuntimeError("let left in a core program");
      case ProcKind::Send: {
        auto tv = p.env->find(proc.name.id);
        if (tv == p.env->end()) throw RuntimeError("unbound name '" + proc.name.text + "'");
        int target = objectOf(tv->second);
        for (auto& m : proc.msgs) {
          std::vector<Value> args;
          for (auto& a : m.args) args.push_back(eval(a, *p.env));
          deliver(target, m.tag, std::move(args));
        }
        break;
      }
      case ProcKind::New:
      case ProcKind::Class: {
        Object o;
        o.id = static_cast<int>(objects_.size());
        o.name = proc.name.text;
        o.def = &proc;
        o.stateless = proc.stateless;
        auto it = report_.statics.find(&proc);
        if (it != report_.statics.end()) {
          o.type = it->second.type;
          o.patterns = it->second.patterns;
        } else {
          o.type = proc.type;
          for (auto& r : proc.rules) {
            TagMultiset tags;
            for (auto& m : r.pattern) tags.push_back(m.tag);
            std::sort(tags.begin(), tags.end());
            o.patterns.push_back(tags);
          }
        }
        auto env = std::make_shared<std::map<int, Value>>(*p.env);
        (*env)[proc.name.id] = Value::object(o.id);
        o.env = env;
        objects_.push_back(std::move(o));
        refs_.push_back(0);
        relevantResidual_.push_back(0);
        dirty_.insert(static_cast<int>(objects_.size()) - 1);
        pending_.push_back({proc.kids[0], env});
        break;
      }
    }
  }
}

void Runtime::recomputeEnabled(int id) {
  const Object& o = objects_[id];
  std::vector<Enabled>& out = enabled_[id];
  out.clear();
  if (o.messages == 0) return;
  for (size_t r = 0; r < o.patterns.size(); ++r) {
    const TagMultiset& tags = o.patterns[r];  // sorted
    // Group equal tags; for each group pick a multiset of mailbox keys.
    std::vector<std::pair<std::string, size_t>> groups;
    for (auto& t : tags) {
      if (!groups.empty() && groups.back().first == t)
        groups.back().second++;
      else
        groups.push_back({t, 1});
    }
    std::vector<std::vector<std::pair<std::string, size_t>>> candidates;
    bool possible = true;
    for (auto& [tag, k] : groups) {
      std::vector<std::pair<std::string, size_t>> c;
      size_t total = 0;
      for (auto it = o.mailbox.lower_bound(tag + "("); it != o.mailbox.end(); ++it) {
        if (it->second.tag != tag) break;
        c.push_back({it->first, it->second.count});
        total += it->second.count;
      }
      if (total < k) possible = false;
      candidates.push_back(std::move(c));
    }
    if (!possible) continue;
    std::vector<std::string> chosen;
    std::function<void(size_t, size_t, size_t, size_t)> pick = [&](size_t g, size_t from, size_t left,
                                                                     size_t used) {
      if (g == groups.size()) {
        out.push_back({id, r, chosen});
        return;
      }
      if (left == 0) {
        pick(g + 1, 0, g + 1 < groups.size() ? groups[g + 1].second : 0, 0);
        return;
      }
      auto& c = candidates[g];
      for (size_t i = from; i < c.size(); ++i) {
        size_t already = (i == from) ? used : 0;
        if (already >= c[i].second) continue;
        chosen.push_back(c[i].first);
        pick(g, i, left - 1, already + 1);
        chosen.pop_back();
      }
    };
    pick(0, 0, groups.empty() ? 0 : groups[0].second, 0);
  }
}

void Runtime::fenwickSet(int id, size_t count) {
  size_t n = fenwick_.size();
  if (static_cast<size_t>(id) >= n) {
    size_t cap = std::max<size_t>(16, n);
    while (cap <= static_cast<size_t>(id)) cap *= 2;
    // enabled_[id] already holds count, so a rebuild covers it.
    fenwick_.assign(cap, 0);
    for (size_t i = 0; i < enabled_.size(); ++i) {
      size_t c = enabled_[i].size();
      for (size_t j = i + 1; j <= cap; j += j & (~j + 1)) fenwick_[j - 1] += c;
    }
    return;
  }
  // Point update by the difference against the current prefix sums.
  auto prefix = [&](size_t i) {
    size_t s = 0;
    for (size_t j = i; j > 0; j -= j & (~j + 1)) s += fenwick_[j - 1];
    return s;
  };
  size_t current = prefix(id + 1) - prefix(id);
  for (size_t j = id + 1; j <= n; j += j & (~j + 1)) fenwick_[j - 1] += count - current;
}

size_t Runtime::fenwickTotal() const {
  size_t s = 0;
  for (size_t j = fenwick_.size(); j > 0; j -= j & (~j + 1)) s += fenwick_[j - 1];
  return s;
}

int Runtime::fenwickFind(size_t& r) const {
  size_t pos = 0;
  size_t step = 1;
  while (step * 2 <= fenwick_.size()) step *= 2;
  for (; step > 0; step /= 2)
    if (pos + step <= fenwick_.size() && fenwick_[pos + step - 1] <= r) {
      pos += step;
      r -= fenwick_[pos - 1];
    }
  return static_cast<int>(pos);
}

void Runtime::refresh() {
  if (enabled_.size() < objects_.size()) enabled_.resize(objects_.size());
  for (int id : dirty_) {
    recomputeEnabled(id);
    fenwickSet(id, enabled_[id].size());
  }
  if (monitors_) monitor();
  dirty_.clear();
}

std::pair<bool, bool> Runtime::residual(const Object& o) const {
  std::vector<std::string> tags;
  for (auto& [_, m] : o.mailbox)
    for (size_t i = 0; i < m.count; ++i) tags.push_back(m.tag);
  std::string key = o.type->key + "|";
  for (auto& t : tags) key += t + ",";
  auto it = residualCache_.find(key);
  if (it != residualCache_.end()) return it->second;
  TypePtr r = derivativeConfig(o.type, tags, program_.table);
  std::pair<bool, bool> v{usable(r, program_.table), relevant(r, program_.table)};
  residualCache_[key] = v;
  return v;
}

void Runtime::monitor() {
  for (int id : dirty_) {
    const Object& o = objects_[id];
    if (!o.type) continue;
    auto [use, rel] = residual(o);
    if (!use) {
      std::string msg = o.name + "@" + std::to_string(id) + " received more than " + show(o.type) +
                        " allows";
      violations_.push_back(msg);
      event(TraceKind::MonitorViolation, o.name, "", msg);
    }
    // 2 marks an object already reported as lost while its residual stays relevant.
    if (!rel) {
      relevantResidual_[id] = 0;
      relevantObjects_.erase(id);
    } else if (relevantResidual_[id] != 2) {
      relevantResidual_[id] = 1;
      relevantObjects_.insert(id);
    }
  }
  for (auto it = relevantObjects_.begin(); it != relevantObjects_.end();) {
    int id = *it;
    if (refs_[id] == 0) {
      const Object& o = objects_[id];
      std::string msg = o.name + "@" + std::to_string(id) +
                        " still has obligations but no reference to it remains";
      violations_.push_back(msg);
      event(TraceKind::MonitorViolation, o.name, "", msg);
      relevantResidual_[id] = 2;
      it = relevantObjects_.erase(it);
    } else {
      ++it;
    }
  }
}

void Runtime::event(TraceKind k, const std::string& object, const std::string& tags,
                    const std::string& detail) {
  if (record_) trace_.push_back({steps_, k, object, tags, detail});
}

std::vector<Enabled> Runtime::enabledReactions() const {
  std::vector<Enabled> all;
  for (auto& e : enabled_) all.insert(all.end(), e.begin(), e.end());
  return all;
}

size_t Runtime::enabledCount() const { return fenwickTotal(); }

bool Runtime::stepRandom() {
  size_t total = fenwickTotal();
  if (total == 0) return false;
  size_t r = std::uniform_int_distribution<size_t>(0, total - 1)(rng_);
  int id = fenwickFind(r);
  Enabled choice = enabled_[id][r];
  step(choice);
  return true;
}

void Runtime::step(const Enabled& choice) {
  Object& o = objects_[choice.object];
  std::map<std::string, std::vector<std::vector<Value>>> taken;  // by tag, in selection order
  std::vector<std::string> tags;
  for (auto& key : choice.keys) {
    auto it = o.mailbox.find(key);
    if (it == o.mailbox.end() || it->second.count == 0) throw RuntimeError("stale reaction choice");
    taken[it->second.tag].push_back(it->second.args);
    tags.push_back(it->second.tag);
    for (auto& v : it->second.args)
      if (v.kind == Value::Kind::Object) refs_[v.id]--;
    if (--it->second.count == 0) o.mailbox.erase(it);
    o.messages--;
  }
  dirty_.insert(choice.object);
  ++steps_;
  std::string tagText;
  for (size_t i = 0; i < tags.size(); ++i) tagText += (i ? " & " : "") + tags[i];

  if (!o.def) {
    const std::vector<Value>& args = taken.begin()->second[0];
    if (choice.object == kSystemId) {
      std::string text = args.empty() ? "" : (args[0].kind == Value::Kind::Num ? showNumber(args[0].num)
                                                                                : args[0].key());
      output_.push_back(text);
      event(TraceKind::Print, "System", tagText, text);
    } else {
      if (args.size() != 3 || args[0].kind != Value::Kind::Num || args[1].kind != Value::Kind::Num)
        throw RuntimeError("bad Pow request");
      double v = std::pow(args[0].num, args[1].num);
      event(TraceKind::Fire, "Number", tagText, "Pow -> " + showNumber(v));
      deliver(objectOf(args[2]), "Reply", {Value::number(v)});
    }
  } else {
    const Rule& rule = o.def->rules[choice.rule];
    auto env = std::make_shared<std::map<int, Value>>(*o.env);
    std::map<std::string, size_t> next;
    std::string detail;
    for (auto& pm : rule.pattern) {
      const std::vector<Value>& args = taken[pm.tag][next[pm.tag]++];
      for (size_t i = 0; i < pm.vars.size(); ++i) {
        (*env)[pm.vars[i].id] = args[i];
        if (!detail.empty()) detail += ", ";
        const Value& v = args[i];
        detail += pm.vars[i].text + "=" +
                  (v.kind == Value::Kind::Object ? objects_[v.id].name + "@" + std::to_string(v.id)
                   : v.kind == Value::Kind::Num  ? showNumber(v.num)
                                                 : v.key());
      }
    }
    event(TraceKind::Fire, o.name + "@" + std::to_string(o.id), tagText, detail);
    pending_.push_back({rule.body, env});
    heat();
  }
  refresh();
}

std::vector<std::string> Runtime::quiescence() const {
  std::vector<std::string> out;
  for (auto& o : objects_) {
    if (!o.type) continue;
    if (residual(o).second) out.push_back(o.name);
  }
  return out;
}

std::map<std::string, size_t> Runtime::objectsByType() const {
  std::map<std::string, size_t> out;
  for (auto& o : objects_)
    if (o.def && o.type) out[show(o.type)]++;
  return out;
}

SolutionView Runtime::solution() const {
  SolutionView v;
  for (auto& o : objects_) {
    v.objects.push_back({o.id, o.name, o.def, o.type, o.stateless, o.patterns});
    for (auto& [_, m] : o.mailbox) {
      SolutionMessage sm;
      sm.target = o.id;
      sm.tag = m.tag;
      for (auto& a : m.args)
        sm.args.push_back({a.kind == Value::Kind::Object, a.kind == Value::Kind::Object ? a.id : 0});
      for (size_t i = 0; i < m.count; ++i) v.messages.push_back(sm);
    }
  }
  return v;
}

RunResult run(const CoreProgram& program, const Report& report, const RunOptions& options) {
  Runtime rt(program, report, options.seed, options.monitors, options.trace);
  if (options.observer) options.observer(rt);
  RunResult out;
  bool budget = false;
  while (true) {
    if (rt.steps() >= options.maxSteps) {
      budget = rt.enabledCount() > 0;
      if (budget) break;
    }
    if (!rt.stepRandom()) break;
    if (options.observer) options.observer(rt);
  }
  if (!budget) out.deadlocked = rt.quiescence();
  out.steps = rt.steps();
  out.output = rt.output();
  out.violations = rt.violations();
  out.trace = rt.trace();
  if (options.trace) {
    std::string names;
    for (auto& n : out.deadlocked) names += (names.empty() ? "" : ", ") + n;
    out.trace.push_back({rt.steps(), TraceKind::Quiesce, "", "",
                         budget ? "step budget exhausted"
                                : (names.empty() ? "terminated" : "deadlocked: " + names)});
  }
  out.objectsByType = rt.objectsByType();
  out.objectsCreated = rt.objects().size();
  if (!out.violations.empty())
    out.verdict = RunVerdict::MonitorViolation;
  else if (budget)
    out.verdict = RunVerdict::StepBudgetExhausted;
  else if (!out.deadlocked.empty())
    out.verdict = RunVerdict::Deadlocked;
  else
    out.verdict = RunVerdict::Terminated;
  return out;
}

}  // namespace joinstate
