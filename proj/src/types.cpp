#include "joinstate/types.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace joinstate {

namespace {

int rank(Kind k) {
  switch (k) {
    case Kind::Zero: return 0;
    case Kind::One: return 1;
    case Kind::Base: return 2;
    case Kind::Ref: return 3;
    case Kind::Msg: return 4;
    case Kind::Star: return 5;
    case Kind::Prod: return 6;
    case Kind::Sum: return 7;
  }
  return 8;
}

bool before(const TypePtr& a, const TypePtr& b) {
  int ra = rank(a->kind), rb = rank(b->kind);
  if (ra != rb) return ra < rb;
  return a->key < b->key;
}

std::string makeKey(Kind k, const std::string& name, const std::vector<TypePtr>& kids) {
  auto joined = [&](char sep) {
    std::string s;
    for (size_t i = 0; i < kids.size(); ++i) {
      if (i) s += sep;
      s += kids[i]->key;
    }
    return s;
  };
  switch (k) {
    case Kind::Zero: return "0";
    case Kind::One: return "1";
    case Kind::Base: return name;
    case Kind::Ref: return name;
    case Kind::Msg: return kids.empty() ? name : name + "(" + joined(',') + ")";
    case Kind::Sum: return "+(" + joined('|') + ")";
    case Kind::Prod: return ".(" + joined('|') + ")";
    case Kind::Star: return "*(" + kids[0]->key + ")";
  }
  return "?";
}

}  // namespace

Type::Type(Kind k, std::string n, std::vector<TypePtr> c)
    : kind(k), name(std::move(n)), kids(std::move(c)) {
  key = makeKey(kind, name, kids);
}

TypePtr zero() {
  static const TypePtr z = std::make_shared<Type>(Kind::Zero, "", std::vector<TypePtr>{});
  return z;
}
TypePtr one() {
  static const TypePtr o = std::make_shared<Type>(Kind::One, "", std::vector<TypePtr>{});
  return o;
}
TypePtr base(const std::string& name) {
  return std::make_shared<Type>(Kind::Base, name, std::vector<TypePtr>{});
}
TypePtr number() {
  static const TypePtr n = base("#Number");
  return n;
}
TypePtr boolean() {
  static const TypePtr b = base("#Bool");
  return b;
}
bool isBaseName(const std::string& name) { return name == "#Number" || name == "#Bool"; }

TypePtr msg(const std::string& tag, std::vector<TypePtr> args) {
  return std::make_shared<Type>(Kind::Msg, tag, std::move(args));
}
TypePtr sum(TypePtr a, TypePtr b) { return sum(std::vector<TypePtr>{std::move(a), std::move(b)}); }
TypePtr sum(std::vector<TypePtr> parts) {
  if (parts.empty()) return zero();
  if (parts.size() == 1) return parts[0];
  return std::make_shared<Type>(Kind::Sum, "", std::move(parts));
}
TypePtr prod(TypePtr a, TypePtr b) { return prod(std::vector<TypePtr>{std::move(a), std::move(b)}); }
TypePtr prod(std::vector<TypePtr> parts) {
  if (parts.empty()) return one();
  if (parts.size() == 1) return parts[0];
  return std::make_shared<Type>(Kind::Prod, "", std::move(parts));
}
TypePtr star(TypePtr t) { return std::make_shared<Type>(Kind::Star, "", std::vector<TypePtr>{std::move(t)}); }
TypePtr ref(const std::string& name) {
  if (isBaseName(name)) return base(name);
  return std::make_shared<Type>(Kind::Ref, name, std::vector<TypePtr>{});
}

void TypeTable::define(const std::string& name, TypePtr body) {
  if (defs_.count(name)) throw TypeError("duplicate declaration of " + name);
  if (isBaseName(name)) throw TypeError("cannot redefine base type " + name);
  defs_[name] = std::move(body);
}

const TypePtr& TypeTable::lookup(const std::string& name) const {
  auto it = defs_.find(name);
  if (it == defs_.end()) throw TypeError("unknown type name " + name);
  return it->second;
}

void TypeTable::resolve() const {
  // unknown names anywhere
  std::function<void(const TypePtr&)> known = [&](const TypePtr& t) {
    if (t->kind == Kind::Ref && !defs_.count(t->name)) throw TypeError("unknown type name " + t->name);
    for (auto& k : t->kids) known(k);
  };
  for (auto& [n, b] : defs_) known(b);

  // head references: not below a message
  std::function<void(const TypePtr&, std::set<std::string>&)> heads = [&](const TypePtr& t,
                                                                         std::set<std::string>& out) {
    if (t->kind == Kind::Ref) {
      out.insert(t->name);
      return;
    }
    if (t->kind == Kind::Msg) return;
    for (auto& k : t->kids) heads(k, out);
  };
  std::map<std::string, std::set<std::string>> graph;
  for (auto& [n, b] : defs_) heads(b, graph[n]);
  std::map<std::string, int> color;
  std::function<void(const std::string&)> dfs = [&](const std::string& n) {
    color[n] = 1;
    for (auto& m : graph[n]) {
      if (color[m] == 1) throw TypeError("non-contractive definition: " + m + " refers to itself outside message arguments");
      if (color[m] == 0) dfs(m);
    }
    color[n] = 2;
  };
  for (auto& [n, b] : defs_)
    if (color[n] == 0) dfs(n);
}

TypePtr normalize(const TypePtr& t) {
  switch (t->kind) {
    case Kind::Zero:
    case Kind::One:
    case Kind::Base:
    case Kind::Ref:
      return t;
    case Kind::Msg: {
      std::vector<TypePtr> args;
      bool same = true;
      for (auto& a : t->kids) {
        args.push_back(normalize(a));
        same = same && args.back() == a;
      }
      return same ? t : msg(t->name, std::move(args));
    }
    case Kind::Star: {
      auto b = normalize(t->kids[0]);
      if (b->kind == Kind::Zero || b->kind == Kind::One) return one();
      if (b->kind == Kind::Star) return b;
      return star(b);
    }
    case Kind::Sum: {
      std::vector<TypePtr> parts;
      for (auto& k : t->kids) {
        auto n = normalize(k);
        if (n->kind == Kind::Sum)
          parts.insert(parts.end(), n->kids.begin(), n->kids.end());
        else if (n->kind != Kind::Zero)
          parts.push_back(n);
      }
      std::sort(parts.begin(), parts.end(), before);
      parts.erase(std::unique(parts.begin(), parts.end(),
                              [](const TypePtr& a, const TypePtr& b) { return a->key == b->key; }),
                  parts.end());
      return sum(std::move(parts));
    }
    case Kind::Prod: {
      std::vector<TypePtr> parts;
      for (auto& k : t->kids) {
        auto n = normalize(k);
        if (n->kind == Kind::Zero) return zero();
        if (n->kind == Kind::Prod)
          parts.insert(parts.end(), n->kids.begin(), n->kids.end());
        else if (n->kind != Kind::One)
          parts.push_back(n);
      }
      std::sort(parts.begin(), parts.end(), before);
      // repeated base factors carry no information
      std::vector<TypePtr> out;
      for (auto& p : parts)
        if (!(p->kind == Kind::Base && !out.empty() && out.back()->key == p->key)) out.push_back(p);
      return prod(std::move(out));
    }
  }
  return t;
}

TypePtr unfold(const TypePtr& t, const TypeTable& tab) {
  TypePtr cur = t;
  int guard = 0;
  while (cur->kind == Kind::Ref) {
    cur = tab.lookup(cur->name);
    if (++guard > 10000) throw TypeError("unfolding does not terminate for " + t->name);
  }
  return cur;
}

bool nullable(const TypePtr& t, const TypeTable& tab) {
  switch (t->kind) {
    case Kind::Zero: return false;
    case Kind::One: return true;
    case Kind::Base: return true;
    case Kind::Msg: return false;
    case Kind::Star: return true;
    case Kind::Ref: return nullable(unfold(t, tab), tab);
    case Kind::Sum:
      for (auto& k : t->kids)
        if (nullable(k, tab)) return true;
      return false;
    case Kind::Prod:
      for (auto& k : t->kids)
        if (!nullable(k, tab)) return false;
      return true;
  }
  return false;
}

bool usable(const TypePtr& t, const TypeTable& tab) {
  switch (t->kind) {
    case Kind::Zero: return false;
    case Kind::One:
    case Kind::Base:
    case Kind::Msg:
    case Kind::Star: return true;
    case Kind::Ref: return usable(unfold(t, tab), tab);
    case Kind::Sum:
      for (auto& k : t->kids)
        if (usable(k, tab)) return true;
      return false;
    case Kind::Prod:
      for (auto& k : t->kids)
        if (!usable(k, tab)) return false;
      return true;
  }
  return false;
}

namespace {

TypePtr deriv(const TypePtr& t, const std::string& tag, const TypeTable& tab) {
  switch (t->kind) {
    case Kind::Zero:
    case Kind::One:
    case Kind::Base: return zero();
    case Kind::Msg: return t->name == tag ? one() : zero();
    case Kind::Ref: return deriv(unfold(t, tab), tag, tab);
    case Kind::Sum: {
      std::vector<TypePtr> parts;
      for (auto& k : t->kids) parts.push_back(deriv(k, tag, tab));
      return sum(std::move(parts));
    }
    case Kind::Prod: {
      // n-ary form of (t·s)[M] = t·s[M] + t[M]·s
      std::vector<TypePtr> parts;
      for (size_t i = 0; i < t->kids.size(); ++i) {
        std::vector<TypePtr> factors;
        for (size_t j = 0; j < t->kids.size(); ++j)
          factors.push_back(i == j ? deriv(t->kids[j], tag, tab) : t->kids[j]);
        parts.push_back(prod(std::move(factors)));
      }
      return sum(std::move(parts));
    }
    case Kind::Star: return prod(deriv(t->kids[0], tag, tab), t);
  }
  return zero();
}

}  // namespace

TypePtr derivative(const TypePtr& t, const std::string& tag, const TypeTable& tab) {
  return normalize(deriv(t, tag, tab));
}

TypePtr derivativeConfig(const TypePtr& t, const std::vector<std::string>& tags, const TypeTable& tab) {
  TypePtr cur = normalize(t);
  for (auto& m : tags) cur = derivative(cur, m, tab);
  return cur;
}

void Configuration::add(TypePtr m) {
  auto pos = std::upper_bound(entries.begin(), entries.end(), m,
                              [](const TypePtr& a, const TypePtr& b) { return a->key < b->key; });
  entries.insert(pos, std::move(m));
}

std::vector<std::string> Configuration::tags() const {
  std::vector<std::string> out;
  for (auto& e : entries) out.push_back(e->name);
  std::sort(out.begin(), out.end());
  return out;
}

std::string Configuration::key() const {
  std::string s = "<";
  for (size_t i = 0; i < entries.size(); ++i) {
    if (i) s += ",";
    s += entries[i]->key;
  }
  return s + ">";
}

Configuration merge(const Configuration& a, const Configuration& b) {
  Configuration c = a;
  for (auto& e : b.entries) c.add(e);
  return c;
}

namespace {

using ConfigSet = std::set<Configuration>;

ConfigSet productSets(const ConfigSet& a, const ConfigSet& b, size_t maxSize) {
  ConfigSet out;
  for (auto& x : a)
    for (auto& y : b)
      if (x.size() + y.size() <= maxSize) out.insert(merge(x, y));
  return out;
}

ConfigSet enumRec(const TypePtr& t, size_t maxSize, const TypeTable& tab) {
  switch (t->kind) {
    case Kind::Zero: return {};
    case Kind::One:
    case Kind::Base: return {Configuration{}};
    case Kind::Msg: {
      if (maxSize == 0) return {};
      Configuration c;
      c.add(normalize(t));
      return {c};
    }
    case Kind::Ref: return enumRec(unfold(t, tab), maxSize, tab);
    case Kind::Sum: {
      ConfigSet out;
      for (auto& k : t->kids) {
        auto s = enumRec(k, maxSize, tab);
        out.insert(s.begin(), s.end());
      }
      return out;
    }
    case Kind::Prod: {
      ConfigSet acc{Configuration{}};
      for (auto& k : t->kids) acc = productSets(acc, enumRec(k, maxSize, tab), maxSize);
      return acc;
    }
    case Kind::Star: {
      ConfigSet body = enumRec(t->kids[0], maxSize, tab);
      ConfigSet acc{Configuration{}};
      while (true) {
        ConfigSet next = acc;
        auto more = productSets(acc, body, maxSize);
        next.insert(more.begin(), more.end());
        if (next.size() == acc.size()) break;
        acc = std::move(next);
      }
      return acc;
    }
  }
  return {};
}

void headTags(const TypePtr& t, const TypeTable& tab, std::set<std::string>& tags,
              std::set<std::string>& seen) {
  if (t->kind == Kind::Msg) {
    tags.insert(t->name);
    return;
  }
  if (t->kind == Kind::Ref) {
    if (!seen.insert(t->name).second) return;
    headTags(tab.lookup(t->name), tab, tags, seen);
    return;
  }
  for (auto& k : t->kids) headTags(k, tab, tags, seen);
}

}  // namespace

std::set<Configuration> enumerateConfigurations(const TypePtr& t, size_t maxSize, const TypeTable& tab) {
  return enumRec(t, maxSize, tab);
}

std::set<std::vector<std::string>> enumerateTagConfigurations(const TypePtr& t, size_t maxSize,
                                                              const TypeTable& tab) {
  std::set<std::string> alpha, seen;
  headTags(t, tab, alpha, seen);
  std::vector<std::string> tags(alpha.begin(), alpha.end());
  std::set<std::vector<std::string>> out;
  // tags are appended in nondecreasing order; derivative order does not matter
  struct Node {
    TypePtr ty;
    std::vector<std::string> path;
    size_t next;
  };
  std::deque<Node> queue{{normalize(t), {}, 0}};
  while (!queue.empty()) {
    Node n = std::move(queue.front());
    queue.pop_front();
    if (nullable(n.ty, tab)) out.insert(n.path);
    if (n.path.size() == maxSize) continue;
    for (size_t i = n.next; i < tags.size(); ++i) {
      auto d = derivative(n.ty, tags[i], tab);
      if (!usable(d, tab)) continue;
      auto p = n.path;
      p.push_back(tags[i]);
      queue.push_back({d, std::move(p), i});
    }
  }
  return out;
}

namespace {

std::string showPrec(const TypePtr& t, int prec) {
  // prec: 0 sum context, 1 product context, 2 atom context
  switch (t->kind) {
    case Kind::Zero: return "0";
    case Kind::One: return "1";
    case Kind::Base:
    case Kind::Ref: return t->name;
    case Kind::Msg: {
      if (t->kids.empty()) return t->name;
      std::string s = t->name + "(";
      for (size_t i = 0; i < t->kids.size(); ++i) {
        if (i) s += ", ";
        s += showPrec(t->kids[i], 0);
      }
      return s + ")";
    }
    case Kind::Star: return "*" + showPrec(t->kids[0], 2);
    case Kind::Prod: {
      std::string s;
      for (size_t i = 0; i < t->kids.size(); ++i) {
        if (i) s += " · ";
        s += showPrec(t->kids[i], 1);
      }
      return prec > 1 ? "(" + s + ")" : s;
    }
    case Kind::Sum: {
      std::string s;
      for (size_t i = 0; i < t->kids.size(); ++i) {
        if (i) s += " + ";
        s += showPrec(t->kids[i], 0);
      }
      return prec > 0 ? "(" + s + ")" : s;
    }
  }
  return "?";
}

}  // namespace

std::string show(const TypePtr& t) { return showPrec(t, 0); }

std::string showConfig(const Configuration& c) {
  std::string s = "⟨";
  for (size_t i = 0; i < c.entries.size(); ++i) {
    if (i) s += ", ";
    s += show(c.entries[i]);
  }
  return s + "⟩";
}

size_t leafCount(const TypePtr& t, const TypeTable& tab) {
  std::set<std::string> seen;
  std::function<size_t(const TypePtr&)> go = [&](const TypePtr& x) -> size_t {
    if (x->kind == Kind::Msg) return 1;
    if (x->kind == Kind::Ref) {
      if (!seen.insert(x->name).second) return 0;
      return go(tab.lookup(x->name));
    }
    size_t n = 0;
    for (auto& k : x->kids) n += go(k);
    return n;
  };
  return go(t);
}

}  // namespace joinstate
