#include "joinstate/semilinear.hpp"

#include <algorithm>
#include <functional>
#include <limits>

namespace joinstate {

namespace {

constexpr size_t kNoAssumption = std::numeric_limits<size_t>::max();
constexpr size_t kMaxComponents = 20000;

Vec add(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

bool isZero(const Vec& v) {
  return std::all_of(v.begin(), v.end(), [](int x) { return x == 0; });
}

bool leq(const Vec& a, const Vec& b) {
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] > b[i]) return false;
  return true;
}

void collectSlots(const TypePtr& t, const TypeTable& tab, SlotAlphabet& a) {
  switch (t->kind) {
    case Kind::Msg: a.intern(normalize(t)); return;
    case Kind::Ref: collectSlots(tab.lookup(t->name), tab, a); return;
    default:
      for (auto& k : t->kids) collectSlots(k, tab, a);
  }
}

void tidy(LinearSet& l) {
  l.periods.erase(std::remove_if(l.periods.begin(), l.periods.end(), isZero), l.periods.end());
  std::sort(l.periods.begin(), l.periods.end());
  l.periods.erase(std::unique(l.periods.begin(), l.periods.end()), l.periods.end());
}

// every period of `inner` is a nonnegative combination of periods of `outer`
bool periodsGenerated(const std::vector<Vec>& inner, const std::vector<Vec>& outer) {
  for (auto& p : inner) {
    LinearSet z{Vec(p.size(), 0), outer};
    if (!member(p, z)) return false;
  }
  return true;
}

bool includedIn(const LinearSet& a, const LinearSet& b) {
  return member(a.base, b) && periodsGenerated(a.periods, b.periods);
}

SemilinearSet simplify(SemilinearSet s) {
  for (auto& l : s.components) tidy(l);
  std::sort(s.components.begin(), s.components.end());
  s.components.erase(std::unique(s.components.begin(), s.components.end()), s.components.end());
  if (s.components.size() > kMaxComponents) throw TypeError("semilinear representation too large");
  if (s.components.size() > 400) return s;
  std::vector<bool> drop(s.components.size(), false);
  for (size_t i = 0; i < s.components.size(); ++i) {
    for (size_t j = 0; j < s.components.size() && !drop[i]; ++j) {
      if (i == j || drop[j]) continue;
      if (includedIn(s.components[i], s.components[j])) drop[i] = true;
    }
  }
  SemilinearSet out;
  for (size_t i = 0; i < s.components.size(); ++i)
    if (!drop[i]) out.components.push_back(s.components[i]);
  return out;
}

SemilinearSet product(const SemilinearSet& a, const SemilinearSet& b) {
  SemilinearSet out;
  for (auto& x : a.components)
    for (auto& y : b.components) {
      LinearSet l{add(x.base, y.base), x.periods};
      l.periods.insert(l.periods.end(), y.periods.begin(), y.periods.end());
      out.components.push_back(std::move(l));
      if (out.components.size() > kMaxComponents) throw TypeError("semilinear representation too large");
    }
  return simplify(std::move(out));
}

SemilinearSet build(const TypePtr& t, const TypeTable& tab, SlotAlphabet& a, size_t dim) {
  switch (t->kind) {
    case Kind::Zero: return {};
    case Kind::One:
    case Kind::Base: return {{LinearSet{Vec(dim, 0), {}}}};
    case Kind::Msg: {
      Vec v(dim, 0);
      v[a.intern(normalize(t))] = 1;
      return {{LinearSet{v, {}}}};
    }
    case Kind::Ref: return build(tab.lookup(t->name), tab, a, dim);
    case Kind::Sum: {
      SemilinearSet out;
      for (auto& k : t->kids) {
        auto s = build(k, tab, a, dim);
        out.components.insert(out.components.end(), s.components.begin(), s.components.end());
      }
      return simplify(std::move(out));
    }
    case Kind::Prod: {
      SemilinearSet acc{{LinearSet{Vec(dim, 0), {}}}};
      for (auto& k : t->kids) acc = product(acc, build(k, tab, a, dim));
      return acc;
    }
    case Kind::Star: {
      auto body = build(t->kids[0], tab, a, dim);
      SemilinearSet acc{{LinearSet{Vec(dim, 0), {}}}};
      for (auto& l : body.components) {
        SemilinearSet factor;
        if (isZero(l.base) || l.periods.empty()) {
          // (0;∅) ∪ (b;{b}) is just (0;{b})
          LinearSet grown{Vec(dim, 0), l.periods};
          grown.periods.push_back(l.base);
          factor.components.push_back(grown);
        } else {
          factor.components.push_back(LinearSet{Vec(dim, 0), {}});
          LinearSet once = l;
          once.periods.push_back(l.base);
          factor.components.push_back(once);
        }
        acc = product(acc, simplify(std::move(factor)));
      }
      return acc;
    }
  }
  return {};
}

std::string showVecAsConfig(const Vec& v, const SlotAlphabet& a) {
  return showConfig(configOf(v, a));
}

}  // namespace

size_t SlotAlphabet::intern(const TypePtr& m) {
  std::string k = m->name + "/" + std::to_string(m->arity()) + "(";
  for (size_t i = 0; i < m->kids.size(); ++i) k += (i ? "," : "") + m->kids[i]->key;
  k += ")";
  auto it = index.find(k);
  if (it != index.end()) return it->second;
  slots.push_back(Slot{m->name, m->kids, k});
  index[k] = slots.size() - 1;
  return slots.size() - 1;
}

Parikh parikh(const TypePtr& t, const TypeTable& tab) {
  Parikh p;
  TypePtr n = normalize(t);
  collectSlots(n, tab, p.alphabet);
  p.set = build(n, tab, p.alphabet, p.alphabet.size());
  return p;
}

bool member(const Vec& v, const LinearSet& l) {
  if (v.size() != l.base.size()) throw DimensionError("dimension mismatch in membership test");
  for (auto& p : l.periods)
    if (p.size() != v.size()) throw DimensionError("dimension mismatch in membership test");
  if (!leq(l.base, v)) return false;
  Vec d(v.size());
  for (size_t i = 0; i < v.size(); ++i) d[i] = v[i] - l.base[i];
  std::set<Vec> seen;
  std::vector<Vec> todo{d};
  while (!todo.empty()) {
    Vec cur = std::move(todo.back());
    todo.pop_back();
    if (isZero(cur)) return true;
    if (!seen.insert(cur).second) continue;
    for (auto& p : l.periods) {
      if (!leq(p, cur)) continue;
      Vec next(cur.size());
      for (size_t i = 0; i < cur.size(); ++i) next[i] = cur[i] - p[i];
      todo.push_back(std::move(next));
    }
  }
  return false;
}

bool member(const Vec& v, const SemilinearSet& s) {
  for (auto& l : s.components)
    if (member(v, l)) return true;
  return false;
}

Configuration configOf(const Vec& v, const SlotAlphabet& a) {
  Configuration c;
  for (size_t i = 0; i < v.size(); ++i)
    for (int k = 0; k < v[i]; ++k) c.add(msg(a.slots[i].tag, a.slots[i].args));
  return c;
}

std::vector<std::string> showParikh(const Parikh& p) {
  std::vector<std::string> out;
  for (auto& l : p.set.components) {
    std::string s = showVecAsConfig(l.base, p.alphabet);
    for (auto& q : l.periods) s += " + N·" + showVecAsConfig(q, p.alphabet);
    out.push_back(s);
  }
  return out;
}

std::string showVerdict(const SubtypeResult& r) {
  switch (r.verdict) {
    case Verdict::Yes: return "Yes";
    case Verdict::YesBounded: return "YesBounded(" + std::to_string(r.bound) + ")";
    case Verdict::No:
      return "No" + (r.counterexample ? "(" + showConfig(*r.counterexample) + ")" : std::string());
  }
  return "?";
}

const Parikh& Engine::parikhOf(const TypePtr& t) {
  TypePtr n = normalize(t);
  auto it = parikhCache_.find(n->key);
  if (it != parikhCache_.end()) return it->second;
  return parikhCache_.emplace(n->key, parikh(n, tab_)).first->second;
}

SubtypeResult Engine::subtype(const TypePtr& t, const TypePtr& s) {
  stack_.clear();
  Outcome o = check(normalize(t), normalize(s));
  SubtypeResult r;
  r.verdict = o.verdict;
  r.counterexample = o.counterexample;
  if (o.verdict == Verdict::YesBounded) r.bound = bound_;
  return r;
}

SubtypeResult Engine::equivalent(const TypePtr& t, const TypePtr& s) {
  auto a = subtype(t, s);
  if (a.verdict == Verdict::No) return a;
  auto b = subtype(s, t);
  if (b.verdict == Verdict::No) return b;
  SubtypeResult r;
  if (a.verdict == Verdict::YesBounded || b.verdict == Verdict::YesBounded) {
    r.verdict = Verdict::YesBounded;
    r.bound = bound_;
  }
  return r;
}

namespace {

Verdict combine(Verdict a, Verdict b) {
  if (a == Verdict::No || b == Verdict::No) return Verdict::No;
  if (a == Verdict::YesBounded || b == Verdict::YesBounded) return Verdict::YesBounded;
  return Verdict::Yes;
}

}  // namespace

Engine::Outcome Engine::check(const TypePtr& t, const TypePtr& s) {
  if (t->key == s->key) return {Verdict::Yes, std::nullopt, kNoAssumption};
  const std::string pairKey = t->key + " <= " + s->key;
  if (auto it = memo_.find(pairKey); it != memo_.end()) return it->second;
  for (size_t i = 0; i < stack_.size(); ++i)
    if (stack_[i] == pairKey) return {Verdict::Yes, std::nullopt, i};

  const size_t depth = stack_.size();
  stack_.push_back(pairKey);
  Outcome result{Verdict::Yes, std::nullopt, kNoAssumption};

  auto finish = [&](Outcome o) {
    stack_.pop_back();
    if (o.verdict == Verdict::No || o.lowest >= depth) {
      Outcome stored = o;
      if (stored.lowest >= depth) stored.lowest = kNoAssumption;
      memo_[pairKey] = stored;
    }
    return o;
  };

  if (nullable(s, tab_) && !nullable(t, tab_)) return finish({Verdict::No, Configuration{}, kNoAssumption});

  // copies: recursive checks may grow the cache
  const Parikh ps = parikhOf(s);
  const Parikh pt = parikhOf(t);

  std::map<std::string, size_t> arityOf;
  for (auto& sl : pt.alphabet.slots) arityOf[sl.tag] = sl.arity();
  for (auto& sl : ps.alphabet.slots) {
    auto it = arityOf.find(sl.tag);
    if (it != arityOf.end() && it->second != sl.arity()) {
      stack_.pop_back();
      throw ArityError("tag " + sl.tag + " used with arities " + std::to_string(it->second) + " and " +
                       std::to_string(sl.arity()));
    }
  }

  // which t-slots can stand in for each s-slot (contravariant arguments)
  std::vector<std::vector<size_t>> compat(ps.alphabet.size());
  for (size_t cs = 0; cs < ps.alphabet.size(); ++cs) {
    const Slot& a = ps.alphabet.slots[cs];
    for (size_t ct = 0; ct < pt.alphabet.size(); ++ct) {
      const Slot& b = pt.alphabet.slots[ct];
      if (a.tag != b.tag || a.arity() != b.arity()) continue;
      Verdict v = Verdict::Yes;
      for (size_t i = 0; i < a.arity() && v != Verdict::No; ++i) {
        Outcome o = check(normalize(a.args[i]), normalize(b.args[i]));
        result.lowest = std::min(result.lowest, o.lowest);
        v = combine(v, o.verdict);
      }
      if (v == Verdict::No) continue;
      if (v == Verdict::YesBounded) result.verdict = combine(result.verdict, Verdict::YesBounded);
      compat[cs].push_back(ct);
    }
  }

  for (auto& l : ps.set.components) {
    if (covered(l, compat, pt, 0)) continue;
    // bounded search over period coefficients
    std::optional<Vec> bad;
    std::function<void(size_t, int, Vec)> walk = [&](size_t i, int budget, Vec v) {
      if (bad) return;
      if (i == l.periods.size()) {
        if (!matchable(v, compat, pt)) bad = v;
        return;
      }
      for (int k = 0; k <= budget && !bad; ++k) {
        walk(i + 1, budget - k, v);
        v = add(v, l.periods[i]);
      }
    };
    walk(0, bound_, l.base);
    if (bad) return finish({Verdict::No, configOf(*bad, ps.alphabet), result.lowest});
    if (!l.periods.empty()) result.verdict = combine(result.verdict, Verdict::YesBounded);
  }
  return finish(result);
}

bool Engine::covered(const LinearSet& l, const std::vector<std::vector<size_t>>& compat, const Parikh& pt,
                     int depth) {
  const size_t dim = l.base.size();
  std::vector<size_t> used;
  for (size_t c = 0; c < dim; ++c) {
    bool u = l.base[c] > 0;
    for (auto& p : l.periods) u = u || p[c] > 0;
    if (u) {
      if (compat[c].empty()) return false;
      used.push_back(c);
    }
  }
  const size_t tdim = pt.alphabet.size();
  std::vector<size_t> choice(dim, 0);
  int budget = 256;
  std::function<bool(size_t)> tryAssign = [&](size_t i) -> bool {
    if (budget-- <= 0) return false;
    if (i == used.size()) {
      auto mapVec = [&](const Vec& v) {
        Vec w(tdim, 0);
        for (size_t c : used) w[compat[c][choice[c]]] += v[c];
        return w;
      };
      Vec wb = mapVec(l.base);
      std::vector<Vec> wp;
      for (auto& p : l.periods) wp.push_back(mapVec(p));
      for (auto& comp : pt.set.components)
        if (member(wb, comp) && periodsGenerated(wp, comp.periods)) return true;
      return false;
    }
    size_t c = used[i];
    for (size_t k = 0; k < compat[c].size(); ++k) {
      choice[c] = k;
      if (tryAssign(i + 1)) return true;
    }
    return false;
  };
  if (tryAssign(0)) return true;
  if (depth >= 3 || l.periods.empty()) return false;
  // split (b; P) into (b; P \ {p}) and (b + p; P)
  for (size_t i = 0; i < l.periods.size(); ++i) {
    LinearSet without{l.base, {}};
    for (size_t j = 0; j < l.periods.size(); ++j)
      if (j != i) without.periods.push_back(l.periods[j]);
    LinearSet shifted{add(l.base, l.periods[i]), l.periods};
    if (covered(without, compat, pt, depth + 1) && covered(shifted, compat, pt, depth + 1)) return true;
  }
  return false;
}

bool Engine::matchable(const Vec& v, const std::vector<std::vector<size_t>>& compat, const Parikh& pt) {
  const size_t tdim = pt.alphabet.size();
  Vec w(tdim, 0);
  int budget = 20000;
  std::function<bool(size_t)> go = [&](size_t c) -> bool {
    if (budget-- <= 0) return false;
    while (c < v.size() && v[c] == 0) ++c;
    if (c == v.size()) return member(w, pt.set);
    if (compat[c].empty()) return false;
    // distribute v[c] copies over compatible t-slots
    std::function<bool(size_t, int)> spread = [&](size_t k, int left) -> bool {
      if (k + 1 == compat[c].size()) {
        w[compat[c][k]] += left;
        bool ok = go(c + 1);
        w[compat[c][k]] -= left;
        return ok;
      }
      for (int x = left; x >= 0; --x) {
        w[compat[c][k]] += x;
        bool ok = spread(k + 1, left - x);
        w[compat[c][k]] -= x;
        if (ok) return true;
      }
      return false;
    };
    return spread(0, v[c]);
  };
  return go(0);
}

bool Engine::live(const TypePtr& t, const std::vector<TagMultiset>& X) {
  const Parikh& p = parikhOf(t);
  const size_t dim = p.alphabet.size();
  std::set<std::string> alphabetTags;
  for (auto& s : p.alphabet.slots) alphabetTags.insert(s.tag);

  std::vector<std::map<std::string, int>> bs;
  for (auto& B : X) {
    std::map<std::string, int> counts;
    bool possible = true;
    for (auto& m : B) {
      counts[m]++;
      possible = possible && alphabetTags.count(m);
    }
    if (possible && !counts.empty()) bs.push_back(std::move(counts));
  }

  std::vector<size_t> relevantSlots;
  for (size_t c = 0; c < dim; ++c)
    for (auto& a : p.alphabet.slots[c].args)
      if (relevant(a, tab_)) {
        relevantSlots.push_back(c);
        break;
      }
  if (relevantSlots.empty()) return true;

  for (auto& l : p.set.components) {
    std::map<std::string, int> limit;
    auto within = [&](const Vec& v) {
      std::map<std::string, int> totals;
      for (size_t c = 0; c < dim; ++c) totals[p.alphabet.slots[c].tag] += v[c];
      for (auto& [m, lim] : limit)
        if (totals[m] > lim) return false;
      return true;
    };
    bool violated = false;
    std::function<void(size_t)> choose = [&](size_t i) {
      if (violated) return;
      if (i == bs.size()) {
        if (!within(l.base)) return;
        for (size_t c : relevantSlots) {
          if (l.base[c] >= 1) {
            violated = true;
            return;
          }
          for (auto& q : l.periods)
            if (q[c] >= 1 && within(add(l.base, q))) {
              violated = true;
              return;
            }
        }
        return;
      }
      for (auto& [m, k] : bs[i]) {
        auto saved = limit;
        auto it = limit.find(m);
        limit[m] = it == limit.end() ? k - 1 : std::min(it->second, k - 1);
        choose(i + 1);
        limit = std::move(saved);
        if (violated) return;
      }
    };
    choose(0);
    if (violated) return false;
  }
  return true;
}

ArgAssignment Engine::argDeterminate(const TypePtr& t, const std::vector<PatternMsg>& pattern) {
  const Parikh p = parikhOf(t);
  const size_t dim = p.alphabet.size();
  ArgAssignment out;

  // group pattern messages by (tag, arity)
  std::vector<std::pair<PatternMsg, int>> groups;
  for (auto& m : pattern) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](auto& g) { return g.first.tag == m.tag && g.first.arity == m.arity; });
    if (it == groups.end())
      groups.push_back({m, 1});
    else
      it->second++;
  }
  std::vector<std::vector<size_t>> cands(groups.size());
  for (size_t g = 0; g < groups.size(); ++g) {
    for (size_t c = 0; c < dim; ++c)
      if (p.alphabet.slots[c].tag == groups[g].first.tag && p.alphabet.slots[c].arity() == groups[g].first.arity)
        cands[g].push_back(c);
    if (cands[g].empty()) return out;  // Dead
  }

  auto extendable = [&](const Vec& S) {
    for (auto& l : p.set.components) {
      bool ok = true;
      for (size_t c = 0; c < dim && ok; ++c) {
        if (S[c] <= l.base[c]) continue;
        ok = std::any_of(l.periods.begin(), l.periods.end(), [&](const Vec& q) { return q[c] > 0; });
      }
      if (ok) return true;
    }
    return false;
  };

  std::vector<Vec> feasible;
  Vec S(dim, 0);
  std::function<void(size_t, size_t, int)> spread = [&](size_t g, size_t k, int left) {
    if (g == groups.size()) {
      if (extendable(S)) feasible.push_back(S);
      return;
    }
    auto& cs = cands[g];
    if (k + 1 == cs.size()) {
      S[cs[k]] += left;
      spread(g + 1, 0, g + 1 < groups.size() ? groups[g + 1].second : 0);
      S[cs[k]] -= left;
      return;
    }
    for (int x = left; x >= 0; --x) {
      S[cs[k]] += x;
      spread(g, k + 1, left - x);
      S[cs[k]] -= x;
    }
  };
  spread(0, 0, groups[0].second);
  if (feasible.empty()) return out;

  auto sameArgs = [&](size_t a, size_t b) {
    if (a == b) return true;
    auto& x = p.alphabet.slots[a].args;
    auto& y = p.alphabet.slots[b].args;
    for (size_t i = 0; i < x.size(); ++i) {
      Engine sub(tab_, bound_);
      if (!sub.equivalent(x[i], y[i]).holds()) return false;
    }
    return true;
  };

  // every feasible selection must use slots equivalent to one representative per group
  std::vector<size_t> rep(groups.size());
  for (size_t g = 0; g < groups.size(); ++g)
    for (size_t c : cands[g])
      if (feasible[0][c] > 0) {
        rep[g] = c;
        break;
      }
  out.status = Determinacy::Unique;
  for (auto& f : feasible)
    for (size_t g = 0; g < groups.size(); ++g)
      for (size_t c : cands[g])
        if (f[c] > 0 && !sameArgs(c, rep[g])) out.status = Determinacy::Ambiguous;
  if (out.status == Determinacy::Ambiguous) return out;

  for (auto& m : pattern) {
    for (size_t g = 0; g < groups.size(); ++g)
      if (groups[g].first.tag == m.tag && groups[g].first.arity == m.arity) {
        out.args.push_back(p.alphabet.slots[rep[g]].args);
        break;
      }
  }
  return out;
}

}  // namespace joinstate
