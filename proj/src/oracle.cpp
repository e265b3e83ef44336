#include "joinstate/oracle.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <set>

#include <json.hpp>

namespace joinstate {

namespace {

std::string signature(const Configuration& c) {
  std::string s;
  for (auto& m : c.entries) s += m->name + "/" + std::to_string(m->arity()) + ",";
  return s;
}

class SubtypeOracle {
 public:
  SubtypeOracle(const TypeTable& tab, size_t maxSize) : tab_(tab), maxSize_(maxSize) {}
  bool inconclusive = false;

  std::optional<Configuration> counterexample(const TypePtr& t, const TypePtr& s, int depth) {
    std::map<std::string, std::vector<Configuration>> buckets;
    for (auto& b : enumerateConfigurations(t, maxSize_, tab_)) buckets[signature(b)].push_back(b);
    for (auto& a : enumerateConfigurations(s, maxSize_, tab_)) {
      auto it = buckets.find(signature(a));
      bool found = false;
      if (it != buckets.end())
        for (auto& b : it->second)
          if (matches(a, b, depth)) {
            found = true;
            break;
          }
      if (!found) return a;
    }
    return std::nullopt;
  }

 private:
  const TypeTable& tab_;
  size_t maxSize_;
  std::map<std::string, bool> memo_;

  // sArg <= tArg, i.e. m(t) <= m(s) holds argumentwise.
  bool argLeq(const TypePtr& sArg, const TypePtr& tArg, int depth) {
    if (depth <= 0) {
      bool same = normalize(sArg)->key == normalize(tArg)->key;
      if (!same) inconclusive = true;
      return same;
    }
    std::string key = std::to_string(depth) + "|" + sArg->key + "|" + tArg->key;
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    memo_[key] = true;  // provisional, for recursive argument types
    bool r = !counterexample(sArg, tArg, depth - 1).has_value();
    memo_[key] = r;
    return r;
  }

  bool matches(const Configuration& a, const Configuration& b, int depth) {
    std::vector<char> used(b.entries.size(), 0);
    std::function<bool(size_t)> go = [&](size_t i) {
      if (i == a.entries.size()) return true;
      const TypePtr& ma = a.entries[i];
      for (size_t j = 0; j < b.entries.size(); ++j) {
        const TypePtr& mb = b.entries[j];
        if (used[j] || mb->name != ma->name || mb->arity() != ma->arity()) continue;
        bool ok = true;
        for (size_t k = 0; k < ma->arity() && ok; ++k) ok = argLeq(ma->kids[k], mb->kids[k], depth);
        if (!ok) continue;
        used[j] = 1;
        if (go(i + 1)) return true;
        used[j] = 0;
      }
      return false;
    };
    return go(0);
  }
};

}  // namespace

OracleVerdict oracleSubtype(const TypePtr& t, const TypePtr& s, size_t maxSize, const TypeTable& tab,
                            int argDepth) {
  SubtypeOracle o(tab, maxSize);
  OracleVerdict v;
  v.counterexample = o.counterexample(t, s, argDepth);
  v.holds = !v.counterexample.has_value();
  v.inconclusive = o.inconclusive;
  return v;
}

std::optional<Configuration> oracleLive(const TypePtr& t, const std::vector<TagMultiset>& X,
                                        size_t maxSize, const TypeTable& tab) {
  for (auto& a : enumerateConfigurations(t, maxSize, tab)) {
    std::map<std::string, int> have;
    for (auto& m : a.entries) have[m->name]++;
    bool triggers = false;
    for (auto& B : X) {
      std::map<std::string, int> need;
      for (auto& tag : B) need[tag]++;
      bool sub = true;
      for (auto& [tag, n] : need) sub = sub && have[tag] >= n;
      if (sub) {
        triggers = true;
        break;
      }
    }
    if (triggers) continue;
    for (auto& m : a.entries)
      for (auto& arg : m->kids)
        if (relevant(arg, tab)) return a;
  }
  return std::nullopt;
}

RandomType randomType(const TypeGenSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  auto coin = [&](double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; };
  auto pick = [&](int n) { return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng)); };
  const int ntags = std::max(1, spec.tags);
  auto tagName = [](int i) { return std::string(1, static_cast<char>('a' + i)); };
  // b, e, ... take one argument; a tag keeps its arity everywhere.
  auto arity = [](int i) { return i % 3 == 1 ? 1 : 0; };
  bool recursive = false;
  const std::string& self = spec.selfName;

  std::function<TypePtr(int, bool)> gen = [&](int depth, bool argPos) -> TypePtr {
    if (argPos && spec.recursionProb > 0 && coin(spec.recursionProb)) {
      recursive = true;
      return ref(self);
    }
    if (depth <= 0) {
      std::vector<int> nullary;
      for (int i = 0; i < ntags; ++i)
        if (arity(i) == 0) nullary.push_back(i);
      int c = pick(2 + static_cast<int>(nullary.size()));
      if (c == 0) return zero();
      if (c == 1) return one();
      return msg(tagName(nullary[c - 2]));
    }
    if (coin(spec.starProb)) return star(gen(depth - 1, false));
    switch (pick(4)) {
      case 0: return sum(gen(depth - 1, false), gen(depth - 1, false));
      case 1: return prod(gen(depth - 1, false), gen(depth - 1, false));
      case 2: {
        int i = pick(ntags);
        std::vector<TypePtr> args;
        for (int k = 0; k < arity(i); ++k) args.push_back(gen(depth - 1, true));
        return msg(tagName(i), args);
      }
      default: return gen(0, false);
    }
  };

  RandomType out;
  out.type = gen(spec.maxDepth, false);
  if (recursive) out.table.define(self, out.type);
  return out;
}

FuzzSummary fuzzSchedules(const CoreProgram& program, const Report& report, const FuzzOptions& options) {
  FuzzSummary s;
  Engine engine(program.table);
  bool allFlagged = true;
  for (size_t i = 0; i < options.seeds; ++i) {
    RunOptions ro;
    ro.seed = options.firstSeed + i;
    ro.maxSteps = options.maxSteps;
    ro.monitors = true;
    if (options.checkSolutions)
      ro.observer = [&](const Runtime& rt) {
        ++s.solutionStates;
        if (!checkSolution(rt.solution(), report, engine).ok) ++s.solutionFailures;
      };
    RunResult r = run(program, report, ro);
    ++s.runs;
    s.verdicts[runVerdictName(r.verdict)]++;
    s.violations += r.violations.size();
    std::string out;
    for (auto& line : r.output) out += (out.empty() ? "" : " ") + line;
    s.outputs[out]++;
    if (r.verdict != RunVerdict::Deadlocked && r.verdict != RunVerdict::MonitorViolation)
      allFlagged = false;
  }
  if (options.expectViolation)
    s.ok = allFlagged;
  else
    s.ok = s.violations == 0 && !s.verdicts.count("Deadlocked") &&
           !s.verdicts.count("MonitorViolation") && s.solutionFailures == 0;
  return s;
}

std::string fuzzJson(const FuzzSummary& s) {
  nlohmann::json j;
  j["runs"] = s.runs;
  j["verdicts"] = s.verdicts;
  j["violations"] = s.violations;
  j["solutionStates"] = s.solutionStates;
  j["solutionFailures"] = s.solutionFailures;
  j["distinctOutputs"] = s.outputs.size();
  j["ok"] = s.ok;
  return j.dump(2);
}

}  // namespace joinstate

namespace joinstate {

bool PropertyReport::ok() const {
  for (auto& l : laws)
    if (l.failed) return false;
  return subtype.unreviewed == 0 && live.unreviewed == 0 && parikhFailed == 0;
}

namespace {

struct Sample {
  TypeTable tab;
  TypePtr t, u, v;
};

Sample makeSample(uint64_t seed) {
  Sample s;
  const char* names[] = {"#T", "#U", "#V"};
  TypePtr* slots[] = {&s.t, &s.u, &s.v};
  for (int k = 0; k < 3; ++k) {
    TypeGenSpec g;
    g.seed = seed * 3 + k;
    g.maxDepth = 3;
    g.tags = 4;
    g.starProb = 0.2;
    g.recursionProb = 0.3;
    g.selfName = names[k];
    RandomType r = randomType(g);
    *slots[k] = r.type;
    for (auto& [n, body] : r.table.defs()) s.tab.define(n, body);
  }
  return s;
}

DependencyRelation randomRelation(std::mt19937_64& rng) {
  DependencyRelation d;
  int edges = static_cast<int>(rng() % 4);
  for (int i = 0; i < edges; ++i) {
    int a = static_cast<int>(rng() % 6), b = static_cast<int>(rng() % 6);
    if (a == b) continue;
    JoinResult j = join(d, DependencyRelation::pair(a, b));
    if (j.ok()) d = *j.relation;
  }
  return d;
}

void enumerateVectors(size_t dim, int weight, Vec& cur, size_t i, const std::function<void(const Vec&)>& f) {
  if (i == dim) {
    f(cur);
    return;
  }
  for (int k = 0; k <= weight; ++k) {
    cur[i] = k;
    enumerateVectors(dim, weight - k, cur, i + 1, f);
  }
  cur[i] = 0;
}

}  // namespace

PropertyReport runPropertySuite(size_t samples, uint64_t seed, size_t oracleBound) {
  PropertyReport rep;
  std::map<std::string, LawStats> laws;
  auto record = [&](const std::string& law, const SubtypeResult& r, const std::string& what) {
    LawStats& l = laws[law];
    l.law = law;
    ++l.checked;
    if (r.verdict == Verdict::YesBounded) ++l.bounded;
    if (!r.holds()) {
      ++l.failed;
      if (l.failures.size() < 5) l.failures.push_back(what);
    }
  };
  const std::vector<std::string> tags = {"a", "b", "c", "d"};
  std::mt19937_64 rng(seed);

  for (size_t i = 0; i < samples; ++i) {
    Sample s = makeSample(seed + i);
    Engine e(s.tab);
    const TypePtr &t = s.t, &u = s.u, &v = s.v;
    auto tag = [&](const std::string& law, const std::vector<TypePtr>& ts) {
      std::string w = law + ":";
      for (auto& x : ts) w += " " + show(x);
      return w;
    };
    try {
      record("*t <= *t.*t", e.subtype(star(t), prod(star(t), star(t))), tag("dup", {t}));
      record("*t <= t", e.subtype(star(t), t), tag("star", {t}));
      record("t+u = u+t", e.equivalent(sum(t, u), sum(u, t)), tag("sum-comm", {t, u}));
      record("(t+u)+v = t+(u+v)", e.equivalent(sum(sum(t, u), v), sum(t, sum(u, v))),
             tag("sum-assoc", {t, u, v}));
      record("t+t = t", e.equivalent(sum(t, t), t), tag("sum-idem", {t}));
      record("t.u = u.t", e.equivalent(prod(t, u), prod(u, t)), tag("prod-comm", {t, u}));
      record("(t.u).v = t.(u.v)", e.equivalent(prod(prod(t, u), v), prod(t, prod(u, v))),
             tag("prod-assoc", {t, u, v}));
      record("t+0 = t", e.equivalent(sum(t, zero()), t), tag("sum-unit", {t}));
      record("t.1 = t", e.equivalent(prod(t, one()), t), tag("prod-unit", {t}));
      record("t.0 = 0", e.equivalent(prod(t, zero()), zero()), tag("prod-zero", {t}));
      record("t.(u+v) = t.u+t.v", e.equivalent(prod(t, sum(u, v)), sum(prod(t, u), prod(t, v))),
             tag("distrib", {t, u, v}));
      record("t+u <= t", e.subtype(sum(t, u), t), tag("lower-bound", {t, u}));
      record("t+(t.*u) = t.*u", e.equivalent(sum(t, prod(t, star(u))), prod(t, star(u))),
             tag("absorption", {t, u}));
      const std::string& m = tags[rng() % tags.size()];
      const std::string& n = tags[rng() % tags.size()];
      record("t[m][n] = t[n][m]",
             e.equivalent(derivative(derivative(t, m, s.tab), n, s.tab),
                          derivative(derivative(t, n, s.tab), m, s.tab)),
             tag("deriv-comm " + m + n, {t}));
      // t+u <= t, so the derivatives must stay ordered.
      record("t<=s => t[m]<=s[m]", e.subtype(derivative(sum(t, u), m, s.tab), derivative(t, m, s.tab)),
             tag("deriv-mono " + m, {t, u}));
    } catch (const std::exception& ex) {
      LawStats& l = laws["no exception"];
      l.law = "no exception";
      ++l.checked;
      ++l.failed;
      if (l.failures.size() < 5) l.failures.push_back(ex.what());
    }

    {
      DependencyRelation a = randomRelation(rng), b = randomRelation(rng), c = randomRelation(rng);
      JoinResult ab = join(a, b), bc = join(b, c);
      std::optional<DependencyRelation> left, right;
      if (ab.ok()) {
        JoinResult r = join(*ab.relation, c);
        if (r.ok()) left = r.relation;
      }
      if (bc.ok()) {
        JoinResult r = join(a, *bc.relation);
        if (r.ok()) right = r.relation;
      }
      LawStats& l = laws["join associativity"];
      l.law = "join associativity";
      ++l.checked;
      if (left.has_value() != right.has_value() || (left && !(*left == *right))) ++l.failed;
    }

    // Engine against the enumeration oracle, on independent and law-related pairs.
    std::vector<std::pair<TypePtr, TypePtr>> pairs = {{t, u}, {sum(t, u), t}, {t, sum(t, u)},
                                                      {prod(t, u), t}, {star(t), prod(t, t)}};
    std::vector<std::pair<TypePtr, TypePtr>> chosen = {pairs[0], pairs[1 + i % 4]};
    for (auto& [a, b] : chosen) {
      AgreementStats& st = rep.subtype;
      ++st.pairs;
      SubtypeResult er;
      try {
        er = e.subtype(a, b);
      } catch (const std::exception& ex) {
        ++st.unreviewed;
        st.log.push_back(std::string("engine threw: ") + ex.what());
        continue;
      }
      OracleVerdict ov = oracleSubtype(a, b, oracleBound, s.tab);
      std::string desc = show(a) + " <= " + show(b);
      if (er.holds() == ov.holds) {
        ++st.agree;
      } else if (!er.holds() && er.counterexample && er.counterexample->size() > oracleBound) {
        ++st.beyondBound;
        st.log.push_back("beyond bound: " + desc + " refuted by " + showConfig(*er.counterexample));
      } else if (ov.inconclusive) {
        ++st.inconclusive;
        st.log.push_back("oracle inconclusive: " + desc);
      } else {
        ++st.unreviewed;
        st.log.push_back("disagreement: " + desc + " engine " + showVerdict(er));
      }
    }

    if (i % 5 < 2) {  // two in five samples: 200 liveness pairs per 500
      std::vector<TagMultiset> X;
      int nb = static_cast<int>(rng() % 3);
      std::vector<std::string> all = {"a", "b", "c", "d"};
      for (int k = 0; k < nb; ++k) {
        TagMultiset B;
        int len = 1 + static_cast<int>(rng() % 2);
        for (int q = 0; q < len; ++q) B.push_back(all[rng() % all.size()]);
        std::sort(B.begin(), B.end());
        X.push_back(B);
      }
      AgreementStats& st = rep.live;
      ++st.pairs;
      bool el = e.live(t, X);
      auto ov = oracleLive(t, X, oracleBound, s.tab);
      if (el == !ov.has_value()) {
        ++st.agree;
      } else if (!el) {
        ++st.beyondBound;
        st.log.push_back("live refuted beyond bound: " + show(t));
      } else {
        ++st.unreviewed;
        st.log.push_back("live disagreement: " + show(t) + " at " + showConfig(*ov));
      }
    }

    try {
      const Parikh& p = e.parikhOf(t);
      std::set<std::string> configs;
      for (auto& c : enumerateConfigurations(t, oracleBound, s.tab)) configs.insert(c.key());
      Vec cur(p.alphabet.size(), 0);
      enumerateVectors(p.alphabet.size(), static_cast<int>(oracleBound), cur, 0, [&](const Vec& vec) {
        ++rep.parikhChecked;
        bool inSet = member(vec, p.set);
        bool inEnum = configs.count(configOf(vec, p.alphabet).key()) > 0;
        if (inSet != inEnum) ++rep.parikhFailed;
      });
    } catch (const std::exception&) {
      ++rep.parikhFailed;
    }
  }
  for (auto& [_, l] : laws) rep.laws.push_back(l);
  return rep;
}

}  // namespace joinstate
