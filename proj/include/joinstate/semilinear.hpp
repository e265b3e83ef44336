#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "joinstate/types.hpp"

namespace joinstate {

using Vec = std::vector<int>;

// A message type class: tag, arity and the canonical argument vector.
struct Slot {
  std::string tag;
  std::vector<TypePtr> args;
  std::string key;
  size_t arity() const { return args.size(); }
};

struct SlotAlphabet {
  std::vector<Slot> slots;
  std::map<std::string, size_t> index;

  size_t intern(const TypePtr& message);  // message is a normalized Msg
  size_t size() const { return slots.size(); }
};

struct LinearSet {
  Vec base;
  std::vector<Vec> periods;
  bool operator<(const LinearSet& o) const {
    return std::tie(base, periods) < std::tie(o.base, o.periods);
  }
  bool operator==(const LinearSet& o) const { return base == o.base && periods == o.periods; }
};

struct SemilinearSet {
  std::vector<LinearSet> components;
  bool empty() const { return components.empty(); }
};

struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ArityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Parikh {
  SlotAlphabet alphabet;
  SemilinearSet set;
};

Parikh parikh(const TypePtr& t, const TypeTable& tab);

bool member(const Vec& v, const LinearSet& l);
bool member(const Vec& v, const SemilinearSet& s);

// One line per linear set: `base + N·p1 + N·p2`.
std::vector<std::string> showParikh(const Parikh& p);
Configuration configOf(const Vec& v, const SlotAlphabet& a);

enum class Verdict { Yes, No, YesBounded };

struct SubtypeResult {
  Verdict verdict = Verdict::Yes;
  std::optional<Configuration> counterexample;  // a configuration of the supertype
  int bound = 0;
  bool holds() const { return verdict != Verdict::No; }
};

std::string showVerdict(const SubtypeResult& r);

enum class Determinacy { Unique, Ambiguous, Dead };

struct ArgAssignment {
  Determinacy status = Determinacy::Dead;
  // For each requested pattern message (in request order): resolved argument types.
  std::vector<std::vector<TypePtr>> args;
};

// Pattern message: tag plus arity.
struct PatternMsg {
  std::string tag;
  size_t arity;
};

using TagMultiset = std::vector<std::string>;  // sorted

class Engine {
 public:
  explicit Engine(const TypeTable& tab, int bound = 4) : tab_(tab), bound_(bound) {}

  SubtypeResult subtype(const TypePtr& t, const TypePtr& s);
  SubtypeResult equivalent(const TypePtr& t, const TypePtr& s);
  bool live(const TypePtr& t, const std::vector<TagMultiset>& X);
  ArgAssignment argDeterminate(const TypePtr& t, const std::vector<PatternMsg>& pattern);

  const Parikh& parikhOf(const TypePtr& t);
  const TypeTable& table() const { return tab_; }
  int bound() const { return bound_; }

 private:
  struct Outcome {
    Verdict verdict;
    std::optional<Configuration> counterexample;
    size_t lowest;  // shallowest in-progress assumption used
  };
  Outcome check(const TypePtr& t, const TypePtr& s);
  bool covered(const LinearSet& l, const std::vector<std::vector<size_t>>& compat, const Parikh& pt,
               int depth);
  bool matchable(const Vec& v, const std::vector<std::vector<size_t>>& compat, const Parikh& pt);

  const TypeTable& tab_;
  int bound_;
  std::map<std::string, Parikh> parikhCache_;
  std::map<std::string, Outcome> memo_;
  std::vector<std::string> stack_;
};

}  // namespace joinstate
