#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "joinstate/checker.hpp"
#include "joinstate/syntax.hpp"

namespace joinstate {

struct Value {
  enum class Kind { Object, Num, Bool } kind = Kind::Num;
  int id = 0;
  double num = 0;
  bool boolean = false;

  static Value object(int id) { return {Kind::Object, id, 0, false}; }
  static Value number(double n) { return {Kind::Num, 0, n, false}; }
  static Value truth(bool b) { return {Kind::Bool, 0, 0, b}; }
  std::string key() const;
};

std::string showNumber(double n);

struct RuntimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TraceKind { Fire, Quiesce, MonitorViolation, Print };
std::string traceKindName(TraceKind k);

struct TraceEvent {
  size_t step = 0;
  TraceKind kind = TraceKind::Fire;
  std::string object;
  std::string tags;
  std::string detail;
};

std::string showTraceLine(const TraceEvent& e);  // TAB separated
std::string traceJson(const std::vector<TraceEvent>& events);

enum class RunVerdict { Terminated, Deadlocked, StepBudgetExhausted, MonitorViolation };
std::string runVerdictName(RunVerdict v);

struct Enabled {
  int object = 0;
  size_t rule = 0;
  std::vector<std::string> keys;  // mailbox keys, one per pattern message
};

class Runtime {
 public:
  // Declared and inferred types come from the checker report; objects whose
  // type could not be determined are not monitored.
  Runtime(const CoreProgram& program, const Report& report, uint64_t seed, bool monitors = true,
          bool recordTrace = false);

  // Enabled reactions of the current (heated) soup.
  std::vector<Enabled> enabledReactions() const;
  size_t enabledCount() const;
  void step(const Enabled& choice);
  // Uniformly random step; false at quiescence.
  bool stepRandom();

  // Objects with a relevant residual; empty means the soup may terminate.
  std::vector<std::string> quiescence() const;

  SolutionView solution() const;

  struct Mail {
    std::string tag;
    std::vector<Value> args;
    size_t count = 0;
  };
  struct Object {
    int id = 0;
    std::string name;
    const Proc* def = nullptr;  // null for builtins
    std::shared_ptr<const std::map<int, Value>> env;
    TypePtr type;
    std::vector<TagMultiset> patterns;
    bool stateless = false;
    std::map<std::string, Mail> mailbox;
    size_t messages = 0;
  };

  const std::vector<Object>& objects() const { return objects_; }
  const std::vector<std::string>& output() const { return output_; }
  const std::vector<TraceEvent>& trace() const { return trace_; }
  const std::vector<std::string>& violations() const { return violations_; }
  size_t steps() const { return steps_; }
  std::map<std::string, size_t> objectsByType() const;

 private:
  using EnvPtr = std::shared_ptr<const std::map<int, Value>>;
  struct Pending {
    ProcPtr proc;
    EnvPtr env;
  };

  const CoreProgram& program_;
  const Report& report_;
  std::mt19937_64 rng_;
  bool monitors_;
  bool record_;
  std::vector<Object> objects_;
  std::vector<Pending> pending_;
  std::vector<std::string> output_;
  std::vector<TraceEvent> trace_;
  std::vector<std::string> violations_;
  size_t steps_ = 0;

  // Enabled reactions per object, with a Fenwick tree over their counts.
  std::vector<std::vector<Enabled>> enabled_;
  std::vector<size_t> fenwick_;
  std::set<int> dirty_;

  // Monitor state: references held in mailbox payloads, cached residuals.
  std::vector<size_t> refs_;
  std::vector<char> relevantResidual_;
  std::set<int> relevantObjects_;
  mutable std::map<std::string, std::pair<bool, bool>> residualCache_;  // usable, relevant

  void heat();
  Value eval(const ExprPtr& e, const std::map<int, Value>& env) const;
  int objectOf(const Value& v) const;
  void deliver(int target, const std::string& tag, std::vector<Value> args);
  void addBuiltin(int id, const std::string& name, TypePtr type, std::vector<TagMultiset> X);
  void refresh();
  void recomputeEnabled(int id);
  void fenwickSet(int id, size_t count);
  size_t fenwickTotal() const;
  int fenwickFind(size_t& r) const;
  std::pair<bool, bool> residual(const Object& o) const;
  void monitor();
  void event(TraceKind k, const std::string& object, const std::string& tags,
             const std::string& detail);
};

struct RunOptions {
  uint64_t seed = 0;
  size_t maxSteps = 100000;
  bool monitors = true;
  bool trace = false;
  // Called on the heated soup before the first step and after every step.
  std::function<void(const Runtime&)> observer;
};

struct RunResult {
  RunVerdict verdict = RunVerdict::Terminated;
  size_t steps = 0;
  std::vector<std::string> output;
  std::vector<std::string> deadlocked;
  std::vector<std::string> violations;
  std::vector<TraceEvent> trace;
  std::map<std::string, size_t> objectsByType;
  size_t objectsCreated = 0;
};

RunResult run(const CoreProgram& program, const Report& report, const RunOptions& options);

}  // namespace joinstate
