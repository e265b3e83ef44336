#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "joinstate/checker.hpp"
#include "joinstate/runtime.hpp"
#include "joinstate/types.hpp"

namespace joinstate {

// Brute-force subtype check over configurations of bounded size. A
// counterexample is exact; holds is only bounded evidence. inconclusive is set
// when some argument comparison ran out of depth and fell back to syntax.
struct OracleVerdict {
  bool holds = true;
  std::optional<Configuration> counterexample;  // a configuration of s
  bool inconclusive = false;
};

OracleVerdict oracleSubtype(const TypePtr& t, const TypePtr& s, size_t maxSize, const TypeTable& tab,
                            int argDepth = 3);

// A configuration of t of size <= maxSize that triggers nothing in X yet
// carries a message with a relevant argument.
std::optional<Configuration> oracleLive(const TypePtr& t, const std::vector<TagMultiset>& X,
                                        size_t maxSize, const TypeTable& tab);

struct TypeGenSpec {
  uint64_t seed = 0;
  int maxDepth = 3;
  int tags = 3;
  double starProb = 0.2;
  double recursionProb = 0.0;  // chance of a self reference in an argument position
  std::string selfName = "#R";
};

struct RandomType {
  TypePtr type;
  TypeTable table;  // holds the self-referencing definition when one was generated
};

RandomType randomType(const TypeGenSpec& spec);

// Algebraic laws, derivative lemmas, join associativity and engine/oracle
// agreement over generated types.
struct LawStats {
  std::string law;
  size_t checked = 0;
  size_t failed = 0;
  size_t bounded = 0;  // held only up to the enumeration bound
  std::vector<std::string> failures;
};

struct AgreementStats {
  size_t pairs = 0;
  size_t agree = 0;
  size_t beyondBound = 0;   // engine refutes with a counterexample larger than the oracle bound
  size_t inconclusive = 0;  // oracle fell back to syntax on arguments; logged for review
  size_t unreviewed = 0;    // genuine disagreements
  std::vector<std::string> log;
};

struct PropertyReport {
  std::vector<LawStats> laws;
  AgreementStats subtype;
  AgreementStats live;
  size_t parikhChecked = 0;
  size_t parikhFailed = 0;
  bool ok() const;
};

PropertyReport runPropertySuite(size_t samples, uint64_t seed, size_t oracleBound = 6);

struct FuzzSummary {
  size_t runs = 0;
  std::map<std::string, size_t> verdicts;
  size_t violations = 0;
  size_t solutionStates = 0;
  size_t solutionFailures = 0;
  std::map<std::string, size_t> outputs;  // printed output joined by spaces
  bool ok = false;
};

struct FuzzOptions {
  size_t seeds = 100;
  uint64_t firstSeed = 0;
  size_t maxSteps = 100000;
  bool checkSolutions = false;
  // Rejected programs: success means every run ends in a monitor verdict.
  bool expectViolation = false;
};

FuzzSummary fuzzSchedules(const CoreProgram& program, const Report& report, const FuzzOptions& options);
std::string fuzzJson(const FuzzSummary& s);

}  // namespace joinstate
