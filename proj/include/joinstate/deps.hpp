#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace joinstate {

struct JoinResult;

// Names are binder ids; the display map is only for rendering.
using NameId = int;

// Dependency relation as a partition of names into cliques. Singletons are
// never stored.
class DependencyRelation {
 public:
  DependencyRelation() = default;

  static DependencyRelation pair(NameId u, NameId v);  // throws on u == v
  static DependencyRelation clique(const std::vector<NameId>& names);

  const std::vector<std::vector<NameId>>& blocks() const { return blocks_; }
  bool empty() const { return blocks_.empty(); }
  bool related(NameId u, NameId v) const;
  std::vector<NameId> domain() const;
  bool operator==(const DependencyRelation& o) const { return blocks_ == o.blocks_; }

 private:
  explicit DependencyRelation(std::vector<std::vector<NameId>> blocks);
  std::vector<std::vector<NameId>> blocks_;  // each sorted, list sorted

  friend JoinResult join(const DependencyRelation&, const DependencyRelation&);
  friend DependencyRelation restrict(const DependencyRelation&, NameId);
  friend DependencyRelation mergeBranches(const DependencyRelation&, const DependencyRelation&);
};

struct JoinResult {
  std::optional<DependencyRelation> relation;  // empty when incompatible
  std::pair<NameId, NameId> witness{0, 0};
  bool ok() const { return relation.has_value(); }
};

struct SelfDependencyError {
  NameId name;
};

JoinResult join(const DependencyRelation& d1, const DependencyRelation& d2);
DependencyRelation restrict(const DependencyRelation& d, NameId a);
bool compatible(const DependencyRelation& d1, const DependencyRelation& d2);

// Union for mutually exclusive branches: transitive closure of the union,
// without the disjointness requirement of join.
DependencyRelation mergeBranches(const DependencyRelation& d1, const DependencyRelation& d2);

std::string showDeps(const DependencyRelation& d, const std::map<NameId, std::string>& names);

}  // namespace joinstate
