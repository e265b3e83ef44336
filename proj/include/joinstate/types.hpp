#pragma once

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace joinstate {

enum class Kind { Zero, One, Base, Msg, Sum, Prod, Star, Ref };

struct Type;
using TypePtr = std::shared_ptr<const Type>;

// Immutable type node. Msg keeps its argument types in kids, Sum/Prod are
// n-ary, Star has one kid. Base is #Number/#Bool; semantically it behaves
// like 1 (usable, irrelevant) but it never compares equal to 1.
struct Type {
  Kind kind;
  std::string name;  // tag for Msg, type name for Ref and Base
  std::vector<TypePtr> kids;
  std::string key;   // canonical rendering, used for ordering and memo keys

  Type(Kind k, std::string n, std::vector<TypePtr> c);
  size_t arity() const { return kids.size(); }
};

TypePtr zero();
TypePtr one();
TypePtr base(const std::string& name);
TypePtr number();
TypePtr boolean();
TypePtr msg(const std::string& tag, std::vector<TypePtr> args = {});
TypePtr sum(TypePtr a, TypePtr b);
TypePtr sum(std::vector<TypePtr> parts);
TypePtr prod(TypePtr a, TypePtr b);
TypePtr prod(std::vector<TypePtr> parts);
TypePtr star(TypePtr t);
TypePtr ref(const std::string& name);

bool isBaseName(const std::string& name);

struct TypeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Named, possibly mutually recursive definitions. Head-position reference
// cycles are rejected by resolve(), so unfolding Refs outside message
// arguments always terminates.
class TypeTable {
 public:
  void define(const std::string& name, TypePtr body);
  bool has(const std::string& name) const { return defs_.count(name) > 0; }
  const TypePtr& lookup(const std::string& name) const;
  const std::map<std::string, TypePtr>& defs() const { return defs_; }
  // Checks unknown names and head cycles. Throws TypeError.
  void resolve() const;

 private:
  std::map<std::string, TypePtr> defs_;
};

TypePtr normalize(const TypePtr& t);
bool nullable(const TypePtr& t, const TypeTable& tab);
bool usable(const TypePtr& t, const TypeTable& tab);
inline bool relevant(const TypePtr& t, const TypeTable& tab) { return !nullable(t, tab); }

// Head unfolding: replace a top-level Ref with its body (repeatedly).
TypePtr unfold(const TypePtr& t, const TypeTable& tab);

TypePtr derivative(const TypePtr& t, const std::string& tag, const TypeTable& tab);
TypePtr derivativeConfig(const TypePtr& t, const std::vector<std::string>& tags,
                         const TypeTable& tab);

// A configuration: multiset of message types kept sorted by key.
struct Configuration {
  std::vector<TypePtr> entries;

  void add(TypePtr m);
  size_t size() const { return entries.size(); }
  std::vector<std::string> tags() const;
  std::string key() const;
  bool operator<(const Configuration& o) const { return key() < o.key(); }
  bool operator==(const Configuration& o) const { return key() == o.key(); }
};

Configuration merge(const Configuration& a, const Configuration& b);

// Every valid configuration of t with at most maxSize messages.
std::set<Configuration> enumerateConfigurations(const TypePtr& t, size_t maxSize,
                                                const TypeTable& tab);

// Tag-level view of the same set, computed by walking derivatives.
std::set<std::vector<std::string>> enumerateTagConfigurations(const TypePtr& t, size_t maxSize,
                                                              const TypeTable& tab);

// Surface rendering (· for products).
std::string show(const TypePtr& t);
std::string showConfig(const Configuration& c);

// Message-leaf count of the head unfolding (bounded for recursive names).
size_t leafCount(const TypePtr& t, const TypeTable& tab);

}  // namespace joinstate
