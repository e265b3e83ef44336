#include "joinstate/deps.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace joinstate {

namespace {

// Union-find over arbitrary ids, path compression + union by rank.
class Forest {
 public:
  int find(NameId x) {
    auto it = parent_.find(x);
    if (it == parent_.end()) {
      parent_[x] = x;
      rank_[x] = 0;
      return x;
    }
    NameId root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      NameId next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  // false when x and y were already connected
  bool unite(NameId x, NameId y) {
    NameId rx = find(x), ry = find(y);
    if (rx == ry) return false;
    if (rank_[rx] < rank_[ry]) std::swap(rx, ry);
    parent_[ry] = rx;
    if (rank_[rx] == rank_[ry]) ++rank_[rx];
    return true;
  }

  std::vector<std::vector<NameId>> blocks() {
    std::map<NameId, std::vector<NameId>> groups;
    for (auto& [x, p] : parent_) groups[find(x)].push_back(x);
    std::vector<std::vector<NameId>> out;
    for (auto& [r, g] : groups) {
      if (g.size() < 2) continue;
      std::sort(g.begin(), g.end());
      out.push_back(std::move(g));
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::unordered_map<NameId, NameId> parent_;
  std::unordered_map<NameId, int> rank_;
};

void seed(Forest& f, const DependencyRelation& d) {
  for (auto& b : d.blocks())
    for (size_t i = 1; i < b.size(); ++i) f.unite(b[0], b[i]);
}

}  // namespace

DependencyRelation::DependencyRelation(std::vector<std::vector<NameId>> blocks) : blocks_(std::move(blocks)) {}

DependencyRelation DependencyRelation::pair(NameId u, NameId v) {
  if (u == v) throw SelfDependencyError{u};
  return DependencyRelation({{std::min(u, v), std::max(u, v)}});
}

DependencyRelation DependencyRelation::clique(const std::vector<NameId>& names) {
  std::vector<NameId> b = names;
  std::sort(b.begin(), b.end());
  if (std::adjacent_find(b.begin(), b.end()) != b.end()) throw SelfDependencyError{*std::adjacent_find(b.begin(), b.end())};
  if (b.size() < 2) return DependencyRelation();
  return DependencyRelation({b});
}

bool DependencyRelation::related(NameId u, NameId v) const {
  if (u == v) return false;
  for (auto& b : blocks_) {
    bool hu = std::binary_search(b.begin(), b.end(), u);
    bool hv = std::binary_search(b.begin(), b.end(), v);
    if (hu || hv) return hu && hv;
  }
  return false;
}

std::vector<NameId> DependencyRelation::domain() const {
  std::vector<NameId> out;
  for (auto& b : blocks_) out.insert(out.end(), b.begin(), b.end());
  std::sort(out.begin(), out.end());
  return out;
}

JoinResult join(const DependencyRelation& d1, const DependencyRelation& d2) {
  Forest f;
  seed(f, d1);
  for (auto& b : d2.blocks()) {
    for (size_t i = 1; i < b.size(); ++i) {
      if (!f.unite(b[0], b[i])) {
        JoinResult r;
        r.witness = {b[0], b[i]};
        return r;
      }
    }
  }
  JoinResult r;
  r.relation = DependencyRelation(f.blocks());
  return r;
}

bool compatible(const DependencyRelation& d1, const DependencyRelation& d2) { return join(d1, d2).ok(); }

DependencyRelation restrict(const DependencyRelation& d, NameId a) {
  std::vector<std::vector<NameId>> out;
  for (auto b : d.blocks_) {
    b.erase(std::remove(b.begin(), b.end(), a), b.end());
    if (b.size() >= 2) out.push_back(std::move(b));
  }
  std::sort(out.begin(), out.end());
  return DependencyRelation(std::move(out));
}

DependencyRelation mergeBranches(const DependencyRelation& d1, const DependencyRelation& d2) {
  Forest f;
  seed(f, d1);
  seed(f, d2);
  return DependencyRelation(f.blocks());
}

std::string showDeps(const DependencyRelation& d, const std::map<NameId, std::string>& names) {
  auto nm = [&](NameId id) {
    auto it = names.find(id);
    return it == names.end() ? "#" + std::to_string(id) : it->second;
  };
  std::vector<std::string> rendered;
  for (auto& b : d.blocks()) {
    std::vector<std::string> ns;
    for (auto id : b) ns.push_back(nm(id));
    std::sort(ns.begin(), ns.end());
    std::string s = "{";
    for (size_t i = 0; i < ns.size(); ++i) s += (i ? ", " : "") + ns[i];
    rendered.push_back(s + "}");
  }
  std::sort(rendered.begin(), rendered.end());
  std::string s = "{";
  for (size_t i = 0; i < rendered.size(); ++i) s += (i ? ", " : "") + rendered[i];
  return s + "}";
}

}  // namespace joinstate
