#include "doctest.h"
#include "joinstate/deps.hpp"

using namespace joinstate;

TEST_CASE("pair relation") {
  auto d = DependencyRelation::pair(1, 2);
  CHECK(d.related(1, 2));
  CHECK(d.related(2, 1));
  CHECK_FALSE(d.related(1, 1));
  CHECK_THROWS_AS(DependencyRelation::pair(3, 3), SelfDependencyError);
  CHECK(restrict(d, 2).empty());
}

TEST_CASE("join detects shared edges and cycles") {
  auto d = DependencyRelation::pair(1, 2);
  auto r = join(d, d);
  CHECK_FALSE(r.ok());
  CHECK(r.witness == std::pair<NameId, NameId>{1, 2});

  auto d12 = join(DependencyRelation::pair(1, 2), DependencyRelation::pair(3, 4));
  auto d34 = join(DependencyRelation::pair(1, 3), DependencyRelation::pair(2, 4));
  REQUIRE(d12.ok());
  REQUIRE(d34.ok());
  CHECK_FALSE(compatible(*d12.relation, *d34.relation));

  auto ok = join(DependencyRelation::pair(1, 2), DependencyRelation::pair(3, 4));
  CHECK(ok.relation->blocks() == std::vector<std::vector<NameId>>{{1, 2}, {3, 4}});
}

TEST_CASE("restrict") {
  auto abc = DependencyRelation::clique({1, 2, 3});
  CHECK(restrict(abc, 1).blocks() == std::vector<std::vector<NameId>>{{2, 3}});
  CHECK(restrict(DependencyRelation::pair(1, 2), 3) == DependencyRelation::pair(1, 2));
  CHECK(restrict(DependencyRelation::pair(1, 2), 1).empty());
}

TEST_CASE("clique rejects repeated names") {
  CHECK_THROWS_AS(DependencyRelation::clique({4, 5, 4}), SelfDependencyError);
  CHECK(DependencyRelation::clique({7}).empty());
}

TEST_CASE("merging branches tolerates shared edges") {
  auto d = DependencyRelation::pair(1, 2);
  CHECK(mergeBranches(d, d) == d);
  auto m = mergeBranches(DependencyRelation::pair(1, 2), DependencyRelation::pair(2, 3));
  CHECK(m.related(1, 3));
}

TEST_CASE("showDeps sorts names") {
  std::map<NameId, std::string> names{{1, "user"}, {2, "future"}};
  CHECK(showDeps(DependencyRelation::pair(1, 2), names) == "{{future, user}}");
}
