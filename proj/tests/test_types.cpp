#include "doctest.h"
#include "joinstate/types.hpp"

using namespace joinstate;

namespace {

TypePtr a() { return msg("a"); }
TypePtr b() { return msg("b"); }
TypePtr c() { return msg("c"); }

std::set<std::string> keys(const std::set<Configuration>& cs) {
  std::set<std::string> out;
  for (auto& c : cs) out.insert(showConfig(c));
  return out;
}

}  // namespace

TEST_CASE("normalize drops units and duplicate summands") {
  auto t = prod({one(), a(), sum(b(), c())});
  CHECK(normalize(t)->key == normalize(prod(a(), sum(b(), c())))->key);
  CHECK(normalize(sum(a(), a()))->key == a()->key);
  CHECK(normalize(prod(a(), zero()))->kind == Kind::Zero);
  CHECK(normalize(sum(zero(), a()))->key == a()->key);
  CHECK(normalize(star(star(a())))->key == normalize(star(a()))->key);
  auto n = normalize(t);
  CHECK(normalize(n)->key == n->key);
}

TEST_CASE("distinct normal forms, same configurations") {
  TypeTable tab;
  auto l = sum(prod(a(), b()), prod(a(), c()));
  auto r = prod(a(), sum(b(), c()));
  CHECK(normalize(l)->key != normalize(r)->key);
  CHECK(keys(enumerateConfigurations(l, 2, tab)) == keys(enumerateConfigurations(r, 2, tab)));
}

TEST_CASE("nullable and usable") {
  TypeTable tab;
  CHECK_FALSE(nullable(a(), tab));
  CHECK(nullable(star(prod(a(), b())), tab));
  CHECK_FALSE(usable(zero(), tab));
  CHECK(usable(one(), tab));
  CHECK_FALSE(usable(prod(a(), zero()), tab));
  CHECK(usable(sum(a(), zero()), tab));
  CHECK(nullable(number(), tab));
  CHECK(usable(number(), tab));
  tab.define("#Leaf", msg("LEAF"));
  tab.define("#Branch", msg("BRANCH"));
  tab.define("#Worker", sum({ref("#Leaf"), ref("#Branch"), one()}));
  tab.resolve();
  CHECK(nullable(ref("#Worker"), tab));
}

TEST_CASE("type table rejects head cycles and accepts guarded recursion") {
  TypeTable bad;
  bad.define("#T", sum(ref("#T"), msg("A")));
  CHECK_THROWS_AS(bad.resolve(), TypeError);
  TypeTable good;
  good.define("#T", msg("m", {ref("#T")}));
  CHECK_NOTHROW(good.resolve());
  TypeTable unknown;
  unknown.define("#T", ref("#U"));
  CHECK_THROWS_AS(unknown.resolve(), TypeError);
  CHECK_THROWS_AS(good.define("#T", one()), TypeError);
}

TEST_CASE("configurations of small types") {
  TypeTable tab;
  CHECK(keys(enumerateConfigurations(prod(a(), sum(b(), c())), 3, tab)) ==
        std::set<std::string>{"⟨a, b⟩", "⟨a, c⟩"});
  CHECK(keys(enumerateConfigurations(star(prod(a(), b())), 4, tab)) ==
        std::set<std::string>{"⟨⟩", "⟨a, b⟩", "⟨a, a, b, b⟩"});
  CHECK(enumerateConfigurations(zero(), 10, tab).empty());
}

TEST_CASE("derivatives") {
  TypeTable tab;
  auto t = prod(a(), sum(b(), c()));
  auto ta = derivative(t, "a", tab);
  CHECK(keys(enumerateConfigurations(ta, 3, tab)) == std::set<std::string>{"⟨b⟩", "⟨c⟩"});
  CHECK_FALSE(usable(derivative(t, "d", tab), tab));
  CHECK(derivativeConfig(t, {}, tab)->key == normalize(t)->key);
}

TEST_CASE("tag enumeration agrees with direct enumeration") {
  TypeTable tab;
  auto t = prod(star(sum(a(), prod(b(), c()))), sum(a(), one()));
  auto direct = enumerateConfigurations(t, 4, tab);
  std::set<std::vector<std::string>> tags;
  for (auto& c : direct) tags.insert(c.tags());
  CHECK(tags == enumerateTagConfigurations(t, 4, tab));
}
