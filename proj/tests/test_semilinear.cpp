#include "doctest.h"
#include "joinstate/semilinear.hpp"

using namespace joinstate;

namespace {

TypePtr a() { return msg("a"); }
TypePtr b() { return msg("b"); }
TypePtr c() { return msg("c"); }

TypeTable futureTable() {
  TypeTable tab;
  tab.define("#Reply", msg("Reply", {number()}));
  tab.define("#FutureT", prod(sum(prod(msg("EMPTY"), msg("Resolve", {number()})), msg("RESOLVED", {number()})),
                              star(msg("Get", {ref("#Reply")}))));
  tab.resolve();
  return tab;
}

}  // namespace

TEST_CASE("parikh of a star") {
  TypeTable tab;
  auto p = parikh(star(prod(a(), b())), tab);
  CHECK(p.alphabet.size() == 2);
  CHECK(member({2, 2}, p.set));
  CHECK(member({0, 0}, p.set));
  CHECK_FALSE(member({1, 0}, p.set));
  CHECK_FALSE(member({2, 1}, p.set));
  auto one_ = parikh(one(), tab);
  CHECK(member(Vec{}, one_.set));
  CHECK_THROWS_AS(member({1}, p.set), DimensionError);
}

TEST_CASE("parikh of the future protocol") {
  auto tab = futureTable();
  auto p = parikh(ref("#FutureT"), tab);
  CHECK(p.set.components.size() == 2);
  auto lines = showParikh(p);
  REQUIRE(lines.size() == 2);
  for (auto& l : lines) CHECK(l.find("N·⟨Get(#Reply)⟩") != std::string::npos);
}

TEST_CASE("subtyping examples") {
  TypeTable tab;
  Engine e(tab);
  CHECK(e.subtype(sum(a(), b()), a()).verdict == Verdict::Yes);
  CHECK(e.subtype(msg("m", {a()}), msg("m", {sum(a(), b())})).verdict == Verdict::Yes);
  CHECK(e.subtype(prod(a(), sum(b(), c())), prod(a(), c())).verdict == Verdict::Yes);
  auto no = e.subtype(a(), sum(a(), b()));
  CHECK(no.verdict == Verdict::No);
  REQUIRE(no.counterexample);
  CHECK(showConfig(*no.counterexample) == "⟨b⟩");
  CHECK(e.subtype(msg("m", {sum(a(), b())}), msg("m", {a()})).verdict == Verdict::No);
}

TEST_CASE("star laws close exactly") {
  TypeTable tab;
  Engine e(tab);
  auto t = sum(a(), prod(b(), c()));
  CHECK(e.subtype(star(t), prod(star(t), star(t))).verdict == Verdict::Yes);
  CHECK(e.subtype(star(t), t).verdict == Verdict::Yes);
  CHECK(e.subtype(star(a()), prod(a(), star(a()))).verdict == Verdict::Yes);
}

TEST_CASE("equivalence") {
  TypeTable tab;
  Engine e(tab);
  CHECK(e.equivalent(prod({one(), a(), sum(b(), c())}), prod(a(), sum(b(), c()))).verdict == Verdict::Yes);
  CHECK(e.equivalent(zero(), prod(a(), zero())).holds());
  CHECK_FALSE(e.equivalent(star(msg("m")), msg("m")).holds());
}

TEST_CASE("derivative facts hold exactly") {
  auto tab = futureTable();
  Engine e(tab);
  auto r = derivativeConfig(ref("#FutureT"), {"EMPTY", "Get"}, tab);
  CHECK(e.equivalent(r, prod(msg("Resolve", {number()}), star(msg("Get", {ref("#Reply")})))).verdict ==
        Verdict::Yes);
  CHECK(relevant(r, tab));
  CHECK_FALSE(relevant(derivativeConfig(ref("#FutureT"), {"RESOLVED"}, tab), tab));
  auto ab = star(prod(msg("A"), msg("B")));
  CHECK(e.equivalent(derivative(ab, "B", tab), prod(msg("A"), ab)).verdict == Verdict::Yes);
}

TEST_CASE("recursive argument types") {
  TypeTable tab;
  tab.define("#T", msg("m", {ref("#T")}));
  tab.define("#U", msg("m", {msg("m", {ref("#U")})}));
  tab.resolve();
  Engine e(tab);
  CHECK(e.equivalent(ref("#T"), ref("#U")).verdict == Verdict::Yes);
}

TEST_CASE("arity mismatch is reported") {
  TypeTable tab;
  Engine e(tab);
  CHECK_THROWS_AS(e.subtype(msg("m", {a()}), msg("m")), ArityError);
}

TEST_CASE("liveness") {
  auto tab = futureTable();
  Engine e(tab);
  CHECK(e.live(ref("#FutureT"), {{"EMPTY", "Resolve"}, {"Get", "RESOLVED"}}));
  CHECK_FALSE(e.live(ref("#FutureT"), {{"EMPTY", "Resolve"}}));
  CHECK_FALSE(e.live(msg("m", {msg("Reply", {number()})}), {{"m", "m"}}));
  CHECK(e.live(one(), {}));
}

TEST_CASE("argument determinacy") {
  TypeTable tab;
  Engine e(tab);
  auto t = sum(prod(msg("A"), msg("m", {msg("s1")})), prod(msg("B"), msg("m", {msg("s2")})));
  CHECK(e.argDeterminate(t, {{"m", 1}}).status == Determinacy::Ambiguous);
  auto u = e.argDeterminate(t, {{"A", 0}, {"m", 1}});
  REQUIRE(u.status == Determinacy::Unique);
  CHECK(show(u.args[1][0]) == "s1");
  CHECK(e.argDeterminate(a(), {{"b", 0}}).status == Determinacy::Dead);
}
