#include <doctest.h>

#include <set>

#include "ctree/error.hpp"
#include "ctree/experiments.hpp"

using namespace ctree;
using namespace ctree::lab;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Unsupported;
}

}  // namespace

TEST_CASE("catalog covers every acceptance criterion exactly once") {
  std::multiset<int> seen;
  std::set<std::string> commands{"codings", "gw", "limits", "crt", "gh", "snake"};
  std::set<std::pair<std::string, std::string>> names;
  for (const auto& e : catalog()) {
    seen.insert(e.criterion);
    CHECK(commands.count(e.command) == 1);
    CHECK_FALSE(e.verifies.empty());
    CHECK(names.emplace(e.command, e.name).second);
    CHECK(static_cast<bool>(e.run));
  }
  for (int c = 1; c <= 16; ++c) {
    CAPTURE(c);
    CHECK(seen.count(c) == 1);
    REQUIRE(find_criterion(c) != nullptr);
    CHECK(find_criterion(c)->criterion == c);
  }
  CHECK(find_experiment("codings", "roundtrip") == find_criterion(1));
  CHECK(find_experiment("codings", "nope") == nullptr);
}

TEST_CASE("settings") {
  Settings s({{"p", "10"}, {"x", "0.5"}, {"list", "1,2.5"}, {"seed", ""}});
  CHECK(s.integer("p") == 10);
  CHECK(s.real("x") == 0.5);
  CHECK(s.reals("list") == std::vector<double>{1, 2.5});
  CHECK(code_of([&] { s.seed(); }) == ErrorCode::ConfigError);
  s.set("seed", "42");
  CHECK(s.seed() == 42);
  CHECK(code_of([&] { s.set("q", "1"); }) == ErrorCode::ConfigError);
  s.set("p", "ten");
  CHECK(code_of([&] { s.integer("p"); }) == ErrorCode::ConfigError);
  s.set("p", "0");
  CHECK(code_of([&] { s.count("p"); }) == ErrorCode::ConfigError);
  s.set("x", "1e-3x");
  CHECK(code_of([&] { s.real("x"); }) == ErrorCode::ConfigError);

  apply_config_text(s, "# comment\n\n  p = 7 \nx=2\n");
  CHECK(s.integer("p") == 7);
  CHECK(s.real("x") == 2.0);
  CHECK(code_of([&] { apply_config_text(s, "p 7\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([&] { apply_config_text(s, "other = 1\n"); }) == ErrorCode::ConfigError);
}

TEST_CASE("stochastic experiments demand a seed") {
  const auto* e = find_experiment("gw", "survival");
  REQUIRE(e);
  auto s = e->settings();
  CHECK(code_of([&] { e->run(s); }) == ErrorCode::ConfigError);
  CHECK_FALSE(find_experiment("codings", "roundtrip")->settings().has("seed"));
}

TEST_CASE("small runs are deterministic and serialize") {
  const auto* e = find_experiment("gw", "survival");
  auto s = e->settings();
  s.set("seed", "3");
  s.set("reps", "500");
  s.set("nmax", "20");
  auto a = e->run(s), b = e->run(s);
  CHECK(a.report.pass);
  CHECK(outcome_json(*e, s, a) == outcome_json(*e, s, b));
  auto csv = outcome_csv(a);
  CHECK(csv.rfind("check,kind,value,threshold,pass\n", 0) == 0);
  CHECK(csv.find("survival/mc_n5,z,") != std::string::npos);

  const auto* r = find_experiment("codings", "roundtrip");
  auto rs = r->settings();
  rs.set("pmax", "8");
  auto out = r->run(rs);
  CHECK(out.report.pass);
  CHECK(out.report.n == 429);
  CHECK(outcome_csv(out).find("8,429,429,0") != std::string::npos);
  rs.set("pmax", "13");
  CHECK(code_of([&] { r->run(rs); }) == ErrorCode::ConfigError);
}

TEST_CASE("exit-measure export ties the path step to the lifetime grid") {
  const auto* e = find_experiment("snake", "exit-measure");
  REQUIRE(e);
  auto s = e->settings();
  s.set("seed", "1");
  s.set("d", "2");
  s.set("radius", "0.2");
  s.set("dt", "1e-4");
  s.set("delta", "1e-3");
  CHECK(code_of([&] { e->run(s); }) == ErrorCode::ConfigError);
  s.set("delta", "0.01");
  auto out = e->run(s);
  CHECK(out.report.pass);
  CHECK(out.table.rfind("x1,x2,weight\n", 0) == 0);
}
