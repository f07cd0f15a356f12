#include "doctest.h"
#include "psl/corpus.hpp"
#include "support/testutil.hpp"

using namespace psl;
using namespace testutil;
using oracle::DistFamily;
using oracle::Judgment;
using oracle::Universe;
using oracle::Verdict;

namespace {

Universe make_universe(const Program& p, const std::vector<std::string>& det,
                       const std::vector<std::string>& rnd) {
  Universe u;
  u.prog = &p;
  lang::TypeEnv env{&p, nullptr};
  for (const auto& s : det) {
    auto e = lang::type_expr(lang::parse_expr(s), env, {});
    u.vary_det.push_back(*e->vid);
  }
  for (const auto& s : rnd) {
    auto e = lang::type_expr(lang::parse_expr(s), env, {});
    u.vary_rand.push_back(*e->vid);
  }
  return u;
}

Judgment judgment_of(const Program& p, const std::string& pre, const std::string& post) {
  return Judgment{resolved(bi::parse_formula(pre), p), p.body,
                  resolved(bi::parse_formula(post), p)};
}

}  // namespace

TEST_CASE("configuration enumeration counts") {
  Program p = lang::load_program("det d : bool; rand x : bool; begin skip end");
  Universe u = make_universe(p, {"d"}, {"x"});
  DistFamily dirac_only;
  dirac_only.subset_max = 0;
  long n = 0;
  oracle::enumerate_configs(u, dirac_only, [&](const dist::Configuration&) {
    ++n;
    return true;
  });
  CHECK(n == 4);  // 2 stores x 2 Dirac memories

  // subset-uniform tier over one boolean: {ff}, {tt}, {ff,tt}
  DistFamily subsets;
  subsets.dirac = false;
  subsets.subset_max = 8;
  long m = 0;
  oracle::enumerate_family(u, subsets, [&](const Dist&) {
    ++m;
    return true;
  });
  CHECK(m == 3);
}

TEST_CASE("random tier is reproducible for a fixed seed") {
  Program p = bool_universe({"x", "y"});
  Universe u = make_universe(p, {}, {"x", "y"});
  DistFamily fam;
  fam.dirac = false;
  fam.subset_max = 0;
  fam.random_count = 50;
  fam.seed = 99;
  std::vector<std::string> first, second;
  oracle::enumerate_family(u, fam, [&](const Dist& d) {
    first.push_back(d.table());
    return true;
  });
  oracle::enumerate_family(u, fam, [&](const Dist& d) {
    second.push_back(d.table());
    return true;
  });
  CHECK(first == second);
  fam.seed = 100;
  std::vector<std::string> third;
  oracle::enumerate_family(u, fam, [&](const Dist& d) {
    third.push_back(d.table());
    return true;
  });
  CHECK(first != third);
}

TEST_CASE("budget violations are explicit") {
  Program p = bool_universe({"a", "b", "c", "d", "e", "f"});
  Universe u = make_universe(p, {}, {"a", "b", "c", "d", "e", "f"});
  u.config_budget = 100;
  DistFamily fam;  // subsets over 64 memories explode past 100
  CHECK_THROWS_WITH_AS(oracle::family_count(u, fam) > 0 &&
                           oracle::enumerate_configs(u, fam, [](const dist::Configuration&) {
                             return true;
                           }) > 0,
                       doctest::Contains("budget"), Error);
}

TEST_CASE("judgment falsification finds the guard-copy counterexample") {
  Program p = lang::load_program(
      "rand b, x : bool; begin if b then x := tt else x := ff end");
  Universe u = make_universe(p, {}, {"b", "x"});
  Judgment j = judgment_of(p, "T", "D[x] * D[b]");
  Verdict v = oracle::falsify_judgment(j, u, DistFamily{});
  REQUIRE(v.found());
  // a correlated-or-uniform b is required; Diracs all satisfy the post
  CHECK(v.witness->dist.support_size() >= 2);
  CHECK(v.output.has_value());
}

TEST_CASE("{T} skip {F} falsifies at the first configuration") {
  Program p = lang::load_program("rand x : bool; begin skip end");
  Universe u = make_universe(p, {}, {"x"});
  Judgment j = judgment_of(p, "T", "F");
  Verdict v = oracle::falsify_judgment(j, u, DistFamily{});
  REQUIRE(v.found());
  CHECK(v.checked == 1);
}

TEST_CASE("OTP uniformity judgment survives the family") {
  Program p = lang::load_program(R"(
det m : bitstr(2);
rand k, c : bitstr(2);
begin
  k <-$ bitstr(2);
  c := m ^ k
end
)");
  Universe u = make_universe(p, {"m"}, {"k"});
  DistFamily fam;
  fam.random_count = 50;
  Judgment j = judgment_of(p, "T", "U[c]");
  Verdict v = oracle::falsify_judgment(j, u, fam);
  CHECK(!v.found());
  CHECK(v.checked > 0);
}

TEST_CASE("fuel exhaustion surfaces as a distinct verdict") {
  Program p = lang::load_program(R"(
det i : nat(2);
rand x : bool;
begin
  i := 1;
  while 1 <= 1 do i := 1
end
)");
  Universe u = make_universe(p, {}, {"x"});
  Judgment j = judgment_of(p, "T", "T");
  sem::Fuel fuel{50};
  Verdict v = oracle::falsify_judgment(j, u, DistFamily{}, fuel);
  CHECK(v.kind == Verdict::FuelExhausted);
}

TEST_CASE("direct uniformity check: OTP passes, the broken scheme fails") {
  Program good = lang::load_program(R"(
det m : bitstr(2);
rand k, c : bitstr(2);
begin
  k <-$ bitstr(2);
  c := m ^ k
end
)");
  Universe u = make_universe(good, {"m"}, {});
  oracle::SecuritySpec spec;
  spec.kind = oracle::SecuritySpec::Uniformity;
  spec.post = resolved(bi::parse_formula("U[c]"), good);
  auto rep = oracle::check_security_direct(good, spec, u, DistFamily{});
  CHECK(rep.pass);
  CHECK(rep.runs == 4);

  Program bad = lang::load_program(R"(
det m : bitstr(2);
rand k, c : bitstr(2);
begin
  k <-$ bitstr(2);
  c := m
end
)");
  Universe ub = make_universe(bad, {"m"}, {});
  oracle::SecuritySpec spec2;
  spec2.kind = oracle::SecuritySpec::Uniformity;
  spec2.post = resolved(bi::parse_formula("U[c]"), bad);
  auto rep2 = oracle::check_security_direct(bad, spec2, ub, DistFamily{});
  CHECK(!rep2.pass);
  CHECK(rep2.witness.has_value());
}

TEST_CASE("direct uniformity agrees with satisfies on every run") {
  Program p = lang::load_program(R"(
det m : bitstr(1);
rand k, c : bitstr(1);
begin
  k <-$ bitstr(1);
  c := m ^ k
end
)");
  bi::FormP post = resolved(bi::parse_formula("U[c]"), p);
  for (int mv = 0; mv < 2; ++mv) {
    lang::VarId m;
    m.name = "m";
    dist::Configuration cfg{
        sem::default_store(p, {{m, Value::of_bits(1, static_cast<uint64_t>(mv))}}),
        Dist::unit(sem::default_rand_memory(p))};
    dist::Configuration out = sem::exec(p.body, cfg, p);
    CHECK(bi::satisfies(out, post, p));
  }
}

TEST_CASE("independence check ranges secret inputs over the family") {
  Program p = lang::load_program(R"(
rand m, k, c : bitstr(1);
begin
  k <-$ bitstr(1);
  c := m ^ k
end
)");
  Universe u = make_universe(p, {}, {"m"});
  oracle::SecuritySpec spec;
  spec.kind = oracle::SecuritySpec::Independence;
  lang::VarId m, c;
  m.name = "m";
  c.name = "c";
  spec.pairs.emplace_back(lang::VarSet{m}, lang::VarSet{c});
  DistFamily fam;
  fam.random_count = 100;
  auto rep = oracle::check_security_direct(p, spec, u, fam);
  CHECK(rep.pass);

  // leaking the message breaks independence on a non-degenerate input
  Program bad = lang::load_program(R"(
rand m, k, c : bitstr(1);
begin
  k <-$ bitstr(1);
  c := m
end
)");
  Universe ub = make_universe(bad, {}, {"m"});
  auto rep2 = oracle::check_security_direct(bad, spec, ub, fam);
  CHECK(!rep2.pass);
}
