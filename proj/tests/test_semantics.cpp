#include "doctest.h"
#include "psl/parser.hpp"
#include "psl/semantics.hpp"

using namespace psl;
using namespace psl::sem;
using lang::Program;
using lang::Value;
using lang::VarId;

namespace {

VarId vid(const std::string& n, std::vector<std::string> idx = {}) {
  VarId v;
  v.name = n;
  v.idx = std::move(idx);
  return v;
}

Configuration initial(const Program& p, const std::map<VarId, Value>& det = {}) {
  return Configuration{default_store(p, det), Dist::unit(default_rand_memory(p))};
}

}  // namespace

TEST_CASE("eval_det: lookups, arithmetic, lcp") {
  Program p = lang::load_program("det m : nat(9); begin skip end");
  DetStore s = default_store(p, {{vid("m"), Value::of_nat(1)}});
  lang::TypeEnv env{&p, nullptr};
  CHECK(eval_det(s, lang::type_expr(lang::parse_expr("m"), env, {}), p) == Value::of_nat(1));

  Program pz = lang::load_program("det z : zmod(3); begin skip end");
  lang::TypeEnv envz{&pz, nullptr};
  DetStore sz = default_store(pz, {{vid("z"), Value::of_z(3, 2)}});
  CHECK(eval_det(sz, lang::type_expr(lang::parse_expr("z + 2"), envz, {}), pz) ==
        Value::of_z(3, 1));

  // lcp("01","00") = "0"
  CHECK(eval_det(sz, lang::type_expr(lang::parse_expr("lcp(\"01\", \"00\")"), envz, {}), pz) ==
        Value::of_bits(1, 0));
}

TEST_CASE("eval_rand pushforward of m ^ k over the key coin") {
  Program p = lang::load_program(R"(
det m : bitstr(1);
rand k : bitstr(1);
begin skip end
)");
  lang::TypeEnv env{&p, nullptr};
  DetStore s = default_store(p, {{vid("m"), Value::of_bits(1, 1)}});
  Dist mu = Dist::uniform_over({Value::of_bits(1, 0), Value::of_bits(1, 1)}, vid("k"));
  auto push = eval_rand_dist(s, mu, lang::type_expr(lang::parse_expr("m ^ k"), env, {}), p);
  CHECK(push.size() == 2);
  CHECK(push.at(Value::of_bits(1, 0)) == Rat(1, 2));
  CHECK(push.at(Value::of_bits(1, 1)) == Rat(1, 2));

  // constant expressions push to a point mass
  auto c = eval_rand_dist(s, mu, lang::type_expr(lang::parse_expr("\"1\""), env, {}), p);
  CHECK(c.size() == 1);

  // free variables outside both domains are an error
  Dist empty = Dist::unit(RandMemory{});
  CHECK_THROWS(eval_rand_dist(s, empty, lang::type_expr(lang::parse_expr("k"), env, {}), p));
}

TEST_CASE("exec skip is the identity") {
  Program p = lang::load_program("rand x : bool; begin skip end");
  Configuration cfg = initial(p);
  CHECK(exec(p.body, cfg, p) == cfg);
}

TEST_CASE("exec OTP at n=1: ciphertext marginal is a coin") {
  Program p = lang::load_program(R"(
det m : bitstr(1);
rand k, c : bitstr(1);
begin
  k <-$ bitstr(1);
  c := m ^ k
end
)");
  for (int mv = 0; mv < 2; ++mv) {
    Configuration out = exec(
        p.body, initial(p, {{vid("m"), Value::of_bits(1, static_cast<uint64_t>(mv))}}), p);
    Dist marg = out.dist.project({vid("c")});
    CHECK(marg ==
          Dist::uniform_over({Value::of_bits(1, 0), Value::of_bits(1, 1)}, vid("c")));
  }
}

TEST_CASE("exec Example 4.1: z := x or y over two coins") {
  Program p = lang::load_program(R"(
rand x, y, z : bool;
begin
  x <-$ bool;
  y <-$ bool;
  z := x || y
end
)");
  Configuration out = exec(p.body, initial(p), p);
  Dist marg = out.dist.project({vid("z")});
  CHECK(marg.weights().at(RandMemory({{vid("z"), Value::of_bool(true)}})) == Rat(3, 4));
  CHECK(marg.weights().at(RandMemory({{vid("z"), Value::of_bool(false)}})) == Rat(1, 4));
}

TEST_CASE("randomized conditional conditions, executes, and recombines") {
  Program p = lang::load_program(R"(
rand b : bool;
rand x : bool;
begin
  b <-$ bool;
  if b then x := b else x := !b
end
)");
  Configuration out = exec(p.body, initial(p), p);
  // both branches force x = tt
  Dist marg = out.dist.project({vid("x")});
  CHECK(marg == Dist::unit(RandMemory({{vid("x"), Value::of_bool(true)}})));
  // and the guard stays a coin
  CHECK(out.dist.project({vid("b")}) ==
        Dist::uniform_over({Value::of_bool(false), Value::of_bool(true)}, vid("b")));
}

TEST_CASE("rcond with a decided guard equals running the live branch on the conditioned input") {
  Program p = lang::load_program(R"(
rand b, x : bool;
begin
  if b then x := tt else x := ff
end
)");
  // initial distribution: b = tt almost surely (Dirac default is ff; set tt)
  Configuration cfg{default_store(p),
                    Dist::unit(default_rand_memory(p, {{vid("b"), Value::of_bool(true)}}))};
  Configuration out = exec(p.body, cfg, p);
  CHECK(out.dist.project({vid("x")}) ==
        Dist::unit(RandMemory({{vid("x"), Value::of_bool(true)}})));
}

TEST_CASE("deterministic while equals manual unrolling") {
  Program loop = lang::load_program(R"(
det i : nat(5);
rand x : bool;
begin
  i := 1;
  while i <= 3 do {
    x <-$ bool;
    i := i + 1
  }
end
)");
  Program unrolled = lang::load_program(R"(
det i : nat(5);
rand x : bool;
begin
  i := 1;
  x <-$ bool; i := i + 1;
  x <-$ bool; i := i + 1;
  x <-$ bool; i := i + 1
end
)");
  Configuration a = exec(loop.body, initial(loop), loop);
  Configuration b = exec(unrolled.body, initial(unrolled), unrolled);
  CHECK(a.dist == b.dist);
  CHECK(a.store == b.store);
}

TEST_CASE("sequencing composes") {
  Program p = lang::load_program(R"(
rand x, y : bool;
begin
  x <-$ bool;
  y := x
end
)");
  Configuration mid = exec(p.body->c1, initial(p), p);
  Configuration two = exec(p.body->c2, mid, p);
  CHECK(two == exec(p.body, initial(p), p));
}

TEST_CASE("exec preserves total weight and full domain") {
  Program p = lang::load_program(R"(
det i : nat(9);
rand x, y : bitstr(2);
begin
  x <-$ bitstr(2);
  if x[1] = 1 then y := x else skip;
  for i = 1 to 2 do y := y ^ x
end
)");
  Configuration out = exec(p.body, initial(p), p);
  CHECK(out.dist.domain() == p.all_vars(lang::VarKind::Rand));
  Rat total(0);
  for (const auto& [m, w] : out.dist.weights()) {
    (void)m;
    total += w;
  }
  CHECK(total == Rat(1));
}

TEST_CASE("fuel exhaustion is loud") {
  Program p = lang::load_program(R"(
det i : nat(9);
begin
  i := 1;
  while 1 <= 1 do i := 1
end
)");
  Fuel f{100};
  CHECK_THROWS_WITH_AS(exec(p.body, initial(p), p, f), doctest::Contains("budget"), Error);
}
