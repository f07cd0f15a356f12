#include "doctest.h"
#include "support/testutil.hpp"

using namespace psl;
using namespace testutil;
using lang::VarSet;

namespace {

Dist coin(const std::string& x) {
  return Dist::uniform_over({Value::of_bool(false), Value::of_bool(true)}, rvar(x));
}

Dist correlated_pair(const std::string& x, const std::string& y) {
  std::map<Memory, Rat> w;
  w[Memory({{rvar(x), Value::of_bool(false)}, {rvar(y), Value::of_bool(false)}})] = Rat(1, 2);
  w[Memory({{rvar(x), Value::of_bool(true)}, {rvar(y), Value::of_bool(true)}})] = Rat(1, 2);
  return Dist::make({rvar(x), rvar(y)}, std::move(w));
}

bool sat_text(const Program& p, const Dist& mu, const std::string& f) {
  Configuration cfg{sem::default_store(p), mu};
  return bi::satisfies(cfg, resolved(bi::parse_formula(f), p), p);
}

}  // namespace

TEST_CASE("independent coins satisfy U[x] * U[y]") {
  Program p = bool_universe({"x", "y"});
  CHECK(sat_text(p, coin("x").product(coin("y")), "U[x] * U[y]"));
}

TEST_CASE("correlated coins: U /\\ U holds but U * U fails") {
  Program p = bool_universe({"x", "y"});
  Dist corr = correlated_pair("x", "y");
  CHECK(sat_text(p, corr, "U[x] /\\ U[y]"));
  CHECK(!sat_text(p, corr, "U[x] * U[y]"));
}

TEST_CASE("point distributions factor") {
  Program p = bool_universe({"x", "y"});
  Dist pt = Dist::unit(Memory({{rvar("x"), Value::of_bool(true)},
                               {rvar("y"), Value::of_bool(false)}}));
  CHECK(sat_text(p, pt, "D[x] * D[y]"));
}

TEST_CASE("atoms fail outside the distribution domain") {
  Program p = bool_universe({"x", "y"});
  CHECK(!sat_text(p, coin("x"), "U[y]"));
  CHECK(!sat_text(p, coin("x"), "D[y]"));
  CHECK(sat_text(p, coin("x"), "T"));
  CHECK(!sat_text(p, coin("x"), "F"));
}

TEST_CASE("conditioned Example-4.1 output loses independence") {
  // z := x \/ y over two coins, conditioned on z = tt:
  // 1/3 on each of (tt,ff),(ff,tt),(tt,tt)
  Program p = bool_universe({"x", "y", "z"});
  std::map<Memory, Rat> w;
  auto m3 = [&](bool x, bool y) {
    return Memory({{rvar("x"), Value::of_bool(x)},
                   {rvar("y"), Value::of_bool(y)},
                   {rvar("z"), Value::of_bool(true)}});
  };
  w[m3(true, false)] = Rat(1, 3);
  w[m3(false, true)] = Rat(1, 3);
  w[m3(true, true)] = Rat(1, 3);
  Dist cond = Dist::make({rvar("x"), rvar("y"), rvar("z")}, std::move(w));
  CHECK(sat_text(p, cond, "D[x] /\\ D[y]"));
  CHECK(!sat_text(p, cond, "D[x] * D[y]"));
}

TEST_CASE("implication and magic wand decide only at full domain") {
  Program p = bool_universe({"x", "y"});
  Dist full = coin("x").product(coin("y"));
  CHECK(sat_text(p, full, "U[x] -> U[x]"));
  CHECK(sat_text(p, full, "F -> U[y]"));
  // partial-domain implication is an unsupported fragment
  Configuration partial{sem::default_store(p), coin("x")};
  CHECK_THROWS_AS(
      bi::satisfies(partial, resolved(bi::parse_formula("U[x] -> U[x]"), p), p), Error);
  // -* against a full world quantifies over empty extensions only
  CHECK(sat_text(p, full, "U[x] -* U[x]"));
  CHECK(sat_text(p, full, "(x ~ tt) -* F"));  // x ~ tt fails at the empty extension
}

TEST_CASE("fv_formula splits by kind") {
  Program p = lang::load_program(R"(
det m : bitstr(2);
rand c, k, x, y : bitstr(2);
begin skip end
)");
  auto fv = bi::fv_formula(resolved(bi::parse_formula("U[x] * U[y]"), p), p);
  CHECK(fv.det.empty());
  CHECK(fv.rand.size() == 2);
  auto fv2 = bi::fv_formula(resolved(bi::parse_formula("c ~ m ^ k"), p), p);
  CHECK(fv2.det.size() == 1);
  CHECK(fv2.rand.size() == 2);
  auto fv3 = bi::fv_formula(resolved(bi::parse_formula("T"), p), p);
  CHECK(fv3.det.empty());
  CHECK(fv3.rand.empty());
}

TEST_CASE("footprint under-approximates the forced domain") {
  Program p = bool_universe({"x", "y"}, {"d"});
  auto fp = [&](const std::string& f) {
    return bi::footprint(resolved(bi::parse_formula(f), p), p);
  };
  CHECK(fp("U[x] * D[y]") == VarSet{rvar("x"), rvar("y")});
  CHECK(fp("d = tt").empty());
  CHECK(fp("D[x] \\/ U[y]").empty());
  CHECK(fp("D[x] \\/ D[x] * U[y]") == VarSet{rvar("x")});
}

TEST_CASE("sp_class accepts exactly the supported grammar") {
  Program p = lang::load_program(R"(
det e : nat(9);
rand k, x : bool;
rand q : bitstr(2);
begin skip end
)");
  auto sp = [&](const std::string& f) {
    return bi::sp_class(resolved(bi::parse_formula(f), p), p);
  };
  CHECK(sp("U[k] * x ~ tt"));
  CHECK(sp("e = 3"));
  CHECK(sp("U[q]"));
  CHECK(!sp("D[x]"));          // x ~ x mentions a random variable on the right
  CHECK(!sp("U[x] /\\ U[k]")); // plain conjunction is not supported
  CHECK(!sp("U[q[1]]"));       // uniformity of a compound expression
  CHECK(!sp("x ~ k"));
}

TEST_CASE("cm_class accepts mixtures-closed formulas") {
  Program p = bool_universe({"x", "y"}, {"d"});
  auto cm = [&](const std::string& f) {
    return bi::cm_class(resolved(bi::parse_formula(f), p), p);
  };
  CHECK(cm("U[x] /\\ U[y]"));
  CHECK(!bi::sp_class(resolved(bi::parse_formula("U[x] /\\ U[y]"), p), p));
  CHECK(cm("U[x] * (d = tt)"));          // SP left of a CM tail
  CHECK(cm("U[x] * (U[y] /\\ d = tt)"));
  CHECK(!cm("D[x] * D[y]"));             // the Appendix-A counterexample shape
  CHECK(cm("d = tt"));
}

TEST_CASE("substitution instantiates indices and bounds") {
  Program p = lang::load_program(R"(
det i : nat(9);
rand r : bool[4];
begin skip end
)");
  bi::FormulaEnv env{&p, {}};
  bi::FormP f = bi::resolve_formula(bi::parse_formula("i <= 3"), env);
  bi::FormP g = bi::subst_formula(f, "i", lang::parse_expr("i + 1"));
  CHECK(bi::print_formula(bi::resolve_formula(g, env)) == "i + 1 <= 3");

  bi::FormP atom = bi::resolve_formula(bi::parse_formula("i = 2"), env);
  bi::FormP inst = bi::subst_formula(atom, "i", lang::mk_lit(Value::of_nat(2)));
  CHECK(bi::print_formula(inst) == "2 = 2");

  // empty range collapses to the unit of *
  bi::FormP big = bi::resolve_formula(bi::parse_formula("bigsep a in [1,i) : U[r[a]]"),
                                      bi::FormulaEnv{&p, {"i"}});
  bi::FormP at1 = bi::subst_formula(big, "i", lang::mk_lit(Value::of_nat(1)));
  CHECK(bi::fkey(bi::expand_big(bi::resolve_formula(at1, env), env)) == "T");
}

TEST_CASE("expand_big builds finite trees") {
  Program p = lang::load_program(R"(
rand pa : bool[3];
begin skip end
)");
  bi::FormulaEnv env{&p, {}};
  bi::FormP f = bi::expand_big(
      bi::resolve_formula(bi::parse_formula("bigsep a in [1,3] : U[pa[a]]"), env), env);
  CHECK(bi::print_formula(f) == "U[pa[1]] * (U[pa[2]] * U[pa[3]])");
  bi::FormP empty = bi::expand_big(
      bi::resolve_formula(bi::parse_formula("bigand a in [1,0] : U[pa[a]]"), env), env);
  CHECK(empty->kind == bi::FKind::Top);
  bi::FormP excl = bi::expand_big(
      bi::resolve_formula(bi::parse_formula("bigand a in [1,3] \\ {2} : U[pa[a]]"), env), env);
  CHECK(bi::print_formula(excl) == "U[pa[1]] /\\ U[pa[3]]");
  CHECK_THROWS(bi::expand_big(
      bi::resolve_formula(bi::parse_formula("bigand a in [1,i] : U[pa[a]]"),
                          bi::FormulaEnv{&p, {"i"}}),
      env));
}

// ---------------------------------------------------------------------------
// lemma-level property tests

TEST_CASE("restriction: truth depends only on the free-variable marginal") {
  std::vector<std::string> vars = {"x", "y", "z", "w"};
  Program p = bool_universe(vars);
  std::mt19937_64 rng(101);
  int checked = 0;
  for (int t = 0; t < 1000; ++t) {
    bi::FormP f = resolved(gen_formula(vars, rng, 2), p);
    Dist mu = random_bool_dist(vars, rng);
    Configuration cfg{sem::default_store(p), mu};
    VarSet fv = bi::fv_formula(f, p).rand;
    Dist proj = mu.project(fv);
    bool a = bi::satisfies(cfg, f, p);
    bool b = bi::satisfies(Configuration{cfg.store, proj}, f, p);
    CHECK(a == b);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("kripke monotonicity on the Imp-free fragment") {
  std::vector<std::string> vars = {"x", "y", "z", "w"};
  Program p = bool_universe(vars);
  std::mt19937_64 rng(102);
  for (int t = 0; t < 1000; ++t) {
    bi::FormP f = resolved(gen_formula({"x", "y"}, rng, 2), p);
    Dist big = random_bool_dist(vars, rng);
    VarSet sub = bi::fv_formula(f, p).rand;
    for (const auto& v : vars)
      if (rng() % 2) sub.insert(rvar(v));
    Dist small = big.project(sub);
    Configuration lo{sem::default_store(p), small};
    Configuration hi{sem::default_store(p), big};
    if (bi::satisfies(lo, f, p)) CHECK(bi::satisfies(hi, f, p));
  }
}

TEST_CASE("weakening: separation implies plain conjunction") {
  std::vector<std::string> vars = {"x", "y", "z"};
  Program p = bool_universe(vars);
  std::mt19937_64 rng(103);
  for (int t = 0; t < 1000; ++t) {
    bi::FormP l = gen_formula(vars, rng, 1);
    bi::FormP r = gen_formula(vars, rng, 1);
    bi::FormP sep = resolved(bi::f_bin(bi::FKind::SepAnd, l, r), p);
    bi::FormP both = resolved(bi::f_bin(bi::FKind::And, l, r), p);
    Configuration cfg{sem::default_store(p), random_bool_dist(vars, rng)};
    if (bi::satisfies(cfg, sep, p)) CHECK(bi::satisfies(cfg, both, p));
  }
}

TEST_CASE("extrusion pulls conjuncts into covering separants") {
  std::vector<std::string> vars = {"x", "y", "z"};
  Program p = bool_universe(vars);
  std::mt19937_64 rng(104);
  int applicable = 0;
  for (int t = 0; t < 4000 && applicable < 1000; ++t) {
    bi::FormP phi = gen_formula({"x", "y"}, rng, 1);
    bi::FormP psi = gen_formula({"z"}, rng, 1);
    bi::FormP eta = gen_formula({"x", "y"}, rng, 1);
    bi::FormP rphi = resolved(phi, p);
    bi::FormP reta = resolved(eta, p);
    VarSet fp = bi::footprint(rphi, p);
    bool covered = true;
    for (const auto& v : bi::fv_formula(reta, p).rand)
      if (!fp.count(v)) covered = false;
    if (!covered) continue;
    ++applicable;
    bi::FormP lhs = resolved(
        bi::f_bin(bi::FKind::And, bi::f_bin(bi::FKind::SepAnd, phi, psi), eta), p);
    bi::FormP rhs = resolved(
        bi::f_bin(bi::FKind::SepAnd, bi::f_bin(bi::FKind::And, phi, eta), psi), p);
    Configuration cfg{sem::default_store(p), random_bool_dist(vars, rng)};
    if (bi::satisfies(cfg, lhs, p)) CHECK(bi::satisfies(cfg, rhs, p));
  }
  CHECK(applicable == 1000);
}

TEST_CASE("separating conjunction agrees with the all-splits brute force") {
  std::vector<std::string> vars = {"x", "y", "z", "u", "v", "w"};
  Program p = bool_universe(vars);
  std::mt19937_64 rng(105);
  for (int t = 0; t < 500; ++t) {
    bi::FormP f = resolved(gen_formula(vars, rng, 2), p);
    Dist mu = random_bool_dist(vars, rng, 6);
    Configuration cfg{sem::default_store(p), mu};
    CHECK(bi::satisfies(cfg, f, p) == sat_bf(cfg, f, p));
  }
}
