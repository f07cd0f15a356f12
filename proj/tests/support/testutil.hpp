// Test-support helpers: independent brute-force satisfaction oracle and
// random generators for distributions, configurations, and formulas.
#pragma once

#include <random>

#include "psl/parser.hpp"
#include "psl/satisfies.hpp"
#include "psl/semantics.hpp"
#include "psl/typecheck.hpp"

namespace testutil {

using namespace psl;
using bi::FKind;
using bi::FormP;
using dist::Configuration;
using dist::Dist;
using dist::Memory;
using lang::Program;
using lang::Value;
using lang::VarId;
using lang::VarSet;

inline VarId rvar(const std::string& n) {
  VarId v;
  v.name = n;
  v.kind = lang::VarKind::Rand;
  return v;
}

// program declaring rand booleans (x1..xn by given names) and det booleans
inline Program bool_universe(const std::vector<std::string>& rand_vars,
                             const std::vector<std::string>& det_vars = {}) {
  std::string t;
  for (const auto& v : rand_vars) t += "rand " + v + " : bool;\n";
  for (const auto& v : det_vars) t += "det " + v + " : bool;\n";
  t += "begin skip end\n";
  return lang::load_program(t);
}

inline std::vector<Memory> bool_space(const std::vector<std::string>& vars) {
  std::vector<Memory> out;
  size_t n = vars.size();
  for (uint64_t bits = 0; bits < (1ull << n); ++bits) {
    std::vector<std::pair<VarId, Value>> kv;
    for (size_t i = 0; i < n; ++i)
      kv.emplace_back(rvar(vars[i]), Value::of_bool((bits >> i) & 1));
    out.emplace_back(std::move(kv));
  }
  return out;
}

inline Dist random_bool_dist(const std::vector<std::string>& vars, std::mt19937_64& rng,
                             long denom = 8) {
  auto space = bool_space(vars);
  std::vector<long> parts(space.size(), 0);
  for (long t = 0; t < denom; ++t) parts[rng() % space.size()] += 1;
  std::map<Memory, Rat> w;
  for (size_t i = 0; i < space.size(); ++i)
    if (parts[i]) w[space[i]] += Rat(parts[i], denom);
  VarSet dom;
  for (const auto& v : vars) dom.insert(rvar(v));
  return Dist::make(dom, std::move(w));
}

// --- brute-force satisfaction: the spec's independent oracle ---------------
// Identical clause-by-clause semantics, except the separating conjunction
// searches over ALL disjoint subset pairs of dom(mu), with no restriction to
// free variables.
inline bool sat_bf(const Configuration& cfg, const FormP& f, const Program& prog);

inline bool sat_bf_sep(const Configuration& cfg, const FormP& f, const Program& prog) {
  std::vector<VarId> dom(cfg.dist.domain().begin(), cfg.dist.domain().end());
  size_t n = dom.size();
  for (uint64_t m1 = 0; m1 < (1ull << n); ++m1) {
    for (uint64_t m2 = 0; m2 < (1ull << n); ++m2) {
      if (m1 & m2) continue;
      VarSet s1, s2;
      for (size_t i = 0; i < n; ++i) {
        if (m1 & (1ull << i)) s1.insert(dom[i]);
        if (m2 & (1ull << i)) s2.insert(dom[i]);
      }
      VarSet both = s1;
      both.insert(s2.begin(), s2.end());
      Dist p1 = cfg.dist.project(s1);
      Dist p2 = cfg.dist.project(s2);
      if (!(cfg.dist.project(both) == p1.product(p2))) continue;
      if (sat_bf(Configuration{cfg.store, p1}, f->l, prog) &&
          sat_bf(Configuration{cfg.store, p2}, f->r, prog))
        return true;
    }
  }
  return false;
}

inline bool sat_bf(const Configuration& cfg, const FormP& f, const Program& prog) {
  switch (f->kind) {
    case FKind::Top: return true;
    case FKind::Bot: return false;
    case FKind::And: return sat_bf(cfg, f->l, prog) && sat_bf(cfg, f->r, prog);
    case FKind::Or: return sat_bf(cfg, f->l, prog) || sat_bf(cfg, f->r, prog);
    case FKind::SepAnd: return sat_bf_sep(cfg, f, prog);
    case FKind::AtomDet:
      return sem::eval_det(cfg.store, f->a, prog).as_bool();
    case FKind::Unif: {
      auto fv = bi::fv_formula(f, prog);
      for (const auto& v : fv.rand)
        if (!cfg.dist.domain().count(v)) return false;
      auto push = sem::eval_rand_dist(cfg.store, cfg.dist, f->a, prog);
      auto set = bi::unif_set(*f, prog);
      if (push.size() != set.size()) return false;
      for (const auto& v : set) {
        auto it = push.find(v);
        if (it == push.end() || it->second != Rat(1, static_cast<long>(set.size()))) return false;
      }
      return true;
    }
    case FKind::Sim: {
      auto fv = bi::fv_formula(f, prog);
      for (const auto& v : fv.rand)
        if (!cfg.dist.domain().count(v)) return false;
      for (const auto& [m, p] : cfg.dist.weights()) {
        (void)p;
        if (!(sem::eval_rand(cfg.store, m, f->a, prog) ==
              sem::eval_rand(cfg.store, m, f->b, prog)))
          return false;
      }
      return true;
    }
    default: throw Error("test", "brute-force oracle covers the Imp-free fragment");
  }
}

// --- random formulas (Imp/SepImp-free fragment) -----------------------------
inline FormP gen_formula(const std::vector<std::string>& vars, std::mt19937_64& rng, int depth) {
  auto var = [&]() {
    return lang::mk_var(rvar(vars[rng() % vars.size()]));
  };
  if (depth == 0 || rng() % 3 == 0) {
    switch (rng() % 4) {
      case 0: return bi::f_unif(var());
      case 1: return bi::f_d(var());
      case 2: return bi::f_sim(var(), var());
      default:
        return bi::f_sim(var(), lang::mk_lit(Value::of_bool(rng() % 2)));
    }
  }
  FormP l = gen_formula(vars, rng, depth - 1);
  FormP r = gen_formula(vars, rng, depth - 1);
  switch (rng() % 3) {
    case 0: return bi::f_bin(FKind::And, l, r);
    case 1: return bi::f_bin(FKind::Or, l, r);
    default: return bi::f_bin(FKind::SepAnd, l, r);
  }
}

inline FormP resolved(const FormP& f, const Program& prog) {
  bi::FormulaEnv env{&prog, {}};
  return bi::expand_big(bi::resolve_formula(f, env), env);
}

}  // namespace testutil
