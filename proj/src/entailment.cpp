#include "psl/entailment.hpp"

#include <algorithm>
#include <map>

#include "psl/parser.hpp"
#include "psl/printer.hpp"

namespace psl::entail {

using bi::FKind;
using bi::Formula;
using bi::fkey;
using lang::BOp;
using lang::EKind;
using lang::TypeKind;
using lang::ValType;
using lang::Value;
using lang::VarSet;

namespace {

[[noreturn]] void everr(const std::string& m) { throw Error("entailment", m); }

std::string pe(const ExprP& e) { return lang::print_expr(e); }
std::string pf(const FormP& f) { return bi::print_formula(f); }

// ---- E-theory normal form -------------------------------------------------

struct SignedAtom {
  std::string key;
  ExprP expr;
  int sign;  // +1 / -1; xor atoms always +1
};

void collect_xor(const ExprP& e, std::vector<ExprP>& atoms) {
  if (e->kind == EKind::Binary && e->op == BOp::Xor) {
    collect_xor(e->args[0], atoms);
    collect_xor(e->args[1], atoms);
  } else {
    atoms.push_back(e);
  }
}

void collect_sum(const ExprP& e, int sign, std::vector<std::pair<ExprP, int>>& atoms) {
  if (e->kind == EKind::Binary && (e->op == BOp::Add || e->op == BOp::Sub)) {
    collect_sum(e->args[0], sign, atoms);
    collect_sum(e->args[1], e->op == BOp::Add ? sign : -sign, atoms);
  } else {
    atoms.emplace_back(e, sign);
  }
}

bool is_zero_lit(const ExprP& e) {
  if (e->kind != EKind::Lit) return false;
  if (std::holds_alternative<bool>(e->lit.v)) return !e->lit.as_bool();
  if (std::holds_alternative<lang::Bits>(e->lit.v)) return e->lit.as_bits().bits == 0;
  if (std::holds_alternative<lang::ZVal>(e->lit.v)) return e->lit.as_z().v == 0;
  return false;
}

std::string enf(const ExprP& e);

std::string enf_children_key(const ExprP& e) {
  // canonical rendering with normalized children
  std::string s = std::to_string(static_cast<int>(e->kind)) + ":";
  if (e->kind == EKind::Lit) return "lit:" + e->lit.str();
  if (e->kind == EKind::Loc) return "loc:" + pe(e);
  if (e->kind == EKind::Binary) s += "op" + std::to_string(static_cast<int>(e->op)) + ":";
  if (e->kind == EKind::ValueProj) s += "proj" + std::to_string(e->proj) + ":";
  for (const auto& a : e->args) s += "(" + enf(a) + ")";
  return s;
}

std::string enf(const ExprP& e) {
  if (e->kind == EKind::Binary && e->op == BOp::Xor) {
    std::vector<ExprP> atoms;
    collect_xor(e, atoms);
    std::multiset<std::string> keys;
    for (const auto& a : atoms) {
      if (is_zero_lit(a)) continue;  // x ^ 0 = x
      keys.insert(enf(a));
    }
    // x ^ x = 0: cancel pairs
    std::vector<std::string> kept;
    for (auto it = keys.begin(); it != keys.end();) {
      auto cnt = keys.count(*it);
      if (cnt % 2 == 1) kept.push_back(*it);
      it = keys.upper_bound(*it);
    }
    if (kept.empty()) return "xor0";
    std::string s = "xor{";
    for (const auto& k : kept) s += k + ";";
    return s + "}";
  }
  if (e->kind == EKind::Binary && (e->op == BOp::Add || e->op == BOp::Sub) && e->type &&
      e->type->kind == TypeKind::ZMod) {
    long q = e->type->modulus;
    std::vector<std::pair<ExprP, int>> atoms;
    collect_sum(e, +1, atoms);
    long cst = 0;
    std::multiset<std::string> pos, neg;
    for (const auto& [a, sg] : atoms) {
      if (a->kind == EKind::Lit && std::holds_alternative<lang::ZVal>(a->lit.v)) {
        cst = (cst + sg * a->lit.as_z().v) % q;
        continue;
      }
      (sg > 0 ? pos : neg).insert(enf(a));
    }
    // cancel matching +x/-x pairs
    std::multiset<std::string> p2, n2;
    for (const auto& k : pos) {
      auto it = neg.find(k);
      if (it != neg.end())
        neg.erase(it);
      else
        p2.insert(k);
    }
    n2 = neg;
    cst = ((cst % q) + q) % q;
    std::string s = "sum" + std::to_string(q) + "{" + std::to_string(cst) + ";";
    for (const auto& k : p2) s += "+" + k + ";";
    for (const auto& k : n2) s += "-" + k + ";";
    return s + "}";
  }
  return enf_children_key(e);
}

// ---- helpers ---------------------------------------------------------------

std::shared_ptr<Formula> clone(const FormP& f) { return std::make_shared<Formula>(*f); }

lang::ExprFV efv(const ExprP& e, const Program& prog) { return lang::fv_expr(e, prog); }

VarSet rand_fv_formula(const FormP& f, const Program& prog) {
  return bi::fv_formula(f, prog).rand;
}

bool acu_same(const FormP& a, const FormP& b) { return fkey(a) == fkey(b); }

std::vector<Value> full_carrier(const ExprP& e) {
  if (!e->type) everr("expression not resolved: " + pe(e));
  return lang::enumerate_carrier(*e->type);
}

// multiset inclusion of /\-conjuncts by ACU key
bool and_multiset_subset(const FormP& small, const FormP& big) {
  std::multiset<std::string> bs;
  for (const auto& g : bi::flatten_and(big)) bs.insert(fkey(g));
  for (const auto& g : bi::flatten_and(small)) {
    auto it = bs.find(fkey(g));
    if (it == bs.end()) return false;
    bs.erase(it);
  }
  return true;
}

struct Stepper {
  const Program& prog;
  bi::FormulaEnv env;

  explicit Stepper(const Program& p) : prog(p) { env.prog = &p; }

  FormP apply_chain(FormP cur, const std::vector<EntStep>& steps) {
    for (size_t i = 0; i < steps.size(); ++i) {
      try {
        cur = apply(cur, steps[i]);
      } catch (const Error& e) {
        throw Error("entailment",
                    "step " + std::to_string(i + 1) + " (" + steps[i].rule + "): " + e.what());
      }
    }
    return cur;
  }

  FormP apply(const FormP& whole, const EntStep& st) {
    return rebuild(whole, st.at, 0, st);
  }

  FormP rebuild(const FormP& f, const std::vector<int>& at, size_t depth, const EntStep& st) {
    if (depth == at.size()) return transform(f, st);
    if (f->kind != FKind::And && f->kind != FKind::Or && f->kind != FKind::SepAnd)
      everr("path descends through a non-monotone or atomic node: " + pf(f));
    int side = at[depth];
    if (side != 0 && side != 1) everr("path component must be 0 or 1");
    auto nf = clone(f);
    if (side == 0)
      nf->l = rebuild(f->l, at, depth + 1, st);
    else
      nf->r = rebuild(f->r, at, depth + 1, st);
    return nf;
  }

  // arguments are re-resolved at use: template instantiation substitutes
  // concrete indices into them, and path resolution plus big-operator
  // expansion must see those literals
  FormP farg(const EntStep& st, size_t i) {
    if (st.fargs.size() <= i) everr(st.rule + " needs formula argument " + std::to_string(i + 1));
    return bi::expand_big(bi::resolve_formula(st.fargs[i], env), env);
  }
  ExprP earg(const EntStep& st, size_t i) {
    if (st.eargs.size() <= i) everr(st.rule + " needs expression argument " + std::to_string(i + 1));
    lang::TypeEnv tenv{&prog, nullptr};
    return lang::type_expr(st.eargs[i], tenv, {});
  }
  ExprP earg_raw(const EntStep& st, size_t i) {
    if (st.eargs.size() <= i) everr(st.rule + " needs expression argument " + std::to_string(i + 1));
    return st.eargs[i];
  }
  const std::vector<EntStep>& sub(const EntStep& st, size_t i) {
    if (st.subs.size() <= i) everr(st.rule + " needs sub-certificate " + std::to_string(i + 1));
    return st.subs[i];
  }

  FormP transform(const FormP& s, const EntStep& st) {
    const std::string& r = st.rule;
    if (r == "ImpRefl") return s;
    if (r == "TopIntro") return bi::f_top();
    if (r == "BotElim") {
      if (s->kind != FKind::Bot) everr("BotElim applies to F");
      return farg(st, 0);
    }
    if (r == "AndIntro")
      return bi::f_bin(FKind::And, apply_chain(s, sub(st, 0)), apply_chain(s, sub(st, 1)));
    if (r == "AndElimL" || r == "AndElimR") {
      if (s->kind != FKind::And) everr("AndElim applies to a /\\ node");
      return r == "AndElimL" ? s->l : s->r;
    }
    if (r == "AndSelect") {
      const FormP& keep = farg(st, 0);
      if (!and_multiset_subset(keep, s))
        everr("AndSelect: " + pf(keep) + " is not a conjunct sub-multiset of " + pf(s));
      return keep;
    }
    if (r == "OrIntroL") return bi::f_bin(FKind::Or, s, farg(st, 0));
    if (r == "OrIntroR") return bi::f_bin(FKind::Or, farg(st, 0), s);
    if (r == "OrElim") {
      if (s->kind != FKind::Or) everr("OrElim applies to a \\/ node");
      FormP a = apply_chain(s->l, sub(st, 0));
      FormP b = apply_chain(s->r, sub(st, 1));
      if (!acu_same(a, b)) everr("OrElim branches disagree: " + pf(a) + " vs " + pf(b));
      return a;
    }
    if (r == "Weakening") {
      if (s->kind != FKind::SepAnd) everr("Weakening applies to a * node");
      return bi::f_bin(FKind::And, s->l, s->r);
    }
    if (r == "SepComm") {
      if (s->kind != FKind::SepAnd) everr("SepComm applies to a * node");
      return bi::f_bin(FKind::SepAnd, s->r, s->l);
    }
    if (r == "SepAssoc") {
      if (st.sarg == "rl") {
        if (s->kind != FKind::SepAnd || s->r->kind != FKind::SepAnd)
          everr("SepAssoc rl expects a * (b * c)");
        return bi::f_bin(FKind::SepAnd, bi::f_bin(FKind::SepAnd, s->l, s->r->l), s->r->r);
      }
      if (s->kind != FKind::SepAnd || s->l->kind != FKind::SepAnd)
        everr("SepAssoc expects (a * b) * c");
      return bi::f_bin(FKind::SepAnd, s->l->l, bi::f_bin(FKind::SepAnd, s->l->r, s->r));
    }
    if (r == "SepUnit") {
      if (st.sarg == "add") return bi::f_bin(FKind::SepAnd, s, bi::f_top());
      if (s->kind != FKind::SepAnd) everr("SepUnit applies to a * node");
      if (s->r->kind == FKind::Top) return s->l;
      if (s->l->kind == FKind::Top) return s->r;
      everr("SepUnit: no T conjunct");
    }
    if (r == "SepMono") {
      const FormP& f1 = farg(st, 0);
      const FormP& f2 = farg(st, 1);
      if (!acu_same(s, bi::f_bin(FKind::SepAnd, f1, f2)))
        everr("SepMono split does not match " + pf(s));
      return bi::f_bin(FKind::SepAnd, apply_chain(f1, sub(st, 0)), apply_chain(f2, sub(st, 1)));
    }
    if (r == "AndOrDistrib") {
      if (s->kind != FKind::And || s->l->kind != FKind::Or)
        everr("AndOrDistrib expects (a \\/ b) /\\ c");
      return bi::f_bin(FKind::Or, bi::f_bin(FKind::And, s->l->l, s->r),
                       bi::f_bin(FKind::And, s->l->r, s->r));
    }
    if (r == "Weak" || r == "Trans") everr("Trans is implicit in step chains");
    if (r == "PureOut") {
      const FormP& psi = farg(st, 0);
      const FormP& eta = farg(st, 1);
      if (!acu_same(s, bi::f_bin(FKind::And, psi, eta)))
        everr("PureOut: expected " + pf(psi) + " /\\ " + pf(eta));
      if (!rand_fv_formula(eta, prog).empty())
        everr("PureOut: " + pf(eta) + " mentions randomized variables");
      return bi::f_bin(FKind::SepAnd, psi, eta);
    }
    if (r == "DIntroDet") {
      ExprP e = earg(st, 0);
      if (efv(e, prog).has_rand()) everr("DIntroDet: expression mentions randomized variables");
      return bi::f_d(e);
    }
    if (r == "Extrusion") {
      const FormP& phi = farg(st, 0);
      const FormP& psi = farg(st, 1);
      const FormP& eta = farg(st, 2);
      FormP want = bi::f_bin(FKind::And, bi::f_bin(FKind::SepAnd, phi, psi), eta);
      if (!acu_same(s, want)) everr("Extrusion: expected (phi * psi) /\\ eta; got " + pf(s));
      VarSet fp = bi::footprint(phi, prog);
      for (const auto& v : rand_fv_formula(eta, prog))
        if (!fp.count(v))
          everr("Extrusion: footprint of " + pf(phi) + " misses " + v.str());
      return bi::f_bin(FKind::SepAnd, bi::f_bin(FKind::And, phi, eta), psi);
    }
    if (r == "S1") {
      if (s->kind != FKind::Sim) everr("S1 applies to ~");
      return bi::f_sim(s->b, s->a);
    }
    if (r == "S2") {
      ExprP e = earg(st, 0), mid = earg(st, 1), out = earg(st, 2);
      FormP want = bi::f_bin(FKind::And, bi::f_sim(e, mid), bi::f_sim(mid, out));
      if (!acu_same(s, want)) everr("S2: expected " + pf(want));
      return bi::f_sim(e, out);
    }
    if (r == "S3") {
      if (s->kind != FKind::Sim) everr("S3 applies to ~");
      ExprP to = earg(st, 0);
      if (st.sarg.empty()) everr("S3 must name the rewrite applied");
      if (e_normal_form(s->b) != e_normal_form(to))
        everr("S3: " + pe(s->b) + " and " + pe(to) + " are not E-equal");
      VarSet oldv = efv(s->b, prog).rand, newv = efv(to, prog).rand;
      for (const auto& v : newv)
        if (!oldv.count(v)) everr("S3 introduces random variable " + v.str());
      return bi::f_sim(s->a, to);
    }
    if (r == "S4") {
      if (s->kind != FKind::Sim || !lang::expr_eq(s->a, s->b)) everr("S4 applies to e ~ e");
      ExprP to = earg(st, 0);
      VarSet oldv = efv(s->a, prog).rand, newv = efv(to, prog).rand;
      for (const auto& v : newv)
        if (!oldv.count(v)) everr("S4 introduces random variable " + v.str());
      return bi::f_d(to);
    }
    if (r == "U1") {
      ExprP e = earg(st, 0), e2 = earg(st, 1);
      auto parts = bi::flatten_and(s);
      if (parts.size() != 2) everr("U1 expects (e ~ e') /\\ U[e]");
      const Formula* uf = nullptr;
      bool sim_ok = false;
      for (const auto& g : parts) {
        if (g->kind == FKind::Unif && lang::expr_eq(g->a, e)) uf = g.get();
        if (g->kind == FKind::Sim && lang::expr_eq(g->a, e) && lang::expr_eq(g->b, e2))
          sim_ok = true;
      }
      if (!uf || !sim_ok) everr("U1: expected (e ~ e') /\\ U[e] with e=" + pe(e));
      return bi::f_unif(e2, uf->uset.empty() ? full_carrier(uf->a) : uf->uset);
    }
    if (r == "U2") {
      if (s->kind != FKind::Unif) everr("U2 applies to U[e]");
      return bi::f_d(s->a);
    }
    if (r == "U3") return u3(s, st);
    if (r == "U4" || r == "U5" || r == "UAdd") return uadd(s, st);
    if (r == "UPairMerge") return upair(s, st);
    if (r == "BigExpand") return bi::expand_big(s, env);
    if (r == "DetTauto") return det_tauto(s, st);
    everr("unknown entailment rule " + r);
  }

  // U3: uniformity is preserved by bijections of the carrier
  FormP u3(const FormP& s, const EntStep& st) {
    if (s->kind != FKind::Unif) everr("U3 applies to U[e]");
    ExprP hole_fn = earg_raw(st, 0);  // contains the hole variable _
    std::vector<Value> set = s->uset.empty() ? full_carrier(s->a) : s->uset;
    // f may mention deterministic variables only (plus the hole)
    ExprP probe = lang::subst_expr(hole_fn, "_", s->a);
    lang::TypeEnv tenv{&prog, nullptr};
    ExprP probe_t = lang::type_expr(probe, tenv, {});
    VarSet frand = efv(probe_t, prog).rand;
    for (const auto& v : efv(s->a, prog).rand) frand.erase(v);
    if (!frand.empty()) everr("U3: bijection mentions randomized variables beyond the operand");
    // bijectivity for every valuation of the deterministic variables involved
    ExprP witness = lang::subst_expr(hole_fn, "_", lang::mk_lit(set.front()));
    ExprP witness_t = lang::type_expr(witness, tenv, {});
    VarSet dets = efv(witness_t, prog).det;
    std::vector<lang::VarId> dv(dets.begin(), dets.end());
    std::vector<std::vector<Value>> carriers;
    long combos = 1;
    for (const auto& v : dv) {
      carriers.push_back(lang::enumerate_carrier(prog.type_of(v)));
      combos *= static_cast<long>(carriers.back().size());
      if (combos > 4096) everr("U3: bijectivity check budget exceeded");
    }
    std::vector<size_t> ix(dv.size(), 0);
    while (true) {
      std::vector<std::pair<lang::VarId, Value>> kv;
      for (size_t i = 0; i < dv.size(); ++i) kv.emplace_back(dv[i], carriers[i][ix[i]]);
      dist::DetStore store{kv};
      std::set<Value> image;
      for (const auto& v : set) {
        ExprP fe = lang::subst_expr(hole_fn, "_", lang::mk_lit(v));
        ExprP fe_t = lang::type_expr(fe, tenv, {});
        Value out = sem::eval_det(store, fe_t, prog);
        if (!std::binary_search(set.begin(), set.end(), out))
          everr("U3: image leaves the carrier at " + v.str());
        if (!image.insert(out).second) everr("U3: not injective at " + v.str());
      }
      size_t k = dv.size();
      bool done = dv.empty();
      while (k > 0) {
        --k;
        if (++ix[k] < carriers[k].size()) break;
        ix[k] = 0;
        if (k == 0) done = true;
      }
      if (done) break;
    }
    ExprP out_expr = lang::subst_expr(hole_fn, "_", s->a);
    lang::TypeEnv tenv2{&prog, nullptr};
    out_expr = lang::type_expr(out_expr, tenv2, {});
    return bi::f_unif(out_expr, s->uset);
  }

  // U4/U5 and the n-ary Lemma-5.1 sum schema, with signs absorbed:
  //   U_G[e1] * D[e2] * ... * D[en] /\ e0 ~ (+-e1 +- ... +- en)
  //   -> U_G[e0] * D[e2] * ... * D[en]
  // Every slot has at most one free random variable; slot variables and the
  // target variable are pairwise distinct; the uniform slot covers the whole
  // group carrier.
  FormP uadd(const FormP& s, const EntStep& st) {
    ExprP e1 = earg(st, 0);
    ExprP e0 = earg(st, 1);
    std::vector<ExprP> ds;
    for (size_t i = 2; i < st.eargs.size(); ++i) ds.push_back(earg(st, i));

    auto parts = bi::flatten_and(s);
    if (parts.size() != 2) everr("U4/U5 expects (U[e1] * D[...]) /\\ (e0 ~ sum)");
    FormP sep, sim;
    for (const auto& g : parts) {
      if (g->kind == FKind::Sim && lang::expr_eq(g->a, e0) && !lang::expr_eq(g->a, g->b))
        sim = g;
      else
        sep = g;
    }
    if (!sim || !sep) everr("U4/U5: missing e0 ~ sum conjunct for e0 = " + pe(e0));

    // left part: U[e1] with the full group carrier, plus D[e_i] for each slot
    std::vector<Value> uset;
    {
      auto seps = bi::flatten_sep(sep);
      if (seps.size() != 1 + ds.size()) everr("U4/U5: separated part has wrong arity");
      std::multiset<std::string> want;
      for (const auto& d : ds) want.insert(fkey(bi::f_d(d)));
      bool u_found = false;
      for (const auto& g : seps) {
        if (g->kind == FKind::Unif && lang::expr_eq(g->a, e1)) {
          uset = g->uset.empty() ? full_carrier(g->a) : g->uset;
          u_found = true;
          continue;
        }
        auto it = want.find(fkey(g));
        if (it == want.end()) everr("U4/U5: unexpected separated conjunct " + pf(g));
        want.erase(it);
      }
      if (!u_found || !want.empty()) everr("U4/U5: separated part mismatch");
    }
    if (!e1->type) everr("U4/U5: unresolved slot");
    const ValType& t = *e1->type;
    if (t.kind != TypeKind::Bool && t.kind != TypeKind::BitStr && t.kind != TypeKind::ZMod)
      everr("U4/U5: carrier must be a group (bool, bitstring, or zmod)");
    if (uset != lang::enumerate_carrier(t)) everr("U4/U5: uniform slot must cover the whole carrier");

    // sum structure: the signed atoms of the right-hand side are exactly the slots
    std::vector<ExprP> atoms;
    if (t.kind == TypeKind::ZMod) {
      std::vector<std::pair<ExprP, int>> sa;
      collect_sum(sim->b, +1, sa);
      for (auto& [a, sg] : sa) {
        (void)sg;  // signs are absorbed: +-x is a bijection of Z_q
        atoms.push_back(a);
      }
    } else {
      collect_xor(sim->b, atoms);
    }
    std::multiset<std::string> want;
    want.insert(pe(e1));
    for (const auto& d : ds) want.insert(pe(d));
    std::multiset<std::string> got;
    for (const auto& a : atoms) got.insert(pe(a));
    if (want != got) everr("U4/U5: sum operands do not match the slots");

    // variable side conditions
    std::vector<ExprP> all = {e0, e1};
    for (const auto& d : ds) all.push_back(d);
    std::set<std::string> seen_vars;
    for (const auto& e : all) {
      VarSet rv = efv(e, prog).rand;
      if (rv.size() > 1) everr("U4/U5: slot " + pe(e) + " has more than one random variable");
      for (const auto& v : rv)
        if (!seen_vars.insert(v.str()).second)
          everr("U4/U5: random variable " + v.str() + " shared across slots");
    }
    if (!e0->type || !compat_types(*e0->type, t)) everr("U4/U5: type mismatch on e0");

    std::vector<FormP> out;
    out.push_back(bi::f_unif(e0, lang::enumerate_carrier(t)));
    for (const auto& d : ds) out.push_back(bi::f_d(d));
    return bi::sep_of(std::move(out));
  }

  static bool compat_types(const ValType& a, const ValType& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == TypeKind::BitStr) return a.width == b.width;
    if (a.kind == TypeKind::ZMod) return a.modulus == b.modulus;
    return true;
  }

  // UPairMerge: U_{S1}[x1] * ... * U_{Sn}[xn] <-> U_{S1 x ... x Sn}[(x1,...,xn)]
  FormP upair(const FormP& s, const EntStep& st) {
    std::vector<ExprP> slots;
    for (size_t i = 0; i < st.eargs.size(); ++i) slots.push_back(earg(st, i));
    if (slots.size() < 2) everr("UPairMerge needs at least two slots");
    std::set<std::string> seen;
    for (const auto& e : slots) {
      VarSet rv = efv(e, prog).rand;
      if (rv.size() > 1) everr("UPairMerge: slot with more than one random variable");
      for (const auto& v : rv)
        if (!seen.insert(v.str()).second)
          everr("UPairMerge: random variable " + v.str() + " shared across slots");
    }
    if (st.sarg == "split") {
      if (s->kind != FKind::Unif) everr("UPairMerge split applies to U[(...)]");
      if (s->a->kind != EKind::TupleMk || s->a->args.size() != slots.size())
        everr("UPairMerge split: operand is not a matching tuple");
      for (size_t i = 0; i < slots.size(); ++i)
        if (!lang::expr_eq(s->a->args[i], slots[i])) everr("UPairMerge split: slot mismatch");
      std::vector<Value> set = s->uset.empty() ? full_carrier(s->a) : s->uset;
      std::vector<std::vector<Value>> proj(slots.size());
      for (const auto& v : set) {
        const auto& es = v.as_tuple().elems;
        for (size_t i = 0; i < slots.size(); ++i) proj[i].push_back(es[i]);
      }
      for (auto& p : proj) {
        std::sort(p.begin(), p.end());
        p.erase(std::unique(p.begin(), p.end()), p.end());
      }
      long prod = 1;
      for (const auto& p : proj) prod *= static_cast<long>(p.size());
      if (prod != static_cast<long>(set.size()))
        everr("UPairMerge split: set is not a full product");
      std::vector<FormP> out;
      for (size_t i = 0; i < slots.size(); ++i) out.push_back(bi::f_unif(slots[i], proj[i]));
      return bi::sep_of(std::move(out));
    }
    // merge
    auto seps = bi::flatten_sep(s);
    std::vector<std::vector<Value>> sets(slots.size());
    std::vector<bool> found(slots.size(), false);
    std::vector<FormP> rest;
    for (const auto& g : seps) {
      bool used = false;
      if (g->kind == FKind::Unif) {
        for (size_t i = 0; i < slots.size(); ++i) {
          if (!found[i] && lang::expr_eq(g->a, slots[i])) {
            sets[i] = g->uset.empty() ? full_carrier(g->a) : g->uset;
            found[i] = true;
            used = true;
            break;
          }
        }
      }
      if (!used) rest.push_back(g);
    }
    for (size_t i = 0; i < slots.size(); ++i)
      if (!found[i]) everr("UPairMerge: missing U[" + pe(slots[i]) + "]");
    // product set, tuple order = slot order
    std::vector<Value> prod;
    std::vector<size_t> ix(slots.size(), 0);
    while (true) {
      std::vector<Value> vs;
      for (size_t i = 0; i < slots.size(); ++i) vs.push_back(sets[i][ix[i]]);
      prod.push_back(Value::of_tuple(std::move(vs)));
      size_t k = slots.size();
      bool done = false;
      while (k > 0) {
        --k;
        if (++ix[k] < sets[k].size()) break;
        ix[k] = 0;
        if (k == 0) done = true;
      }
      if (done) break;
    }
    std::sort(prod.begin(), prod.end());
    ExprP tup = lang::mk_tuple(slots);
    lang::TypeEnv tenv{&prog, nullptr};
    tup = lang::type_expr(tup, tenv, {});
    std::vector<FormP> out;
    out.push_back(bi::f_unif(tup, std::move(prod)));
    for (const auto& g : rest) out.push_back(g);
    return bi::sep_of(std::move(out));
  }

  // deterministic-proposition entailment decided by finite enumeration
  FormP det_tauto(const FormP& s, const EntStep& st) {
    const FormP& to = farg(st, 0);
    VarSet vars;
    auto check_det = [&](const FormP& f, auto&& rec) -> void {
      switch (f->kind) {
        case FKind::Top:
        case FKind::Bot: return;
        case FKind::AtomDet: {
          auto fv = efv(f->a, prog);
          if (fv.has_rand()) everr("DetTauto: randomized atom");
          vars.insert(fv.det.begin(), fv.det.end());
          return;
        }
        case FKind::And:
        case FKind::Or:
          rec(f->l, rec);
          rec(f->r, rec);
          return;
        default: everr("DetTauto: non-propositional connective");
      }
    };
    check_det(s, check_det);
    check_det(to, check_det);
    std::vector<lang::VarId> dv(vars.begin(), vars.end());
    std::vector<std::vector<Value>> carriers;
    long combos = 1;
    for (const auto& v : dv) {
      carriers.push_back(lang::enumerate_carrier(prog.type_of(v)));
      combos *= static_cast<long>(carriers.back().size());
      if (combos > 65536) everr("DetTauto: enumeration budget exceeded");
    }
    std::function<bool(const FormP&, const dist::DetStore&)> ev =
        [&](const FormP& f, const dist::DetStore& store) -> bool {
      switch (f->kind) {
        case FKind::Top: return true;
        case FKind::Bot: return false;
        case FKind::AtomDet: return sem::eval_det(store, f->a, prog).as_bool();
        case FKind::And: return ev(f->l, store) && ev(f->r, store);
        case FKind::Or: return ev(f->l, store) || ev(f->r, store);
        default: return false;
      }
    };
    std::vector<size_t> ix(dv.size(), 0);
    while (true) {
      std::vector<std::pair<lang::VarId, Value>> kv;
      for (size_t i = 0; i < dv.size(); ++i) kv.emplace_back(dv[i], carriers[i][ix[i]]);
      dist::DetStore store{kv};
      if (ev(s, store) && !ev(to, store))
        everr("DetTauto: fails at " + store.str());
      size_t k = dv.size();
      bool done = dv.empty();
      while (k > 0) {
        --k;
        if (++ix[k] < carriers[k].size()) break;
        ix[k] = 0;
        if (k == 0) done = true;
      }
      if (done) break;
    }
    return to;
  }
};

}  // namespace

std::string e_normal_form(const ExprP& e) { return enf(e); }

std::vector<EntStep> load_steps(const json& j, const FormulaEnv& env) {
  std::vector<EntStep> out;
  if (!j.is_array()) throw Error("schema", "certificate steps must be an array");
  for (const auto& js : j) {
    EntStep st;
    st.rule = js.at("rule").get<std::string>();
    if (js.contains("at"))
      for (const auto& x : js.at("at")) st.at.push_back(x.get<int>());
    if (js.contains("f"))
      for (const auto& x : js.at("f")) {
        FormP f = bi::parse_formula(x.get<std::string>());
        st.fargs.push_back(bi::resolve_formula(f, env));
      }
    if (js.contains("e"))
      for (const auto& x : js.at("e")) {
        ExprP e = lang::parse_expr(x.get<std::string>());
        if (st.rule != "U3") {
          lang::TypeEnv tenv{env.prog, &env.index_vars};
          e = lang::type_expr(e, tenv, {});
        }
        st.eargs.push_back(e);
      }
    if (js.contains("s")) st.sarg = js.at("s").get<std::string>();
    if (js.contains("sub"))
      for (const auto& x : js.at("sub")) st.subs.push_back(load_steps(x, env));
    out.push_back(std::move(st));
  }
  return out;
}

EntProof load_entailment(const json& j, const FormulaEnv& env) {
  EntProof p;
  p.lhs = bi::resolve_formula(bi::parse_formula(j.at("lhs").get<std::string>()), env);
  p.rhs = bi::resolve_formula(bi::parse_formula(j.at("rhs").get<std::string>()), env);
  if (j.contains("steps")) p.steps = load_steps(j.at("steps"), env);
  return p;
}

std::vector<EntStep> subst_steps(const std::vector<EntStep>& steps, const std::string& x,
                                 const ExprP& v) {
  std::vector<EntStep> out;
  for (const auto& st : steps) {
    EntStep ns = st;
    for (auto& f : ns.fargs) f = bi::subst_formula(f, x, v);
    for (auto& e : ns.eargs) e = lang::subst_expr(e, x, v);
    ns.subs.clear();
    for (const auto& sb : st.subs) ns.subs.push_back(subst_steps(sb, x, v));
    out.push_back(std::move(ns));
  }
  return out;
}

FormP apply_steps(FormP cur, const std::vector<EntStep>& steps, const Program& prog) {
  Stepper s(prog);
  return s.apply_chain(std::move(cur), steps);
}

Result check_entailment(const EntProof& p, const Program& prog) {
  Result r;
  FormP cur = p.lhs;
  Stepper s(prog);
  for (size_t i = 0; i < p.steps.size(); ++i) {
    try {
      cur = s.apply(cur, p.steps[i]);
    } catch (const Error& e) {
      r.ok = false;
      r.step = static_cast<int>(i);
      r.message = e.what();
      return r;
    }
  }
  if (fkey(cur) != fkey(p.rhs)) {
    r.ok = false;
    r.message = "certificate chain ends at " + bi::print_formula(cur) + " but the goal is " +
                bi::print_formula(p.rhs);
  }
  return r;
}

}  // namespace psl::entail
