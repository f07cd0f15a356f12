#include "psl/proofcheck.hpp"

#include <fstream>

#include "psl/analyses.hpp"
#include "psl/parser.hpp"
#include "psl/printer.hpp"

namespace psl::proof {

using bi::FKind;
using bi::fkey;
using bi::FormulaEnv;
using lang::BOp;
using lang::CKind;
using lang::CmdP;
using lang::EKind;
using lang::ExprP;
using lang::Value;
using lang::VarId;
using lang::VarKind;
using lang::VarSet;

namespace {

FormP guard_true_sim(const ExprP& b) { return bi::f_sim(b, lang::mk_lit(Value::of_bool(true))); }
FormP guard_false_sim(const ExprP& b) { return bi::f_sim(b, lang::mk_lit(Value::of_bool(false))); }
FormP guard_det_atom(const ExprP& b, bool val) {
  return bi::f_atom(lang::mk_bin(BOp::Eq, b, lang::mk_lit(Value::of_bool(val))));
}

void seq_items(const CmdP& c, std::vector<CmdP>& out) {
  if (c->kind == CKind::Seq) {
    seq_items(c->c1, out);
    seq_items(c->c2, out);
  } else {
    out.push_back(c);
  }
}

CmdP seq_of(const std::vector<CmdP>& items, size_t lo, size_t hi) {
  CmdP out = items[hi - 1];
  for (size_t k = hi - 1; k-- > lo;) out = lang::mk_seq(items[k], out);
  return out;
}

struct PC {
  const Program& prog;
  FormulaEnv base_env;
  CheckResult res;

  explicit PC(const Program& p) : prog(p) { base_env.prog = &p; }

  bool fail(const std::string& path, const std::string& rule, const std::string& msg) {
    if (res.ok) {
      res.ok = false;
      res.node = path;
      res.rule = rule;
      res.message = msg;
    }
    return false;
  }

  FormP xp(const FormP& f) const {
    FormP r = bi::resolve_formula(f, base_env);
    return bi::expand_big(r, base_env);
  }

  bool same(const FormP& a, const FormP& b) const { return fkey(xp(a)) == fkey(xp(b)); }

  std::string show(const FormP& f) const { return bi::print_formula(xp(f)); }

  bool cert_ok(const std::vector<EntStep>& steps, const FormP& lhs, const FormP& rhs,
               const std::string& path, const std::string& rule, const std::string& what) {
    try {
      FormP end = entail::apply_steps(xp(lhs), steps, prog);
      if (fkey(end) != fkey(xp(rhs)))
        return fail(path, rule,
                    what + " certificate ends at " + bi::print_formula(end) + " but needs " +
                        show(rhs));
      return true;
    } catch (const Error& e) {
      return fail(path, rule, what + " certificate: " + e.what());
    }
  }

  // ---- rule dispatch -------------------------------------------------------

  bool check(const NodeP& n, const Judgment& exp, const std::string& path) {
    if (!n) return fail(path, "?", "missing proof node");
    const std::string& r = n->rule;
    auto need_premises = [&](size_t k) {
      if (n->premises.size() != k)
        return fail(path, r, "expected " + std::to_string(k) + " premises, got " +
                                 std::to_string(n->premises.size()));
      return true;
    };

    if (r == "Skip") {
      if (exp.cmd->kind != CKind::Skip) return fail(path, r, "command is not skip");
      if (!same(exp.pre, exp.post))
        return fail(path, r, "pre and post differ: " + show(exp.pre) + " vs " + show(exp.post));
      return true;
    }

    if (r == "DAssn") {
      if (exp.cmd->kind != CKind::Assign || !exp.cmd->det_assign)
        return fail(path, r, "DAssn requires an assignment to a deterministic variable");
      const ExprP& tgt = exp.cmd->target;
      if (!tgt->vid || !tgt->vid->idx.empty())
        return fail(path, r, "DAssn target must be a scalar variable");
      FormP want = bi::subst_formula(exp.post, tgt->vid->name, exp.cmd->expr);
      if (!same(exp.pre, want))
        return fail(path, r,
                    "pre is not post[e/x]: " + show(exp.pre) + " vs " + show(want));
      return true;
    }

    if (r == "Seqn") {
      if (exp.cmd->kind != CKind::Seq) return fail(path, r, "command is not a sequence");
      if (!n->mid) return fail(path, r, "missing intermediate assertion");
      if (!need_premises(2)) return false;
      std::vector<CmdP> items;
      seq_items(exp.cmd, items);
      size_t k = static_cast<size_t>(n->take);
      if (k < 1 || k >= items.size())
        return fail(path, r, "take must split the sequence properly");
      CmdP c1 = seq_of(items, 0, k);
      CmdP c2 = seq_of(items, k, items.size());
      return check(n->premises[0], {exp.pre, c1, n->mid}, path + ".premises[0]") &&
             check(n->premises[1], {n->mid, c2, exp.post}, path + ".premises[1]");
    }

    if (r == "DCond") {
      if (exp.cmd->kind != CKind::Cond || exp.cmd->flavor != lang::CondFlavor::Det)
        return fail(path, r, "command is not a deterministic conditional");
      if (!need_premises(2)) return false;
      FormP pt = bi::f_bin(FKind::And, exp.pre, guard_det_atom(exp.cmd->expr, true));
      FormP pf = bi::f_bin(FKind::And, exp.pre, guard_det_atom(exp.cmd->expr, false));
      return check(n->premises[0], {pt, exp.cmd->c1, exp.post}, path + ".premises[0]") &&
             check(n->premises[1], {pf, exp.cmd->c2, exp.post}, path + ".premises[1]");
    }

    if (r == "DLoop") {
      if (exp.cmd->kind != CKind::While)
        return fail(path, r, "command is not a while loop");
      FormP want_post = bi::f_bin(FKind::And, exp.pre, guard_det_atom(exp.cmd->expr, false));
      if (!same(exp.post, want_post))
        return fail(path, r, "post is not invariant /\\ guard=ff: " + show(exp.post));
      if (!need_premises(1)) return false;
      FormP pt = bi::f_bin(FKind::And, exp.pre, guard_det_atom(exp.cmd->expr, true));
      return check(n->premises[0], {pt, exp.cmd->c1, exp.pre}, path + ".premises[0]");
    }

    if (r == "DFor") return check_dfor(n, exp, path);

    if (r == "RAssn") {
      if (exp.cmd->kind != CKind::Assign || exp.cmd->det_assign)
        return fail(path, r, "RAssn requires an assignment to a randomized variable");
      const ExprP& tgt = exp.cmd->target;
      if (!tgt->vid) return fail(path, r, "RAssn target must be a resolved cell");
      VarSet fv = lang::fv_expr(exp.cmd->expr, prog).all();
      if (fv.count(*tgt->vid))
        return fail(path, r, "side condition x not in FV(e) fails for " + tgt->vid->str());
      if (fkey(xp(exp.pre)) != "T") return fail(path, r, "pre must be T");
      FormP want = bi::f_sim(tgt, exp.cmd->expr);
      if (!same(exp.post, want))
        return fail(path, r, "post must be x ~ e, got " + show(exp.post));
      return true;
    }

    if (r == "RSamp") {
      if (exp.cmd->kind != CKind::Sample)
        return fail(path, r, "RSamp requires a sampling statement");
      if (fkey(xp(exp.pre)) != "T") return fail(path, r, "pre must be T");
      FormP want = bi::f_unif(exp.cmd->target, exp.cmd->sset.values);
      if (!same(exp.post, want))
        return fail(path, r, "post must be U_S[x], got " + show(exp.post));
      return true;
    }

    if (r == "RAssnStar") {
      if (exp.cmd->kind != CKind::Assign || exp.cmd->det_assign)
        return fail(path, r, "RAssnStar requires an assignment to a randomized variable");
      const ExprP& tgt = exp.cmd->target;
      if (!tgt->vid) return fail(path, r, "target must be a resolved cell");
      bi::FV pf = bi::fv_formula(xp(exp.pre), prog);
      VarSet fe = lang::fv_expr(exp.cmd->expr, prog).all();
      if (pf.all().count(*tgt->vid) || fe.count(*tgt->vid))
        return fail(path, r, "side condition x not in FV(phi, e) fails for " + tgt->vid->str());
      FormP want = bi::f_bin(FKind::And, exp.pre, bi::f_sim(tgt, exp.cmd->expr));
      if (!same(exp.post, want))
        return fail(path, r, "post must be phi /\\ x ~ e, got " + show(exp.post));
      return true;
    }

    if (r == "RSampStar") {
      if (exp.cmd->kind != CKind::Sample)
        return fail(path, r, "RSampStar requires a sampling statement");
      const ExprP& tgt = exp.cmd->target;
      if (!tgt->vid) return fail(path, r, "target must be a resolved cell");
      bi::FV pf = bi::fv_formula(xp(exp.pre), prog);
      if (pf.all().count(*tgt->vid))
        return fail(path, r, "side condition x not in FV(phi) fails for " + tgt->vid->str());
      FormP want =
          bi::f_bin(FKind::SepAnd, exp.pre, bi::f_unif(exp.cmd->target, exp.cmd->sset.values));
      if (!same(exp.post, want))
        return fail(path, r, "post must be phi * U_S[x], got " + show(exp.post));
      return true;
    }

    if (r == "RDCond") {
      if (exp.cmd->kind != CKind::Cond || exp.cmd->flavor != lang::CondFlavor::Rand)
        return fail(path, r, "command is not a randomized conditional");
      if (!need_premises(2)) return false;
      const ExprP& b = exp.cmd->expr;
      if (!cert_ok(n->cert, exp.pre,
                   bi::f_bin(FKind::Or, guard_true_sim(b), guard_false_sim(b)), path, r,
                   "guard-decidedness"))
        return false;
      FormP pt = bi::f_bin(FKind::And, exp.pre, guard_true_sim(b));
      FormP pf = bi::f_bin(FKind::And, exp.pre, guard_false_sim(b));
      return check(n->premises[0], {pt, exp.cmd->c1, exp.post}, path + ".premises[0]") &&
             check(n->premises[1], {pf, exp.cmd->c2, exp.post}, path + ".premises[1]");
    }

    if (r == "RCond" || r == "RCondCM") {
      if (exp.cmd->kind != CKind::Cond || exp.cmd->flavor != lang::CondFlavor::Rand)
        return fail(path, r, "command is not a randomized conditional");
      if (!n->phi) return fail(path, r, "missing frame formula phi");
      if (!need_premises(2)) return false;
      const ExprP& b = exp.cmd->expr;
      FormP want_pre = bi::f_bin(FKind::SepAnd, n->phi, bi::f_d(b));
      if (!same(exp.pre, want_pre))
        return fail(path, r, "pre must be phi * D[b]; phi * D[b] = " + show(want_pre) +
                                 " but pre = " + show(exp.pre));
      if (r == "RCond") {
        if (!n->psi) return fail(path, r, "missing branch post psi");
        if (!bi::sp_class(xp(n->psi), prog))
          return fail(path, r, "branch post-condition is not SP: " + show(n->psi));
        FormP want_post = bi::f_bin(FKind::SepAnd, n->psi, bi::f_d(b));
        if (!same(exp.post, want_post))
          return fail(path, r, "post must be psi * D[b], got " + show(exp.post));
        FormP pt = bi::f_bin(FKind::SepAnd, n->phi, guard_true_sim(b));
        FormP qt = bi::f_bin(FKind::SepAnd, n->psi, guard_true_sim(b));
        FormP pf = bi::f_bin(FKind::SepAnd, n->phi, guard_false_sim(b));
        FormP qf = bi::f_bin(FKind::SepAnd, n->psi, guard_false_sim(b));
        return check(n->premises[0], {pt, exp.cmd->c1, qt}, path + ".premises[0]") &&
               check(n->premises[1], {pf, exp.cmd->c2, qf}, path + ".premises[1]");
      }
      // RCondCM: branches may modify the guard; post must be closed under mixtures
      if (!bi::cm_class(xp(exp.post), prog))
        return fail(path, r, "post-condition is not CM: " + show(exp.post));
      FormP pt = bi::f_bin(FKind::SepAnd, n->phi, guard_true_sim(b));
      FormP pf = bi::f_bin(FKind::SepAnd, n->phi, guard_false_sim(b));
      return check(n->premises[0], {pt, exp.cmd->c1, exp.post}, path + ".premises[0]") &&
             check(n->premises[1], {pf, exp.cmd->c2, exp.post}, path + ".premises[1]");
    }

    if (r == "RCase") {
      if (!n->phi || !n->psi || !n->bexpr) return fail(path, r, "RCase needs phi, psi and b");
      if (!need_premises(2)) return false;
      const ExprP& b = n->bexpr;
      if (!same(exp.pre, bi::f_bin(FKind::SepAnd, n->phi, bi::f_d(b))))
        return fail(path, r, "pre must be phi * D[b]");
      if (!bi::sp_class(xp(n->psi), prog))
        return fail(path, r, "branch post-condition is not SP: " + show(n->psi));
      if (!same(exp.post, bi::f_bin(FKind::SepAnd, n->psi, bi::f_d(b))))
        return fail(path, r, "post must be psi * D[b]");
      FormP pt = bi::f_bin(FKind::SepAnd, n->phi, guard_true_sim(b));
      FormP qt = bi::f_bin(FKind::SepAnd, n->psi, guard_true_sim(b));
      FormP pf = bi::f_bin(FKind::SepAnd, n->phi, guard_false_sim(b));
      FormP qf = bi::f_bin(FKind::SepAnd, n->psi, guard_false_sim(b));
      return check(n->premises[0], {pt, exp.cmd, qt}, path + ".premises[0]") &&
             check(n->premises[1], {pf, exp.cmd, qf}, path + ".premises[1]");
    }

    if (r == "Weak") {
      if (!n->phi || !n->psi) return fail(path, r, "Weak needs inner phi and psi");
      if (!need_premises(1)) return false;
      if (!cert_ok(n->cert_pre, exp.pre, n->phi, path, r, "pre")) return false;
      if (!cert_ok(n->cert_post, n->psi, exp.post, path, r, "post")) return false;
      return check(n->premises[0], {n->phi, exp.cmd, n->psi}, path + ".premises[0]");
    }

    if (r == "True") {
      if (fkey(xp(exp.pre)) != "T" || fkey(xp(exp.post)) != "T")
        return fail(path, r, "True concludes {T} c {T}");
      return true;
    }

    if (r == "Conj" || r == "Case") {
      if (!n->phi || !n->phi2 || !n->psi || !n->psi2)
        return fail(path, r, "needs phi, phi2, psi, psi2");
      if (!need_premises(2)) return false;
      FKind k = r == "Conj" ? FKind::And : FKind::Or;
      if (!same(exp.pre, bi::f_bin(k, n->phi, n->phi2)))
        return fail(path, r, "pre does not split as stated");
      if (!same(exp.post, bi::f_bin(k, n->psi, n->psi2)))
        return fail(path, r, "post does not split as stated");
      return check(n->premises[0], {n->phi, exp.cmd, n->psi}, path + ".premises[0]") &&
             check(n->premises[1], {n->phi2, exp.cmd, n->psi2}, path + ".premises[1]");
    }

    if (r == "Const") {
      if (!n->eta) return fail(path, r, "Const needs eta");
      if (!need_premises(1)) return false;
      FormP inner_pre = n->phi ? n->phi : bi::f_top();
      FormP inner_post = n->psi ? n->psi : bi::f_top();
      if (!same(exp.pre, bi::f_bin(FKind::And, inner_pre, n->eta)))
        return fail(path, r, "pre is not phi /\\ eta: " + show(exp.pre));
      if (!same(exp.post, bi::f_bin(FKind::And, inner_post, n->eta)))
        return fail(path, r, "post is not psi /\\ eta: " + show(exp.post));
      auto rep = analyses::analyze(exp.cmd, prog);
      for (const auto& v : bi::fv_formula(xp(n->eta), prog).all())
        if (rep.mv.count(v))
          return fail(path, r, "FV(eta) meets MV(c) at " + v.str());
      return check(n->premises[0], {inner_pre, exp.cmd, inner_post}, path + ".premises[0]");
    }

    if (r == "Frame") {
      if (!n->eta || !n->phi || !n->psi) return fail(path, r, "Frame needs phi, psi, eta");
      if (!need_premises(1)) return false;
      if (!same(exp.pre, bi::f_bin(FKind::SepAnd, n->phi, n->eta)))
        return fail(path, r, "pre is not phi * eta: " + show(exp.pre));
      if (!same(exp.post, bi::f_bin(FKind::SepAnd, n->psi, n->eta)))
        return fail(path, r, "post is not psi * eta: " + show(exp.post));
      auto rep = analyses::analyze(exp.cmd, prog);
      for (const auto& v : bi::fv_formula(xp(n->eta), prog).all())
        if (rep.mv.count(v)) return fail(path, r, "FV(eta) meets MV(c) at " + v.str());
      // FV(psi) within T + reads + writes (randomized part)
      VarSet allowed;
      for (const auto& v : n->T) allowed.insert(v);
      for (const auto& v : rep.rv_rand(prog)) allowed.insert(v);
      for (const auto& v : rep.wv_rand(prog)) allowed.insert(v);
      for (const auto& v : bi::fv_formula(xp(n->psi), prog).rand)
        if (!allowed.count(v))
          return fail(path, r, "FV(psi) outside T + RV(c) + WV(c) at " + v.str());
      // phi forces the domain of T + RV(c)
      VarSet need;
      for (const auto& v : n->T) need.insert(v);
      for (const auto& v : rep.rv_rand(prog)) need.insert(v);
      VarSet fp = bi::footprint(xp(n->phi), prog);
      bool covered = true;
      for (const auto& v : need)
        if (!fp.count(v)) covered = false;
      if (!covered) {
        if (n->cert.empty())
          return fail(path, r, "phi does not force the domain of T + RV(c)");
        std::vector<FormP> ds;
        for (const auto& v : need) {
          lang::TypeEnv tenv{&prog, nullptr};
          ds.push_back(bi::f_d(lang::type_expr(lang::mk_var(v), tenv, {})));
        }
        if (!cert_ok(n->cert, n->phi, bi::sep_of(std::move(ds)), path, r, "domain")) return false;
      }
      return check(n->premises[0], {n->phi, exp.cmd, n->psi}, path + ".premises[0]");
    }

    return fail(path, r, "unknown rule");
  }

  bool check_dfor(const NodeP& n, const Judgment& exp, const std::string& path) {
    const std::string& r = n->rule;
    if (n->ivar.empty() || !n->inv || !n->body_template)
      return fail(path, r, "DFor needs ivar, lo, hi, inv and a body template");
    // match the desugared for shape and extract the body
    const CmdP& c = exp.cmd;
    if (c->kind != CKind::Seq || c->c1->kind != CKind::Assign || !c->c1->det_assign ||
        c->c2->kind != CKind::While)
      return fail(path, r, "command is not a desugared for loop");
    const CmdP& init = c->c1;
    const CmdP& wh = c->c2;
    if (!init->target->vid || init->target->vid->name != n->ivar)
      return fail(path, r, "loop initializes " + lang::print_expr(init->target) + ", not " + n->ivar);
    auto lo = lang::literal_nat(init->expr);
    if (!lo || *lo != n->lo) return fail(path, r, "loop lower bound mismatch");
    const ExprP& g = wh->expr;
    if (g->kind != EKind::Binary || g->op != BOp::Le || !g->args[0]->vid ||
        g->args[0]->vid->name != n->ivar)
      return fail(path, r, "guard is not i <= N");
    auto hi = lang::literal_nat(g->args[1]);
    if (!hi || *hi != n->hi) return fail(path, r, "loop upper bound mismatch (concrete bounds only)");
    if (wh->c1->kind != CKind::Seq) return fail(path, r, "loop body is not (c; i := i + 1)");
    std::vector<CmdP> chain;
    seq_items(wh->c1, chain);
    if (chain.back()->kind != CKind::Assign)
      return fail(path, r, "loop body is not (c; i := i + 1)");
    CmdP body = seq_of(chain, 0, chain.size() - 1);
    const CmdP& inc = chain.back();
    if (!inc->target->vid || inc->target->vid->name != n->ivar)
      return fail(path, r, "increment assigns the wrong variable");
    {
      auto inc_rhs = inc->expr;
      bool ok_inc = inc_rhs->kind == EKind::Binary && inc_rhs->op == BOp::Add &&
                    inc_rhs->args[0]->vid && inc_rhs->args[0]->vid->name == n->ivar &&
                    lang::literal_nat(inc_rhs->args[1]) == std::optional<long>(1);
      if (!ok_inc) return fail(path, r, "increment is not i := i + 1");
    }
    // the body must not modify the index (FV(N) is empty for literal bounds)
    auto rep = analyses::analyze(body, prog);
    VarId iv;
    iv.name = n->ivar;
    if (rep.mv.count(iv)) return fail(path, r, "loop body modifies the index");

    auto inst = [&](const FormP& f, long j) {
      FormP s = bi::subst_formula(f, n->ivar, lang::mk_lit(Value::of_nat(j)));
      return xp(s);
    };
    if (fkey(xp(exp.pre)) != fkey(inst(n->inv, n->lo)))
      return fail(path, r, "pre is not inv[lo/i]: " + show(exp.pre) + " vs " +
                               bi::print_formula(inst(n->inv, n->lo)));
    if (fkey(xp(exp.post)) != fkey(inst(n->inv, n->hi + 1)))
      return fail(path, r, "post is not inv[hi+1/i]");

    Program& mprog = const_cast<Program&>(prog);  // retype may not add declarations here
    for (long j = n->lo; j <= n->hi; ++j) {
      CmdP body_j = lang::subst_cmd(body, n->ivar, lang::mk_lit(Value::of_nat(j)));
      try {
        body_j = lang::retype_cmd(body_j, mprog);
      } catch (const Error& e) {
        return fail(path, r, "body instantiation at " + std::to_string(j) + ": " + e.what());
      }
      NodeP node_j = instantiate_node(n->body_template, n->ivar, j);
      Judgment exp_j{inst(n->inv, j), body_j, inst(n->inv, j + 1)};
      if (!check(node_j, exp_j, path + ".template@i=" + std::to_string(j))) return false;
    }
    return true;
  }

  static NodeP instantiate_node(const NodeP& n, const std::string& x, long j) {
    ExprP v = lang::mk_lit(Value::of_nat(j));
    auto out = std::make_shared<ProofNode>(*n);
    auto sf = [&](const FormP& f) { return f ? bi::subst_formula(f, x, v) : f; };
    out->mid = sf(n->mid);
    out->phi = sf(n->phi);
    out->psi = sf(n->psi);
    out->eta = sf(n->eta);
    out->phi2 = sf(n->phi2);
    out->psi2 = sf(n->psi2);
    out->inv = n->inv && n->ivar != x ? sf(n->inv) : n->inv;
    if (n->bexpr) out->bexpr = lang::subst_expr(n->bexpr, x, v);
    out->cert_pre = entail::subst_steps(n->cert_pre, x, v);
    out->cert_post = entail::subst_steps(n->cert_post, x, v);
    out->cert = entail::subst_steps(n->cert, x, v);
    out->premises.clear();
    for (const auto& p : n->premises) out->premises.push_back(instantiate_node(p, x, j));
    if (n->body_template && n->ivar != x)
      out->body_template = instantiate_node(n->body_template, x, j);
    return out;
  }
};

// ---------------------------------------------------------------------------
// loading

NodeP load_node(const json& j, const FormulaEnv& env) {
  auto n = std::make_shared<ProofNode>();
  n->rule = j.at("rule").get<std::string>();
  auto f = [&](const char* k) -> FormP {
    if (!j.contains(k)) return nullptr;
    FormP g = bi::parse_formula(j.at(k).get<std::string>());
    return bi::resolve_formula(g, env);
  };
  n->mid = f("mid");
  if (j.contains("take")) n->take = j.at("take").get<int>();
  n->phi = f("phi");
  n->psi = f("psi");
  n->eta = f("eta");
  n->phi2 = f("phi2");
  n->psi2 = f("psi2");
  if (j.contains("b")) {
    lang::TypeEnv tenv{env.prog, &env.index_vars};
    n->bexpr = lang::type_expr(lang::parse_expr(j.at("b").get<std::string>()), tenv, {});
  }
  if (j.contains("T")) {
    for (const auto& s : j.at("T")) {
      lang::TypeEnv tenv{env.prog, &env.index_vars};
      ExprP e = lang::type_expr(lang::parse_expr(s.get<std::string>()), tenv, {});
      if (!e->vid) throw Error("schema", "Frame set entry must name a cell");
      n->T.push_back(*e->vid);
    }
  }
  if (j.contains("cert_pre")) n->cert_pre = entail::load_steps(j.at("cert_pre"), env);
  if (j.contains("cert_post")) n->cert_post = entail::load_steps(j.at("cert_post"), env);
  if (j.contains("cert")) n->cert = entail::load_steps(j.at("cert"), env);
  if (n->rule == "DFor") {
    n->ivar = j.at("ivar").get<std::string>();
    n->lo = j.at("lo").get<long>();
    n->hi = j.at("hi").get<long>();
    FormulaEnv benv = env;
    benv.index_vars.push_back(n->ivar);
    FormP g = bi::parse_formula(j.at("inv").get<std::string>());
    n->inv = bi::resolve_formula(g, benv);
    n->body_template = load_node(j.at("template"), benv);
  }
  if (j.contains("premises"))
    for (const auto& p : j.at("premises")) n->premises.push_back(load_node(p, env));
  return n;
}

}  // namespace

ProofScript load_proof_script(const json& j, const std::string& base_dir) {
  ProofScript s;
  std::string text;
  if (j.contains("program_text")) {
    text = j.at("program_text").get<std::string>();
  } else {
    std::string path = j.at("program").get<std::string>();
    if (!path.empty() && path[0] != '/' && !base_dir.empty()) path = base_dir + "/" + path;
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot open program " + path);
    text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  s.prog = std::make_shared<Program>(lang::load_program(text));
  FormulaEnv env{s.prog.get(), {}};
  s.goal.pre = bi::resolve_formula(bi::parse_formula(j.at("pre").get<std::string>()), env);
  s.goal.post = bi::resolve_formula(bi::parse_formula(j.at("post").get<std::string>()), env);
  s.goal.cmd = s.prog->body;
  s.root = load_node(j.at("proof"), env);
  return s;
}

ProofScript load_proof_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open proof script " + path);
  json j = json::parse(in, nullptr, true, true);
  std::string dir = ".";
  auto slash = path.find_last_of('/');
  if (slash != std::string::npos) dir = path.substr(0, slash);
  return load_proof_script(j, dir);
}

CheckResult check_node(const NodeP& n, const Judgment& expected, const Program& prog) {
  PC pc(prog);
  pc.check(n, expected, "root");
  return pc.res;
}

CheckResult check_proof(const ProofScript& s) {
  return check_node(s.root, s.goal, *s.prog);
}

// ---------------------------------------------------------------------------
// derived-rule elaboration

namespace {

NodeP mk_node(const std::string& rule) {
  auto n = std::make_shared<ProofNode>();
  n->rule = rule;
  return n;
}

EntStep st(const std::string& rule) {
  EntStep s;
  s.rule = rule;
  return s;
}
EntStep st_f(const std::string& rule, std::vector<FormP> fs) {
  EntStep s = st(rule);
  s.fargs = std::move(fs);
  return s;
}

FormP typed_atom(const lang::ExprP& raw, const Program& prog) {
  lang::TypeEnv tenv{&prog, nullptr};
  return bi::f_atom(lang::type_expr(raw, tenv, {}));
}

struct ForElab {
  const Program& prog;
  bi::FormulaEnv env;
  const ProofNode& n;
  const Judgment& exp;
  CmdP body, init, wh, inc;
  ExprP iv;      // typed loop index
  ExprP guard;   // i <= hi
  long lo, hi;

  FormP xp(const FormP& f) const {
    return bi::expand_big(bi::resolve_formula(f, env), env);
  }
  FormP inv_at(long j) const {
    return xp(bi::subst_formula(n.inv, n.ivar, lang::mk_lit(Value::of_nat(j))));
  }
  FormP atom_i_eq(long j) const {
    return typed_atom(lang::mk_bin(BOp::Eq, iv, lang::mk_lit(Value::of_nat(j))), prog);
  }
  FormP atom_succ_eq(long j) const {
    // i + 1 = j + 1
    ExprP succ = lang::mk_bin(BOp::Add, iv, lang::mk_lit(Value::of_nat(1)));
    return typed_atom(lang::mk_bin(BOp::Eq, succ, lang::mk_lit(Value::of_nat(j + 1))), prog);
  }
  FormP batom(bool v) const { return guard_det_atom(guard, v); }

  // arm_j of the loop invariant disjunction (at = substituted index expr form)
  FormP arm(long j) const { return bi::f_bin(FKind::And, atom_i_eq(j), inv_at(j)); }

  FormP disj(std::vector<FormP> arms) const {
    FormP out = arms.back();
    for (size_t k = arms.size() - 1; k-- > 0;) out = bi::f_bin(FKind::Or, arms[k], out);
    return out;
  }

  FormP big_inv() const {
    std::vector<FormP> arms;
    for (long j = lo; j <= hi + 1; ++j) arms.push_back(arm(j));
    return disj(arms);
  }

  // steps embedding the formula at arm index t into the given disjunction
  std::vector<EntStep> embed(const std::vector<FormP>& arms, size_t t) const {
    std::vector<EntStep> out;
    if (t + 1 < arms.size()) {
      std::vector<FormP> tail(arms.begin() + static_cast<long>(t) + 1, arms.end());
      out.push_back(st_f("OrIntroL", {disj(tail)}));
    }
    for (size_t k = t; k-- > 0;) out.push_back(st_f("OrIntroR", {arms[k]}));
    return out;
  }

  NodeP build() {
    // left: {inv_lo} i := lo {I}
    FormP I = big_inv();
    std::vector<FormP> arms_all;
    for (long j = lo; j <= hi + 1; ++j) arms_all.push_back(arm(j));

    NodeP dassn = mk_node("DAssn");
    NodeP left = mk_node("Weak");
    {
      // pre certificate: inv_lo |- I[lo/i]
      std::vector<FormP> subst_arms;
      for (long j = lo; j <= hi + 1; ++j) {
        FormP a = typed_atom(lang::mk_bin(BOp::Eq, lang::mk_lit(Value::of_nat(lo)),
                                          lang::mk_lit(Value::of_nat(j))),
                             prog);
        subst_arms.push_back(bi::f_bin(FKind::And, a, inv_at(j)));
      }
      EntStep intro = st("AndIntro");
      intro.subs.push_back({st("TopIntro"), st_f("DetTauto", {subst_arms[0]->l})});
      intro.subs.push_back({});
      std::vector<EntStep> pre_cert = {intro};
      for (const auto& s : embed(subst_arms, 0)) pre_cert.push_back(s);
      left->cert_pre = pre_cert;
      left->phi = disj(subst_arms);
      left->psi = I;
      left->premises = {dassn};
    }

    // right: {I} while {inv_{hi+1}}
    NodeP dloop = mk_node("DLoop");
    {
      // loop body premise: {I /\ b=tt} (body; i:=i+1) {I}
      std::vector<FormP> armsb;
      for (long j = lo; j <= hi; ++j)
        armsb.push_back(bi::f_bin(FKind::And, arm(j), batom(true)));
      FormP Dp = disj(armsb);

      NodeP inner = mk_node("Weak");
      inner->phi = Dp;
      inner->psi = I;
      // distribute (I /\ b=tt) into arm conjunctions, then drop the impossible arm
      {
        std::vector<EntStep> cs;
        for (long k = 0; k < hi + 1 - lo + 1; ++k) {
          EntStep d = st("AndOrDistrib");
          d.at.assign(static_cast<size_t>(k), 1);
          if (k == hi + 1 - lo) break;  // innermost is not an Or anymore
          cs.push_back(d);
        }
        // arms now: (arm_j /\ b=tt) for j in lo..hi+1; eliminate j=hi+1
        std::function<EntStep(long)> elim = [&](long j) -> EntStep {
          EntStep oe = st("OrElim");
          std::vector<EntStep> here;
          if (j == hi + 1) {
            here.push_back(
                st_f("AndSelect", {bi::f_bin(FKind::And, atom_i_eq(j), batom(true))}));
            here.push_back(st_f("DetTauto", {bi::f_bot()}));
            here.push_back(st_f("BotElim", {Dp}));
          } else {
            FormP want = bi::f_bin(FKind::And, arm(j), batom(true));
            here.push_back(st_f("AndSelect", {want}));
            for (const auto& s : embed(armsb, static_cast<size_t>(j - lo))) here.push_back(s);
          }
          if (j == hi + 1) {
            return oe;  // unused marker; handled by caller
          }
          oe.subs.push_back(here);
          std::vector<EntStep> rest;
          if (j + 1 == hi + 1) {
            rest.push_back(
                st_f("AndSelect", {bi::f_bin(FKind::And, atom_i_eq(hi + 1), batom(true))}));
            rest.push_back(st_f("DetTauto", {bi::f_bot()}));
            rest.push_back(st_f("BotElim", {Dp}));
          } else {
            rest.push_back(elim(j + 1));
          }
          oe.subs.push_back(rest);
          return oe;
        };
        cs.push_back(elim(lo));
        inner->cert_pre = cs;
      }

      // case split over the live arms
      std::function<NodeP(long)> case_tree = [&](long j) -> NodeP {
        NodeP armnode = arm_proof(j);
        if (j == hi) return armnode;
        NodeP c = mk_node("Case");
        c->phi = armsb[static_cast<size_t>(j - lo)];
        std::vector<FormP> tail(armsb.begin() + (j - lo) + 1, armsb.end());
        c->phi2 = disj(tail);
        c->psi = I;
        c->psi2 = or_of_I(static_cast<long>(tail.size()));
        c->premises = {armnode, case_tree(j + 1)};
        return c;
      };
      if (lo == hi) {
        inner->premises = {arm_proof(lo)};
      } else {
        NodeP cs = case_tree(lo);
        // post-condition of the Case chain is I \/ I \/ ... ; flatten by Weak
        NodeP wk = mk_node("Weak");
        wk->phi = Dp;
        wk->psi = or_of_I(hi - lo + 1);
        wk->cert_post = flatten_or_I(hi - lo + 1);
        wk->premises = {cs};
        inner->premises = {wk};
        // inner premise chain: {Dp} c {I} via wk
        dloop->premises = {inner};
      }
      if (lo == hi) dloop->premises = {inner};
    }

    NodeP right = mk_node("Weak");
    {
      right->phi = I;
      right->psi = bi::f_bin(FKind::And, I, batom(false));
      // post certificate: (I /\ b=ff) |- inv_{hi+1}
      std::vector<EntStep> cs;
      std::vector<FormP> armsf;
      for (long j = lo; j <= hi + 1; ++j)
        armsf.push_back(bi::f_bin(FKind::And, arm(j), batom(false)));
      for (long k = 0; k < hi + 1 - lo; ++k) {
        EntStep d = st("AndOrDistrib");
        d.at.assign(static_cast<size_t>(k), 1);
        cs.push_back(d);
      }
      std::function<EntStep(long)> elim = [&](long j) -> EntStep {
        EntStep oe = st("OrElim");
        auto handle = [&](long jj) {
          std::vector<EntStep> here;
          if (jj == hi + 1) {
            here.push_back(st_f("AndSelect", {inv_at(hi + 1)}));
          } else {
            here.push_back(
                st_f("AndSelect", {bi::f_bin(FKind::And, atom_i_eq(jj), batom(false))}));
            here.push_back(st_f("DetTauto", {bi::f_bot()}));
            here.push_back(st_f("BotElim", {inv_at(hi + 1)}));
          }
          return here;
        };
        oe.subs.push_back(handle(j));
        if (j + 1 == hi + 1) {
          oe.subs.push_back(handle(hi + 1));
        } else {
          oe.subs.push_back({elim(j + 1)});
        }
        return oe;
      };
      cs.push_back(elim(lo));
      right->cert_post = cs;
      right->premises = {dloop};
    }

    NodeP root = mk_node("Seqn");
    root->mid = big_inv();
    root->premises = {left, right};
    return root;
  }

  FormP or_of_I(long k) const {
    FormP I = big_inv();
    FormP out = I;
    for (long i2 = 1; i2 < k; ++i2) out = bi::f_bin(FKind::Or, I, out);
    return out;
  }

  std::vector<EntStep> flatten_or_I(long k) const {
    // I \/ (I \/ ...) |- I by nested OrElim with refl arms
    std::function<EntStep(long)> go = [&](long depth) -> EntStep {
      EntStep oe = st("OrElim");
      oe.subs.push_back({});
      if (depth <= 2)
        oe.subs.push_back({});
      else
        oe.subs.push_back({go(depth - 1)});
      return oe;
    };
    if (k <= 1) return {};
    return {go(k)};
  }

  // {arm_j /\ b=tt} (body; i := i+1) {I}
  NodeP arm_proof(long j) const {
    FormP I = big_inv();
    FormP atom = atom_i_eq(j);
    FormP mid = bi::f_bin(FKind::And, inv_at(j + 1), atom);

    // left: {arm_j /\ b=tt} body {inv_{j+1} /\ i=j}
    NodeP constn = mk_node("Const");
    constn->eta = atom;
    constn->phi = inv_at(j);
    constn->psi = inv_at(j + 1);
    constn->premises = {PC::instantiate_node(n.body_template, n.ivar, j)};

    NodeP lw = mk_node("Weak");
    lw->phi = bi::f_bin(FKind::And, inv_at(j), atom);
    lw->psi = bi::f_bin(FKind::And, inv_at(j + 1), atom);
    lw->cert_pre = {st_f("AndSelect", {lw->phi})};
    lw->cert_post = {st_f("AndSelect", {mid})};
    lw->premises = {constn};

    // right: {inv_{j+1} /\ i=j} i := i+1 {I}
    std::vector<FormP> succ_arms;
    for (long k = lo; k <= hi + 1; ++k) {
      FormP a = typed_atom(
          lang::mk_bin(BOp::Eq, lang::mk_bin(BOp::Add, iv, lang::mk_lit(Value::of_nat(1))),
                       lang::mk_lit(Value::of_nat(k))),
          prog);
      succ_arms.push_back(bi::f_bin(FKind::And, a, inv_at(k)));
    }
    NodeP rw = mk_node("Weak");
    rw->phi = disj(succ_arms);
    rw->psi = I;
    {
      EntStep intro = st("AndIntro");
      intro.subs.push_back({st_f("AndSelect", {atom}), st_f("DetTauto", {atom_succ_eq(j)})});
      intro.subs.push_back({st_f("AndSelect", {inv_at(j + 1)})});
      std::vector<EntStep> cs = {intro};
      for (const auto& s : embed(succ_arms, static_cast<size_t>(j + 1 - lo))) cs.push_back(s);
      rw->cert_pre = cs;
    }
    rw->premises = {mk_node("DAssn")};

    NodeP sq = mk_node("Seqn");
    sq->mid = mid;
    std::vector<CmdP> body_items;
    seq_items(body, body_items);
    sq->take = static_cast<int>(body_items.size());
    sq->premises = {lw, rw};
    return sq;
  }
};

}  // namespace

NodeP elaborate_derived(const NodeP& n, const Judgment& exp, const Program& prog) {
  if (n->rule == "RAssnStar") {
    if (exp.cmd->kind != CKind::Assign) throw Error("elaborate", "command is not an assignment");
    NodeP rassn = mk_node("RAssn");
    NodeP cn = mk_node("Const");
    cn->eta = exp.pre;
    cn->phi = bi::f_top();
    cn->psi = bi::f_sim(exp.cmd->target, exp.cmd->expr);
    cn->premises = {rassn};
    return cn;
  }
  if (n->rule == "RSampStar") {
    if (exp.cmd->kind != CKind::Sample) throw Error("elaborate", "command is not a sampling");
    NodeP rsamp = mk_node("RSamp");
    NodeP fr = mk_node("Frame");
    fr->eta = exp.pre;
    fr->phi = bi::f_top();
    fr->psi = bi::f_unif(exp.cmd->target, exp.cmd->sset.values);
    fr->premises = {rsamp};
    return fr;
  }
  if (n->rule == "DFor") {
    const lang::CmdP& c = exp.cmd;
    if (c->kind != CKind::Seq || c->c2->kind != CKind::While)
      throw Error("elaborate", "command is not a desugared for loop");
    std::vector<CmdP> chain;
    seq_items(c->c2->c1, chain);
    CmdP body = seq_of(chain, 0, chain.size() - 1);
    CmdP inc = chain.back();
    CmdP body0 = lang::subst_cmd(body, n->ivar, lang::mk_lit(Value::of_nat(0)));
    if (lang::print_cmd(body0) != lang::print_cmd(body))
      throw Error("elaborate",
                  "DFor elaboration requires an index-free body; index-dependent bodies are "
                  "checked directly at concrete bounds");
    ForElab fe{prog, bi::FormulaEnv{&prog, {}}, *n, exp, body, c->c1, c->c2,
               inc, c->c1->target, c->c2->expr, n->lo, n->hi};
    return fe.build();
  }
  throw Error("elaborate", "not a derived rule: " + n->rule);
}

}  // namespace psl::proof
