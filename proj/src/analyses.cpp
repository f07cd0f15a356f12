#include "psl/analyses.hpp"

namespace psl::analyses {

using lang::CKind;
using lang::ExprFV;
using lang::ExprP;

namespace {

VarSet unions(const VarSet& a, const VarSet& b) {
  VarSet s = a;
  s.insert(b.begin(), b.end());
  return s;
}
VarSet minus(const VarSet& a, const VarSet& b) {
  VarSet s;
  for (const auto& v : a)
    if (!b.count(v)) s.insert(v);
  return s;
}
VarSet inter(const VarSet& a, const VarSet& b) {
  VarSet s;
  for (const auto& v : a)
    if (b.count(v)) s.insert(v);
  return s;
}

struct Target {
  VarSet may;   // cells possibly written
  VarSet must;  // the single cell when the path is static
  VarSet reads; // index expressions read while resolving
};

Target target_sets(const ExprP& t, const Program& prog) {
  Target out;
  if (t->vid) {
    out.may.insert(*t->vid);
    out.must.insert(*t->vid);
    return out;
  }
  for (const auto& v : prog.cells_of(t->base)) out.may.insert(v);
  for (const auto& c : t->comps) {
    ExprFV fv = lang::fv_expr(c.index, prog);
    out.reads = unions(out.reads, fv.all());
  }
  return out;
}

VarReport go(const CmdP& c, const Program& prog) {
  switch (c->kind) {
    case CKind::Skip: return {};
    case CKind::Assign:
    case CKind::Sample: {
      Target t = target_sets(c->target, prog);
      VarSet reads = t.reads;
      if (c->kind == CKind::Assign) reads = unions(reads, lang::fv_expr(c->expr, prog).all());
      VarReport r;
      // a dynamically indexed target preserves the cells it misses, so they
      // count as read (MV \ WV <= RV keeps the output factorization exact)
      r.rv = unions(reads, minus(t.may, t.must));
      r.wv = minus(t.must, r.rv);
      r.mv = t.may;
      return r;
    }
    case CKind::Seq: {
      VarReport a = go(c->c1, prog);
      VarReport b = go(c->c2, prog);
      VarReport r;
      r.rv = unions(a.rv, minus(b.rv, a.wv));
      r.wv = unions(a.wv, minus(b.wv, a.rv));
      r.mv = unions(a.mv, b.mv);
      return r;
    }
    case CKind::Cond: {
      VarSet g = lang::fv_expr(c->expr, prog).all();
      VarReport a = go(c->c1, prog);
      VarReport b = go(c->c2, prog);
      VarReport r;
      r.wv = minus(inter(a.wv, b.wv), g);
      r.mv = unions(a.mv, b.mv);
      // variables modified in one branch but preserved in the other carry
      // their old value through; count them as read so that outputs depend
      // only on reads (Lemma 4.5 item 3)
      r.rv = unions(unions(g, unions(a.rv, b.rv)), minus(r.mv, r.wv));
      return r;
    }
    case CKind::While: {
      VarReport a = go(c->c1, prog);
      VarReport r;
      // the loop may run zero times: nothing is must-written and every
      // possibly-modified variable may keep its input value
      r.wv = {};
      r.mv = a.mv;
      r.rv = unions(unions(a.rv, lang::fv_expr(c->expr, prog).det), a.mv);
      return r;
    }
    default:
      throw Error("analyses", "command not desugared", c->loc);
  }
}

}  // namespace

VarReport analyze(const CmdP& c, const Program& prog) { return go(c, prog); }

}  // namespace psl::analyses
