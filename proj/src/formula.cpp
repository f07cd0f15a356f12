#include "psl/formula.hpp"

#include <algorithm>
#include <functional>

#include "psl/printer.hpp"
#include "psl/typecheck.hpp"

namespace psl::bi {

using lang::EKind;
using lang::TypeEnv;
using lang::TypeKind;
using lang::ValType;
using lang::VarKind;

FormP f_top() {
  auto f = std::make_shared<Formula>();
  f->kind = FKind::Top;
  return f;
}
FormP f_bot() {
  auto f = std::make_shared<Formula>();
  f->kind = FKind::Bot;
  return f;
}
FormP f_atom(ExprP e) {
  auto f = std::make_shared<Formula>();
  f->kind = FKind::AtomDet;
  f->a = std::move(e);
  return f;
}
FormP f_unif(ExprP e, std::vector<Value> uset) {
  auto f = std::make_shared<Formula>();
  f->kind = FKind::Unif;
  f->a = std::move(e);
  f->uset = std::move(uset);
  return f;
}
FormP f_sim(ExprP a, ExprP b) {
  auto f = std::make_shared<Formula>();
  f->kind = FKind::Sim;
  f->a = std::move(a);
  f->b = std::move(b);
  return f;
}
FormP f_d(ExprP e) {
  auto f = std::make_shared<Formula>();
  f->kind = FKind::Sim;
  f->a = e;
  f->b = e;
  f->printed_as_d = true;
  return f;
}
FormP f_bin(FKind k, FormP l, FormP r) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  f->l = std::move(l);
  f->r = std::move(r);
  return f;
}
FormP f_big(FKind k, std::string ivar, IndexRange range, FormP body) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  f->ivar = std::move(ivar);
  f->range = std::move(range);
  f->body = std::move(body);
  return f;
}

// ---------------------------------------------------------------------------
// printing

namespace {

int fprec(FKind k) {
  switch (k) {
    case FKind::Imp:
    case FKind::SepImp: return 1;
    case FKind::Or: return 2;
    case FKind::And: return 3;
    case FKind::SepAnd: return 4;
    default: return 6;
  }
}

std::string pf(const FormP& f, int parent) {
  int p = fprec(f->kind);
  std::string s;
  switch (f->kind) {
    case FKind::Top: return "T";
    case FKind::Bot: return "F";
    case FKind::AtomDet: return lang::print_expr(f->a);
    case FKind::Unif: {
      s = "U";
      if (!f->uset.empty()) {
        s += "{";
        for (size_t i = 0; i < f->uset.size(); ++i) {
          if (i) s += ",";
          s += f->uset[i].str();
        }
        s += "}";
      }
      s += "[" + lang::print_expr(f->a) + "]";
      return s;
    }
    case FKind::Sim:
      if (f->printed_as_d && lang::expr_eq(f->a, f->b)) return "D[" + lang::print_expr(f->a) + "]";
      return lang::print_expr_prec(f->a, 4) + " ~ " + lang::print_expr_prec(f->b, 4);
    case FKind::And:
      s = pf(f->l, p) + " /\\ " + pf(f->r, p + 1);
      break;
    case FKind::Or:
      s = pf(f->l, p) + " \\/ " + pf(f->r, p + 1);
      break;
    case FKind::Imp:
      s = pf(f->l, p + 1) + " -> " + pf(f->r, p);
      break;
    case FKind::SepAnd:
      s = pf(f->l, p) + " * " + pf(f->r, p + 1);
      break;
    case FKind::SepImp:
      s = pf(f->l, p + 1) + " -* " + pf(f->r, p);
      break;
    case FKind::BigAnd:
    case FKind::BigSep: {
      s = (f->kind == FKind::BigAnd ? "bigand " : "bigsep ") + f->ivar + " in [" +
          lang::print_expr(f->range.lo) + "," + lang::print_expr(f->range.hi) +
          (f->range.hi_closed ? "]" : ")");
      if (!f->range.excl.empty()) {
        s += " \\ {";
        for (size_t i = 0; i < f->range.excl.size(); ++i) {
          if (i) s += ",";
          s += lang::print_expr(f->range.excl[i]);
        }
        s += "}";
      }
      s += " : " + pf(f->body, 6);
      return parent > 1 ? "(" + s + ")" : s;
    }
  }
  return p < parent ? "(" + s + ")" : s;
}

}  // namespace

std::string print_formula(const FormP& f) { return pf(f, 0); }

// ---------------------------------------------------------------------------
// resolution

namespace {

FormP resolve_rec(const FormP& f, const FormulaEnv& env, std::vector<std::string>& ivars) {
  TypeEnv tenv{env.prog, &ivars};
  switch (f->kind) {
    case FKind::Top:
    case FKind::Bot: return f;
    case FKind::AtomDet: {
      ExprP e = lang::type_expr(f->a, tenv, ValType::boolean());
      if (lang::fv_expr(e, *env.prog).has_rand())
        throw Error("formula", "deterministic atom mentions randomized variables; use ~");
      auto nf = std::make_shared<Formula>(*f);
      nf->a = e;
      return nf;
    }
    case FKind::Unif: {
      ExprP e = lang::type_expr(f->a, tenv, {});
      auto nf = std::make_shared<Formula>(*f);
      nf->a = e;
      if (!nf->uset.empty()) {
        std::vector<Value> vs;
        for (const auto& v : nf->uset) {
          ExprP lit = lang::type_expr(lang::mk_lit(v), tenv, *e->type);
          vs.push_back(lit->lit);
        }
        std::sort(vs.begin(), vs.end());
        vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
        nf->uset = std::move(vs);
      }
      return nf;
    }
    case FKind::Sim: {
      bool was_d = lang::expr_eq(f->a, f->b);
      ExprP a = lang::type_expr(f->a, tenv, {});
      ExprP b = was_d ? a : lang::type_expr(f->b, tenv, *a->type);
      auto nf = std::make_shared<Formula>(*f);
      nf->a = a;
      nf->b = b;
      nf->printed_as_d = was_d;
      return nf;
    }
    case FKind::And:
    case FKind::Or:
    case FKind::Imp:
    case FKind::SepAnd:
    case FKind::SepImp: {
      auto nf = std::make_shared<Formula>(*f);
      nf->l = resolve_rec(f->l, env, ivars);
      nf->r = resolve_rec(f->r, env, ivars);
      return nf;
    }
    case FKind::BigAnd:
    case FKind::BigSep: {
      auto nf = std::make_shared<Formula>(*f);
      nf->range.lo = lang::type_expr(f->range.lo, tenv, ValType::nat(1L << 30));
      nf->range.hi = lang::type_expr(f->range.hi, tenv, ValType::nat(1L << 30));
      for (auto& x : nf->range.excl) x = lang::type_expr(x, tenv, ValType::nat(1L << 30));
      ivars.push_back(f->ivar);
      nf->body = resolve_rec(f->body, env, ivars);
      ivars.pop_back();
      return nf;
    }
  }
  throw Error("formula", "unhandled formula kind");
}

}  // namespace

FormP resolve_formula(const FormP& f, const FormulaEnv& env) {
  std::vector<std::string> ivars = env.index_vars;
  return resolve_rec(f, env, ivars);
}

FormP subst_formula(const FormP& f, const std::string& x, const ExprP& e) {
  switch (f->kind) {
    case FKind::Top:
    case FKind::Bot: return f;
    case FKind::AtomDet: {
      auto nf = std::make_shared<Formula>(*f);
      nf->a = lang::subst_expr(f->a, x, e);
      return nf;
    }
    case FKind::Unif: {
      auto nf = std::make_shared<Formula>(*f);
      nf->a = lang::subst_expr(f->a, x, e);
      return nf;
    }
    case FKind::Sim: {
      auto nf = std::make_shared<Formula>(*f);
      nf->a = lang::subst_expr(f->a, x, e);
      nf->b = lang::subst_expr(f->b, x, e);
      return nf;
    }
    case FKind::And:
    case FKind::Or:
    case FKind::Imp:
    case FKind::SepAnd:
    case FKind::SepImp: {
      auto nf = std::make_shared<Formula>(*f);
      nf->l = subst_formula(f->l, x, e);
      nf->r = subst_formula(f->r, x, e);
      return nf;
    }
    case FKind::BigAnd:
    case FKind::BigSep: {
      auto nf = std::make_shared<Formula>(*f);
      nf->range.lo = lang::subst_expr(f->range.lo, x, e);
      nf->range.hi = lang::subst_expr(f->range.hi, x, e);
      for (auto& ex : nf->range.excl) ex = lang::subst_expr(ex, x, e);
      if (f->ivar != x) nf->body = subst_formula(f->body, x, e);
      return nf;
    }
  }
  return f;
}

FormP expand_big(const FormP& f, const FormulaEnv& env) {
  switch (f->kind) {
    case FKind::Top:
    case FKind::Bot:
    case FKind::AtomDet:
    case FKind::Unif:
    case FKind::Sim: return f;
    case FKind::And:
    case FKind::Or:
    case FKind::Imp:
    case FKind::SepAnd:
    case FKind::SepImp: {
      auto nf = std::make_shared<Formula>(*f);
      nf->l = expand_big(f->l, env);
      nf->r = expand_big(f->r, env);
      return nf;
    }
    case FKind::BigAnd:
    case FKind::BigSep: {
      auto lo = lang::literal_nat(f->range.lo);
      auto hi = lang::literal_nat(f->range.hi);
      if (!lo || !hi) throw Error("formula", "unbounded range in big operator");
      std::set<long> skip;
      for (const auto& ex : f->range.excl) {
        auto v = lang::literal_nat(ex);
        if (!v) throw Error("formula", "non-concrete exclusion in big operator");
        skip.insert(*v);
      }
      long end = f->range.hi_closed ? *hi : *hi - 1;
      std::vector<FormP> parts;
      for (long j = *lo; j <= end; ++j) {
        if (skip.count(j)) continue;
        FormP inst = subst_formula(f->body, f->ivar, lang::mk_lit(Value::of_nat(j)));
        inst = resolve_formula(inst, env);
        parts.push_back(expand_big(inst, env));
      }
      if (parts.empty()) return f_top();
      FormP out = parts.back();
      for (size_t k = parts.size() - 1; k-- > 0;)
        out = f_bin(f->kind == FKind::BigAnd ? FKind::And : FKind::SepAnd, parts[k], out);
      return out;
    }
  }
  return f;
}

FV fv_formula(const FormP& f, const Program& prog) {
  FV out;
  std::function<void(const FormP&)> go = [&](const FormP& g) {
    switch (g->kind) {
      case FKind::Top:
      case FKind::Bot: return;
      case FKind::AtomDet:
      case FKind::Unif: {
        auto fv = lang::fv_expr(g->a, prog);
        out.det.insert(fv.det.begin(), fv.det.end());
        out.rand.insert(fv.rand.begin(), fv.rand.end());
        return;
      }
      case FKind::Sim: {
        auto fa = lang::fv_expr(g->a, prog);
        auto fb = lang::fv_expr(g->b, prog);
        out.det.insert(fa.det.begin(), fa.det.end());
        out.det.insert(fb.det.begin(), fb.det.end());
        out.rand.insert(fa.rand.begin(), fa.rand.end());
        out.rand.insert(fb.rand.begin(), fb.rand.end());
        return;
      }
      case FKind::And:
      case FKind::Or:
      case FKind::Imp:
      case FKind::SepAnd:
      case FKind::SepImp:
        go(g->l);
        go(g->r);
        return;
      default: throw Error("formula", "free variables of an unexpanded big operator");
    }
  };
  go(f);
  return out;
}

VarSet footprint(const FormP& f, const Program& prog) {
  switch (f->kind) {
    case FKind::Top:
    case FKind::Bot:
    case FKind::Imp:
    case FKind::SepImp: return {};
    case FKind::AtomDet: return {};
    case FKind::Unif: return lang::fv_expr(f->a, prog).rand;
    case FKind::Sim: {
      VarSet s = lang::fv_expr(f->a, prog).rand;
      VarSet t = lang::fv_expr(f->b, prog).rand;
      s.insert(t.begin(), t.end());
      return s;
    }
    case FKind::And:
    case FKind::SepAnd: {
      VarSet s = footprint(f->l, prog);
      VarSet t = footprint(f->r, prog);
      s.insert(t.begin(), t.end());
      return s;
    }
    case FKind::Or: {
      VarSet s = footprint(f->l, prog);
      VarSet t = footprint(f->r, prog);
      VarSet out;
      for (const auto& v : s)
        if (t.count(v)) out.insert(v);
      return out;
    }
    default: throw Error("formula", "footprint of an unexpanded big operator");
  }
}

bool sp_class(const FormP& f, const Program& prog) {
  switch (f->kind) {
    case FKind::Top:
    case FKind::Bot:
    case FKind::AtomDet: return true;  // deterministic propositions
    case FKind::Sim: {
      // x_r ~ e_d
      if (f->a->kind != EKind::Loc || !f->a->vid) return false;
      if (prog.kind_of(*f->a->vid) != VarKind::Rand) return false;
      return !lang::fv_expr(f->b, prog).has_rand();
    }
    case FKind::Unif:
      return f->a->kind == EKind::Loc && f->a->vid && prog.kind_of(*f->a->vid) == VarKind::Rand;
    case FKind::SepAnd: return sp_class(f->l, prog) && sp_class(f->r, prog);
    default: return false;
  }
}

bool cm_class(const FormP& f, const Program& prog) {
  if (sp_class(f, prog)) return true;
  switch (f->kind) {
    case FKind::And: return cm_class(f->l, prog) && cm_class(f->r, prog);
    case FKind::SepAnd: return sp_class(f->l, prog) && cm_class(f->r, prog);
    default: return false;
  }
}

std::vector<FormP> flatten_and(const FormP& f) {
  std::vector<FormP> out;
  std::function<void(const FormP&)> go = [&](const FormP& g) {
    if (g->kind == FKind::And) {
      go(g->l);
      go(g->r);
    } else if (g->kind != FKind::Top) {
      out.push_back(g);
    }
  };
  go(f);
  return out;
}

std::vector<FormP> flatten_sep(const FormP& f) {
  std::vector<FormP> out;
  std::function<void(const FormP&)> go = [&](const FormP& g) {
    if (g->kind == FKind::SepAnd) {
      go(g->l);
      go(g->r);
    } else if (g->kind != FKind::Top) {
      out.push_back(g);
    }
  };
  go(f);
  return out;
}

FormP and_of(std::vector<FormP> fs) {
  if (fs.empty()) return f_top();
  FormP out = fs.back();
  for (size_t k = fs.size() - 1; k-- > 0;) out = f_bin(FKind::And, fs[k], out);
  return out;
}

FormP sep_of(std::vector<FormP> fs) {
  if (fs.empty()) return f_top();
  FormP out = fs.back();
  for (size_t k = fs.size() - 1; k-- > 0;) out = f_bin(FKind::SepAnd, fs[k], out);
  return out;
}

std::vector<Value> unif_set(const Formula& f, const Program& prog) {
  (void)prog;
  if (!f.uset.empty()) return f.uset;
  if (!f.a->type) throw Error("formula", "uniformity atom not resolved");
  return lang::enumerate_carrier(*f.a->type);
}

std::string fkey(const FormP& f) {
  switch (f->kind) {
    case FKind::Top: return "T";
    case FKind::Bot: return "F";
    case FKind::AtomDet: return "p(" + lang::print_expr(f->a) + ")";
    case FKind::Unif: {
      std::string s = "U{";
      if (f->uset.empty()) {
        if (!f->a->type) throw Error("formula", "fkey of unresolved uniformity atom");
        for (const auto& v : lang::enumerate_carrier(*f->a->type)) s += v.str() + ",";
      } else {
        for (const auto& v : f->uset) s += v.str() + ",";
      }
      return s + "}(" + lang::print_expr(f->a) + ")";
    }
    case FKind::Sim: return "S(" + lang::print_expr(f->a) + "," + lang::print_expr(f->b) + ")";
    case FKind::And:
    case FKind::SepAnd: {
      auto parts = f->kind == FKind::And ? flatten_and(f) : flatten_sep(f);
      if (parts.empty()) return "T";
      std::vector<std::string> keys;
      for (const auto& g : parts) keys.push_back(fkey(g));
      std::sort(keys.begin(), keys.end());
      if (keys.size() == 1) return keys[0];
      std::string s = f->kind == FKind::And ? "A{" : "P{";
      for (const auto& k : keys) s += k + ";";
      return s + "}";
    }
    case FKind::Or: return "O(" + fkey(f->l) + "," + fkey(f->r) + ")";
    case FKind::Imp: return "I(" + fkey(f->l) + "," + fkey(f->r) + ")";
    case FKind::SepImp: return "W(" + fkey(f->l) + "," + fkey(f->r) + ")";
    default: throw Error("formula", "fkey of an unexpanded big operator");
  }
}

}  // namespace psl::bi
