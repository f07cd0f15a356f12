#include "psl/typecheck.hpp"

#include <functional>

#include "psl/parser.hpp"
#include "psl/printer.hpp"

namespace psl::lang {

namespace {

[[noreturn]] void terr(const std::string& msg, SrcLoc loc = {}) { throw Error("type", msg, loc); }

bool compat(const ValType& a, const ValType& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case TypeKind::Bool: return true;
    case TypeKind::BitStr: return a.width == b.width || a.width < 0 || b.width < 0;
    case TypeKind::ZMod: return a.modulus == b.modulus;
    case TypeKind::Nat: return true;  // bounds are enumeration hints
    case TypeKind::Tuple: {
      if (a.elems.size() != b.elems.size()) return false;
      for (size_t i = 0; i < a.elems.size(); ++i)
        if (!compat(a.elems[i], b.elems[i])) return false;
      return true;
    }
    case TypeKind::List: return compat(*a.elem, *b.elem);
  }
  return false;
}

std::optional<Value> coerce_value(const Value& v, const ValType& t) {
  if (std::holds_alternative<long>(v.v)) {
    long n = v.as_nat();
    switch (t.kind) {
      case TypeKind::Bool:
        if (n == 0) return Value::of_bool(false);
        if (n == 1) return Value::of_bool(true);
        return std::nullopt;
      case TypeKind::ZMod:
        if (n >= 0 && n < t.modulus) return Value::of_z(t.modulus, n);
        return std::nullopt;
      case TypeKind::Nat:
        if (n >= 0 && n <= t.bound) return v;
        return std::nullopt;
      default: return std::nullopt;
    }
  }
  if (std::holds_alternative<bool>(v.v) && t.kind == TypeKind::Bool) return v;
  if (std::holds_alternative<Bits>(v.v) && t.kind == TypeKind::BitStr &&
      (t.width < 0 || v.as_bits().width == t.width))
    return v;
  if (std::holds_alternative<ZVal>(v.v) && t.kind == TypeKind::ZMod && v.as_z().q == t.modulus)
    return v;
  if (v.is_tuple() && t.kind == TypeKind::Tuple && v.as_tuple().elems.size() == t.elems.size()) {
    std::vector<Value> out;
    for (size_t i = 0; i < t.elems.size(); ++i) {
      auto c = coerce_value(v.as_tuple().elems[i], t.elems[i]);
      if (!c) return std::nullopt;
      out.push_back(*c);
    }
    return Value::of_tuple(std::move(out));
  }
  if (v.is_list() && t.kind == TypeKind::List) {
    std::vector<Value> out;
    for (const auto& e : v.as_list().elems) {
      auto c = coerce_value(e, *t.elem);
      if (!c) return std::nullopt;
      out.push_back(*c);
    }
    return Value::of_list(std::move(out));
  }
  return std::nullopt;
}

ValType type_of_value(const Value& v) {
  switch (v.v.index()) {
    case 0: return ValType::boolean();
    case 1: return ValType::bitstr(v.as_bits().width);
    case 2: return ValType::zmod(v.as_z().q);
    case 3: return ValType::nat(std::max(1L, v.as_nat()));
    case 4: {
      std::vector<ValType> ts;
      for (const auto& e : v.as_tuple().elems) ts.push_back(type_of_value(e));
      return ValType::tuple(std::move(ts));
    }
    default: terr("cannot type list literal without context");
  }
}

bool shape_eq(const DeclShapeP& a, const DeclShapeP& b) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case DimKind::Leaf: return a->leaf == b->leaf;
    case DimKind::Array: return a->count == b->count && shape_eq(a->inner, b->inner);
    case DimKind::Addr: return a->addr_len == b->addr_len && shape_eq(a->inner, b->inner);
    case DimKind::Tuple: {
      if (a->elems.size() != b->elems.size()) return false;
      for (size_t i = 0; i < a->elems.size(); ++i)
        if (!shape_eq(a->elems[i], b->elems[i])) return false;
      return true;
    }
  }
  return false;
}

std::optional<Value> const_eval(const ExprP& e);

// component descriptors of a storage path: literal text or symbolic print
std::vector<std::pair<std::string, bool>> loc_comps(const Expr& e) {
  std::vector<std::pair<std::string, bool>> out;
  if (e.vid) {
    for (const auto& c : e.vid->idx) out.emplace_back(c, true);
    return out;
  }
  for (const auto& c : e.comps) {
    auto v = const_eval(c.index);
    if (v && std::holds_alternative<long>(v->v)) {
      out.emplace_back(std::to_string(v->as_nat()), true);
    } else if (c.index->kind == EKind::Loc && !c.index->base.empty() && c.index->base[0] == '@') {
      out.emplace_back(c.index->base, true);
    } else {
      out.emplace_back(print_expr(c.index), false);
    }
  }
  return out;
}

// may two storage paths refer to the same cell?
bool may_alias(const Expr& a, const Expr& b) {
  if (a.base != b.base) return false;
  auto ca = loc_comps(a);
  auto cb = loc_comps(b);
  size_t n = std::min(ca.size(), cb.size());
  for (size_t i = 0; i < n; ++i) {
    if (ca[i].second && cb[i].second && ca[i].first != cb[i].first) return false;
    if (!ca[i].second && !cb[i].second && ca[i].first != cb[i].first) return true;
  }
  return true;
}

void collect_locs(const ExprP& e, std::vector<ExprP>& out) {
  if (e->kind == EKind::Loc) {
    out.push_back(e);
    for (const auto& c : e->comps) collect_locs(c.index, out);
    return;
  }
  for (const auto& a : e->args) collect_locs(a, out);
}

std::optional<Value> const_eval(const ExprP& e) {
  if (e->kind == EKind::Lit) return e->lit;
  if (e->kind == EKind::Binary) {
    auto a = const_eval(e->args[0]);
    auto b = const_eval(e->args[1]);
    if (!a || !b) return std::nullopt;
    if (std::holds_alternative<long>(a->v) && std::holds_alternative<long>(b->v)) {
      long x = a->as_nat(), y = b->as_nat();
      switch (e->op) {
        case BOp::Add: return Value::of_nat(x + y);
        case BOp::Sub: return x >= y ? std::optional<Value>(Value::of_nat(x - y)) : std::nullopt;
        case BOp::Mul: return Value::of_nat(x * y);
        default: return std::nullopt;
      }
    }
  }
  return std::nullopt;
}

struct Typer {
  const TypeEnv& env;

  const Program& prog() const { return *env.prog; }

  ExprP type(const ExprP& e, std::optional<ValType> expect) {
    ExprP out = type1(e, expect);
    if (expect && out->type && !compat(*out->type, *expect))
      terr("expected " + expect->str() + " but found " + out->type->str() + " in " +
               print_expr(e),
           e->loc);
    return out;
  }

  ExprP retype_lit(const ExprP& e, const ValType& t) {
    auto c = coerce_value(e->lit, t);
    if (!c) terr("literal " + e->lit.str() + " does not fit type " + t.str(), e->loc);
    auto ne = std::make_shared<Expr>(*e);
    ne->lit = *c;
    ne->type = type_of_value(*c);
    if (t.kind == TypeKind::List) ne->type = t;
    return ne;
  }

  ExprP type1(const ExprP& e, std::optional<ValType> expect) {
    switch (e->kind) {
      case EKind::Lit: {
        if (e->lit.is_list() && e->lit.as_list().elems.empty()) {
          if (!expect || expect->kind != TypeKind::List)
            terr("cannot infer element type of []", e->loc);
          auto ne = std::make_shared<Expr>(*e);
          ne->type = *expect;
          return ne;
        }
        if (expect) return retype_lit(e, *expect);
        auto ne = std::make_shared<Expr>(*e);
        ne->type = type_of_value(e->lit);
        return ne;
      }
      case EKind::Loc: return type_loc(e, expect);
      case EKind::Unary: {
        ExprP a = type(e->args[0], ValType::boolean());
        auto ne = std::make_shared<Expr>(*e);
        ne->args = {a};
        ne->type = ValType::boolean();
        return ne;
      }
      case EKind::Binary: return type_bin(e, expect);
      case EKind::TupleMk: {
        std::vector<ExprP> args;
        std::vector<ValType> ts;
        for (size_t i = 0; i < e->args.size(); ++i) {
          std::optional<ValType> ex;
          if (expect && expect->kind == TypeKind::Tuple && expect->elems.size() == e->args.size())
            ex = expect->elems[i];
          args.push_back(type(e->args[i], ex));
          ts.push_back(*args.back()->type);
        }
        auto ne = std::make_shared<Expr>(*e);
        ne->args = std::move(args);
        ne->type = ValType::tuple(std::move(ts));
        return ne;
      }
      case EKind::ValueProj: {
        ExprP a = type(e->args[0], {});
        if (a->type->kind != TypeKind::Tuple) terr("projection from non-tuple", e->loc);
        if (e->proj < 1 || static_cast<size_t>(e->proj) > a->type->elems.size())
          terr("projection index out of range", e->loc);
        auto ne = std::make_shared<Expr>(*e);
        ne->args = {a};
        ne->type = a->type->elems[static_cast<size_t>(e->proj - 1)];
        return ne;
      }
      case EKind::BitIndex: {
        ExprP a = type(e->args[0], {});
        ExprP i = type(e->args[1], {});
        if (a->type->kind != TypeKind::BitStr) terr("bit index into non-bitstring", e->loc);
        if (i->type->kind != TypeKind::Nat) terr("bit index must be nat", e->loc);
        auto iv = const_eval(i);
        if (iv && a->type->width >= 0 &&
            (iv->as_nat() < 1 || iv->as_nat() > a->type->width))
          terr("bit index out of range", e->loc);
        auto ne = std::make_shared<Expr>(*e);
        ne->args = {a, i};
        ne->type = ValType::boolean();
        return ne;
      }
      case EKind::Slice: {
        ExprP a = type(e->args[0], {});
        ExprP j = type(e->args[1], {});
        if (a->type->kind != TypeKind::BitStr) terr("slice of non-bitstring", e->loc);
        if (j->type->kind != TypeKind::Nat) terr("slice length must be nat", e->loc);
        auto jv = const_eval(j);
        auto ne = std::make_shared<Expr>(*e);
        ne->args = {a, j};
        ne->type = ValType::bitstr(jv ? static_cast<int>(jv->as_nat()) : -1);
        return ne;
      }
      case EKind::Lcp: {
        ExprP a = type(e->args[0], {});
        ExprP b = type(e->args[1], {});
        if (a->type->kind != TypeKind::BitStr || b->type->kind != TypeKind::BitStr)
          terr("lcp expects bitstrings", e->loc);
        auto ne = std::make_shared<Expr>(*e);
        ne->args = {a, b};
        ne->type = ValType::bitstr(-1);
        return ne;
      }
      case EKind::Head: {
        ExprP a = type(e->args[0], {});
        if (a->type->kind != TypeKind::List) terr("head of non-list", e->loc);
        auto ne = std::make_shared<Expr>(*e);
        ne->args = {a};
        ne->type = *a->type->elem;
        return ne;
      }
      case EKind::SplitReg: {
        ExprP lst = type(e->args[0], {});
        if (lst->type->kind != TypeKind::List || lst->type->elem->kind != TypeKind::Tuple ||
            lst->type->elem->elems.empty())
          terr("split_reg expects a list of tuples", e->loc);
        ExprP reg = type(e->args[1], lst->type->elem->elems[0]);
        auto ne = std::make_shared<Expr>(*e);
        ne->args = {lst, reg};
        ne->type = ValType::tuple({*lst->type, *lst->type});
        return ne;
      }
      case EKind::SplitPath: {
        ExprP lst = type(e->args[0], {});
        if (lst->type->kind != TypeKind::List || lst->type->elem->kind != TypeKind::Tuple ||
            lst->type->elem->elems.size() < 3)
          terr("split_path expects a list of triples", e->loc);
        ExprP leaf = type(e->args[1], {});
        ExprP depth = type(e->args[2], {});
        if (leaf->type->kind != TypeKind::BitStr) terr("split_path leaf must be a bitstring", e->loc);
        if (depth->type->kind != TypeKind::Nat) terr("split_path depth must be nat", e->loc);
        auto ne = std::make_shared<Expr>(*e);
        ne->args = {lst, leaf, depth};
        ne->type = ValType::tuple({*lst->type, *lst->type});
        return ne;
      }
    }
    terr("unhandled expression", e->loc);
  }

  ExprP type_bin(const ExprP& e, std::optional<ValType> expect) {
    BOp op = e->op;
    auto lit_rooted = [](const ExprP& x) { return x->kind == EKind::Lit; };
    ExprP a, b;
    // one-sided literal inference
    if (lit_rooted(e->args[0]) && !lit_rooted(e->args[1])) {
      b = type(e->args[1], {});
      a = type(e->args[0], unify_expect(op, *b->type, expect));
    } else if (lit_rooted(e->args[1]) && !lit_rooted(e->args[0])) {
      a = type(e->args[0], {});
      b = type(e->args[1], unify_expect(op, *a->type, expect));
    } else {
      a = type(e->args[0], {});
      b = type(e->args[1], {});
    }
    const ValType& ta = *a->type;
    const ValType& tb = *b->type;
    ValType rt = ValType::boolean();
    switch (op) {
      case BOp::Xor:
        if (ta.kind == TypeKind::Bool && tb.kind == TypeKind::Bool) {
          rt = ValType::boolean();
        } else if (ta.kind == TypeKind::BitStr && tb.kind == TypeKind::BitStr &&
                   compat(ta, tb)) {
          rt = ta.width >= 0 ? ta : tb;
        } else {
          terr("xor expects matching booleans or bitstrings, got " + ta.str() + " / " + tb.str(),
               e->loc);
        }
        break;
      case BOp::Add:
      case BOp::Sub:
      case BOp::Mul:
        if (ta.kind == TypeKind::ZMod && compat(ta, tb)) {
          rt = ta;
        } else if (ta.kind == TypeKind::Nat && tb.kind == TypeKind::Nat) {
          rt = ValType::nat(ta.bound + tb.bound + 1);
        } else {
          terr("arithmetic expects matching zmod or nat operands", e->loc);
        }
        break;
      case BOp::And:
      case BOp::Or:
        if (ta.kind != TypeKind::Bool || tb.kind != TypeKind::Bool)
          terr("boolean connective expects bool operands", e->loc);
        rt = ValType::boolean();
        break;
      case BOp::Eq:
      case BOp::Ne:
        if (!compat(ta, tb)) terr("comparison of incompatible types", e->loc);
        rt = ValType::boolean();
        break;
      case BOp::Le:
      case BOp::Lt:
        if (ta.kind != TypeKind::Nat || tb.kind != TypeKind::Nat)
          terr("ordering is defined on nat", e->loc);
        rt = ValType::boolean();
        break;
      case BOp::Concat:
        if (ta.kind != TypeKind::List || !compat(ta, tb)) terr("++ expects matching lists", e->loc);
        rt = ta;
        break;
      case BOp::Cons:
        if (tb.kind != TypeKind::List || !compat(*tb.elem, ta)) terr(":: expects x :: list<x>", e->loc);
        rt = tb;
        break;
    }
    auto ne = std::make_shared<Expr>(*e);
    ne->args = {a, b};
    ne->type = rt;
    return ne;
  }

  static std::optional<ValType> unify_expect(BOp op, const ValType& other,
                                             const std::optional<ValType>& expect) {
    switch (op) {
      case BOp::Xor:
      case BOp::Add:
      case BOp::Sub:
      case BOp::Mul:
      case BOp::Eq:
      case BOp::Ne:
      case BOp::Le:
      case BOp::Lt: return other;
      case BOp::Cons: return other.kind == TypeKind::List ? std::optional<ValType>(*other.elem)
                                                          : std::nullopt;
      case BOp::Concat: return other;
      default: return expect;
    }
  }

  ExprP type_loc(const ExprP& e, std::optional<ValType> expect) {
    (void)expect;
    if (e->vid) {
      // already resolved; re-derive the type
      auto ne = std::make_shared<Expr>(*e);
      ne->type = prog().type_of(*e->vid);
      auto& d = prog().decl(e->vid->name);
      auto v = *e->vid;
      v.kind = d.kind;
      ne->vid = v;
      return ne;
    }
    if (e->comps.empty() && env.is_index(e->base)) {
      auto ne = std::make_shared<Expr>(*e);
      ne->type = ValType::nat(1L << 30);
      return ne;
    }
    if (!prog().is_declared(e->base)) terr("undeclared variable " + e->base, e->loc);
    const Decl& d = prog().decl(e->base);

    DeclShapeP sh = d.shape;
    std::vector<LocComp> comps;
    std::vector<std::string> idx;
    bool all_lit = true;
    size_t ci = 0;
    while (sh->kind != DimKind::Leaf) {
      if (ci >= e->comps.size())
        terr("aggregate " + e->base + " must be fully indexed", e->loc);
      const LocComp& c = e->comps[ci++];
      switch (sh->kind) {
        case DimKind::Array: {
          ExprP ix = type(c.index, ValType::nat(sh->count + 1));
          auto v = const_eval(ix);
          if (v && std::holds_alternative<long>(v->v)) {
            long n = v->as_nat();
            if (n < 1 || n > sh->count) terr("index out of range on " + e->base, e->loc);
            idx.push_back(std::to_string(n));
            ix = mk_lit(Value::of_nat(n), c.index->loc);
            auto tl = std::make_shared<Expr>(*ix);
            tl->type = ValType::nat(sh->count);
            ix = tl;
          } else {
            all_lit = false;
          }
          comps.push_back({c.dot, ix});
          sh = sh->inner;
          break;
        }
        case DimKind::Addr: {
          if (c.index->kind != EKind::Loc || c.index->base.empty() || c.index->base[0] != '@')
            terr("tree-addressed array " + e->base + " requires a concrete @address", e->loc);
          std::string a = c.index->base;
          if (static_cast<int>(a.size()) - 1 > sh->addr_len)
            terr("address too long for " + e->base, e->loc);
          idx.push_back(a);
          comps.push_back(c);
          sh = sh->inner;
          break;
        }
        case DimKind::Tuple: {
          ExprP ix = type(c.index, ValType::nat(static_cast<long>(sh->elems.size()) + 1));
          auto v = const_eval(ix);
          if (v && std::holds_alternative<long>(v->v)) {
            long n = v->as_nat();
            if (n < 1 || n > static_cast<long>(sh->elems.size()))
              terr("field index out of range on " + e->base, e->loc);
            idx.push_back(std::to_string(n));
            sh = sh->elems[static_cast<size_t>(n - 1)];
            comps.push_back({c.dot, mk_lit(Value::of_nat(n), c.index->loc)});
          } else {
            // dynamic field: all components must have identical shape
            for (size_t k = 1; k < sh->elems.size(); ++k)
              if (!shape_eq(sh->elems[0], sh->elems[k]))
                terr("dynamic field index into a heterogeneous tuple " + e->base, e->loc);
            all_lit = false;
            comps.push_back({c.dot, ix});
            sh = sh->elems[0];
          }
          break;
        }
        default: break;
      }
    }
    // leftover components: bit indexing into a bitstring leaf
    ExprP out;
    {
      auto ne = std::make_shared<Expr>();
      ne->kind = EKind::Loc;
      ne->loc = e->loc;
      ne->base = e->base;
      ne->type = sh->leaf;
      if (all_lit) {
        VarId v;
        v.name = e->base;
        v.idx = idx;
        v.kind = d.kind;
        ne->vid = v;
      } else {
        ne->comps = comps;
      }
      out = ne;
    }
    for (; ci < e->comps.size(); ++ci) {
      const LocComp& c = e->comps[ci];
      if (out->type->kind == TypeKind::BitStr && !c.dot) {
        ExprP raw = mk_node(EKind::BitIndex, {out, c.index}, e->loc);
        out = type1(raw, {});
      } else if (out->type->kind == TypeKind::Tuple && c.dot) {
        auto v = const_eval(c.index);
        if (!v) terr("dynamic projection from tuple value", e->loc);
        ExprP raw = mk_proj(out, static_cast<int>(v->as_nat()), e->loc);
        out = type1(raw, {});
      } else {
        terr("cannot index a " + out->type->str(), e->loc);
      }
    }
    return out;
  }
};

}  // namespace

ExprP type_expr(const ExprP& e, const TypeEnv& env, std::optional<ValType> expect) {
  Typer t{env};
  return t.type(e, expect);
}

bool is_literal_expr(const ExprP& e) { return e->kind == EKind::Lit; }

std::optional<long> literal_nat(const ExprP& e) {
  auto v = const_eval(e);
  if (v && std::holds_alternative<long>(v->v)) return v->as_nat();
  return std::nullopt;
}

static void fv_rec(const ExprP& e, const Program& prog, ExprFV& out) {
  switch (e->kind) {
    case EKind::Loc: {
      if (e->vid) {
        if (prog.kind_of(*e->vid) == VarKind::Det)
          out.det.insert(*e->vid);
        else
          out.rand.insert(*e->vid);
        return;
      }
      if (e->comps.empty()) return;  // template index variable
      for (const auto& v : prog.cells_of(e->base)) {
        if (prog.kind_of(v) == VarKind::Det)
          out.det.insert(v);
        else
          out.rand.insert(v);
      }
      for (const auto& c : e->comps) fv_rec(c.index, prog, out);
      return;
    }
    case EKind::Lit: return;
    default:
      for (const auto& a : e->args) fv_rec(a, prog, out);
  }
}

ExprFV fv_expr(const ExprP& e, const Program& prog) {
  ExprFV out;
  fv_rec(e, prog, out);
  return out;
}

ExprP subst_expr(const ExprP& e, const std::string& x, const ExprP& v) {
  switch (e->kind) {
    case EKind::Lit: return e;
    case EKind::Loc: {
      if (e->comps.empty() && !e->vid && e->base == x) return v;
      if (e->vid && e->vid->name == x && e->vid->idx.empty()) return v;
      if (e->comps.empty()) return e;
      auto ne = std::make_shared<Expr>(*e);
      for (auto& c : ne->comps) c.index = subst_expr(c.index, x, v);
      return ne;
    }
    default: {
      auto ne = std::make_shared<Expr>(*e);
      for (auto& a : ne->args) a = subst_expr(a, x, v);
      return ne;
    }
  }
}

// ---------------------------------------------------------------------------
// command-level checking

namespace {

struct Checker {
  Program& prog;
  std::vector<std::string> errors;
  TypeEnv env;
  // one self-assignment temporary per (variable, type)
  std::map<std::string, std::string> self_pool;

  explicit Checker(Program& p) : prog(p) { env.prog = &p; }

  void err(const std::string& m, SrcLoc loc) {
    errors.push_back(loc.line ? m + " at " + loc.str() : m);
  }

  ExprP type_or_err(const ExprP& e, std::optional<ValType> expect) {
    try {
      return type_expr(e, env, expect);
    } catch (const Error& ex) {
      errors.push_back(ex.what());
      return nullptr;
    }
  }

  bool is_det_expr(const ExprP& e) { return !fv_expr(e, prog).has_rand(); }

  VarKind target_kind(const ExprP& t) {
    if (t->vid) return prog.kind_of(*t->vid);
    return prog.decl(t->base).kind;
  }

  // cells possibly written by a target
  VarSet target_cells(const ExprP& t) {
    VarSet s;
    if (t->vid) {
      s.insert(*t->vid);
    } else {
      for (const auto& v : prog.cells_of(t->base)) s.insert(v);
    }
    return s;
  }

  CmdP check(const CmdP& c, bool under_rand) {
    switch (c->kind) {
      case CKind::Skip: return c;
      case CKind::Assign: {
        ExprP tgt = type_or_err(c->target, {});
        if (!tgt) return c;
        if (tgt->kind != EKind::Loc) {
          err("assignment target must be a storage location", c->loc);
          return c;
        }
        VarKind k = target_kind(tgt);
        ExprP rhs = type_or_err(c->expr, tgt->type);
        if (!rhs) return c;
        if (k == VarKind::Det) {
          if (under_rand) {
            err("deterministic write under randomized guard: " + print_expr(c->target), c->loc);
          }
          if (!is_det_expr(rhs))
            err("deterministic variable assigned from randomized expression", c->loc);
        }
        auto nc = std::make_shared<Command>(*c);
        nc->target = tgt;
        nc->expr = rhs;
        nc->det_assign = (k == VarKind::Det);
        // randomized self-assignment goes through a fresh temporary
        if (k == VarKind::Rand) {
          std::vector<ExprP> locs;
          collect_locs(rhs, locs);
          bool self = false;
          for (const auto& l : locs)
            if (may_alias(*tgt, *l)) self = true;
          if (self) {
            std::string pool_key = tgt->base + ":" + tgt->type->str();
            std::string tmp;
            auto pooled = self_pool.find(pool_key);
            if (pooled != self_pool.end()) {
              tmp = pooled->second;
            } else {
              tmp = prog.fresh_name(tgt->base);
              Decl d;
              d.kind = VarKind::Rand;
              auto sh = std::make_shared<DeclShape>();
              sh->kind = DimKind::Leaf;
              sh->leaf = *tgt->type;
              d.shape = sh;
              prog.add_decl(tmp, d);
              self_pool.emplace(pool_key, tmp);
            }
            VarId tv;
            tv.name = tmp;
            tv.kind = VarKind::Rand;
            ExprP tloc = type_or_err(mk_var(tv, c->loc), {});
            CmdP first = mk_assign(tloc, rhs, c->loc);
            {
              auto f = std::make_shared<Command>(*first);
              f->det_assign = false;
              first = f;
            }
            CmdP second = mk_assign(tgt, tloc, c->loc);
            {
              auto s2 = std::make_shared<Command>(*second);
              s2->det_assign = false;
              second = s2;
            }
            return mk_seq(first, second);
          }
        }
        return nc;
      }
      case CKind::Sample: {
        ExprP tgt = type_or_err(c->target, {});
        if (!tgt) return c;
        if (target_kind(tgt) != VarKind::Rand) {
          err("sampling target must be randomized: " + print_expr(c->target), c->loc);
          return c;
        }
        SampleSet ss = c->sset;
        for (auto& v : ss.values) {
          auto cv = coerce_value(v, *tgt->type);
          if (!cv) {
            err("sample set value " + v.str() + " does not fit " + tgt->type->str(), c->loc);
            return c;
          }
          v = *cv;
        }
        std::sort(ss.values.begin(), ss.values.end());
        ss.values.erase(std::unique(ss.values.begin(), ss.values.end()), ss.values.end());
        auto nc = std::make_shared<Command>(*c);
        nc->target = tgt;
        nc->sset = ss;
        return nc;
      }
      case CKind::Seq: {
        CmdP a = check(c->c1, under_rand);
        CmdP b = check(c->c2, under_rand);
        auto nc = std::make_shared<Command>(*c);
        nc->c1 = a;
        nc->c2 = b;
        return nc;
      }
      case CKind::Cond: {
        ExprP g = type_or_err(c->expr, ValType::boolean());
        if (!g) return c;
        bool rand_guard = !is_det_expr(g);
        CmdP t = check(c->c1, under_rand || rand_guard);
        CmdP f = check(c->c2, under_rand || rand_guard);
        auto nc = std::make_shared<Command>(*c);
        nc->expr = g;
        nc->c1 = t;
        nc->c2 = f;
        nc->flavor = rand_guard ? CondFlavor::Rand : CondFlavor::Det;
        return nc;
      }
      case CKind::While: {
        ExprP g = type_or_err(c->expr, ValType::boolean());
        if (!g) return c;
        if (!is_det_expr(g)) err("loop guard must be deterministic", c->loc);
        CmdP b = check(c->c1, under_rand);
        auto nc = std::make_shared<Command>(*c);
        nc->expr = g;
        nc->c1 = b;
        return nc;
      }
      case CKind::DFor: {
        if (!prog.is_declared(c->ivar)) {
          err("loop variable " + c->ivar + " must be declared", c->loc);
          return c;
        }
        const Decl& d = prog.decl(c->ivar);
        if (d.kind != VarKind::Det || d.shape->kind != DimKind::Leaf ||
            d.shape->leaf.kind != TypeKind::Nat)
          err("loop variable must be a deterministic nat", c->loc);
        if (under_rand) err("for-loop under randomized guard assigns its index", c->loc);
        ExprP lo = type_or_err(c->lo, ValType::nat(1L << 30));
        ExprP hi = type_or_err(c->hi, ValType::nat(1L << 30));
        if (!lo || !hi) return c;
        if (!is_det_expr(lo) || !is_det_expr(hi)) err("loop bounds must be deterministic", c->loc);
        CmdP b = check(c->c1, under_rand);
        auto nc = std::make_shared<Command>(*c);
        nc->lo = lo;
        nc->hi = hi;
        nc->c1 = b;
        return nc;
      }
      case CKind::TupleAssign: {
        ExprP rhs = type_or_err(c->expr, {});
        if (!rhs) return c;
        if (rhs->type->kind != TypeKind::Tuple ||
            rhs->type->elems.size() != c->targets.size()) {
          err("simultaneous assignment arity mismatch", c->loc);
          return c;
        }
        std::vector<ExprP> tgts;
        bool rhs_rand = !is_det_expr(rhs);
        for (size_t i = 0; i < c->targets.size(); ++i) {
          ExprP t = type_or_err(c->targets[i], rhs->type->elems[i]);
          if (!t) return c;
          if (target_kind(t) == VarKind::Det) {
            if (under_rand) err("deterministic write under randomized guard", c->loc);
            if (rhs_rand) err("deterministic variable assigned from randomized expression", c->loc);
          }
          tgts.push_back(t);
        }
        auto nc = std::make_shared<Command>(*c);
        nc->targets = tgts;
        nc->expr = rhs;
        return nc;
      }
      case CKind::MultiSample: {
        std::vector<ExprP> tgts;
        for (const auto& t0 : c->targets) {
          ExprP t = type_or_err(t0, {});
          if (!t) return c;
          if (target_kind(t) != VarKind::Rand) err("sampling target must be randomized", c->loc);
          tgts.push_back(t);
        }
        auto nc = std::make_shared<Command>(*c);
        nc->targets = tgts;
        return nc;
      }
    }
    return c;
  }
};

// desugaring (post-typecheck): only core constructs remain
struct Desugarer {
  Program& prog;
  // temporaries are dead between their write/read pairs, so one per
  // (kind, type) is reused across expansion sites
  std::map<std::string, std::string> temp_pool;

  std::string pooled_temp(const std::string& hint, bool rand_kind, const ValType& t, size_t slot) {
    std::string key = (rand_kind ? "r:" : "d:") + t.str() + "#" + std::to_string(slot);
    auto it = temp_pool.find(key);
    if (it != temp_pool.end()) return it->second;
    std::string name = prog.fresh_name(hint);
    Decl d;
    d.kind = rand_kind ? VarKind::Rand : VarKind::Det;
    auto sh = std::make_shared<DeclShape>();
    sh->kind = DimKind::Leaf;
    sh->leaf = t;
    d.shape = sh;
    prog.add_decl(name, d);
    temp_pool.emplace(key, name);
    return name;
  }

  CmdP go(const CmdP& c) {
    switch (c->kind) {
      case CKind::Skip:
      case CKind::Assign:
      case CKind::Sample: return c;
      case CKind::Seq: {
        auto nc = std::make_shared<Command>(*c);
        nc->c1 = go(c->c1);
        nc->c2 = go(c->c2);
        return nc;
      }
      case CKind::Cond: {
        auto nc = std::make_shared<Command>(*c);
        nc->c1 = go(c->c1);
        nc->c2 = go(c->c2);
        return nc;
      }
      case CKind::While: {
        auto nc = std::make_shared<Command>(*c);
        nc->c1 = go(c->c1);
        return nc;
      }
      case CKind::DFor: {
        // for i = lo to hi do c  =>  i := lo; while i <= hi do (c; i := i + 1)
        VarId iv;
        iv.name = c->ivar;
        iv.kind = VarKind::Det;
        ExprP ivar = mk_var(iv, c->loc);
        CmdP body = go(c->c1);
        CmdP init = mk_assign(ivar, c->lo, c->loc);
        {
          auto m = std::make_shared<Command>(*init);
          m->det_assign = true;
          init = m;
        }
        CmdP inc = mk_assign(ivar, mk_bin(BOp::Add, ivar, mk_lit(Value::of_nat(1), c->loc), c->loc),
                             c->loc);
        {
          auto m = std::make_shared<Command>(*inc);
          m->det_assign = true;
          inc = m;
        }
        ExprP guard = mk_bin(BOp::Le, ivar, c->hi, c->loc);
        return mk_seq(init, mk_while(guard, mk_seq(body, inc), c->loc));
      }
      case CKind::TupleAssign: {
        // (l1,...,lk) := e  =>  t1 := e.1; ...; tk := e.k; l1 := t1; ...
        bool rhs_rand = false;
        {
          ExprFV fv = fv_expr(c->expr, prog);
          rhs_rand = fv.has_rand();
        }
        std::vector<CmdP> cmds;
        std::vector<ExprP> tmps;
        for (size_t i = 0; i < c->targets.size(); ++i) {
          const ValType& ct = c->expr->type->elems[i];
          bool tmp_rand = rhs_rand || prog.decl(c->targets[i]->base).kind == VarKind::Rand;
          std::string tn = pooled_temp(c->targets[i]->base + "t", tmp_rand, ct, i);
          VarId tv;
          tv.name = tn;
          tv.kind = tmp_rand ? VarKind::Rand : VarKind::Det;
          ExprP tloc = mk_var(tv, c->loc);
          {
            auto m = std::make_shared<Expr>(*tloc);
            m->type = ct;
            tloc = m;
          }
          tmps.push_back(tloc);
          ExprP proj = mk_proj(c->expr, static_cast<int>(i + 1), c->loc);
          {
            auto m = std::make_shared<Expr>(*proj);
            m->type = ct;
            proj = m;
          }
          CmdP as = mk_assign(tloc, proj, c->loc);
          {
            auto m = std::make_shared<Command>(*as);
            m->det_assign = !tmp_rand;
            as = m;
          }
          cmds.push_back(as);
        }
        for (size_t i = 0; i < c->targets.size(); ++i) {
          CmdP as = mk_assign(c->targets[i], tmps[i], c->loc);
          auto m = std::make_shared<Command>(*as);
          m->det_assign = prog.decl(c->targets[i]->base).kind == VarKind::Det;
          cmds.push_back(m);
        }
        CmdP out = cmds.back();
        for (size_t k = cmds.size() - 1; k-- > 0;) out = mk_seq(cmds[k], out);
        return out;
      }
      case CKind::MultiSample: {
        std::vector<CmdP> cmds;
        for (const auto& t : c->targets) cmds.push_back(mk_sample(t, c->sset, c->loc));
        CmdP out = cmds.back();
        for (size_t k = cmds.size() - 1; k-- > 0;) out = mk_seq(cmds[k], out);
        return out;
      }
    }
    return c;
  }
};

// canonical right-nested sequencing (the printer flattens chains visually, so
// reparsing yields right nesting; keep ASTs in that form)
CmdP renest_seq(const CmdP& c) {
  if (!c) return c;
  switch (c->kind) {
    case CKind::Seq: {
      std::vector<CmdP> items;
      std::function<void(const CmdP&)> flat = [&](const CmdP& x) {
        if (x->kind == CKind::Seq) {
          flat(x->c1);
          flat(x->c2);
        } else {
          items.push_back(renest_seq(x));
        }
      };
      flat(c);
      CmdP out = items.back();
      for (size_t k = items.size() - 1; k-- > 0;) out = mk_seq(items[k], out);
      return out;
    }
    case CKind::Cond: {
      auto nc = std::make_shared<Command>(*c);
      nc->c1 = renest_seq(c->c1);
      nc->c2 = renest_seq(c->c2);
      return nc;
    }
    case CKind::While:
    case CKind::DFor: {
      auto nc = std::make_shared<Command>(*c);
      nc->c1 = renest_seq(c->c1);
      return nc;
    }
    default: return c;
  }
}

}  // namespace

std::vector<std::string> typecheck_wf(Program& p) {
  Checker ck(p);
  p.body = ck.check(p.body, false);
  if (ck.errors.empty()) p.typed = true;
  return ck.errors;
}

void typecheck(Program& p) {
  auto errs = typecheck_wf(p);
  if (!errs.empty()) {
    std::string all;
    for (const auto& e : errs) all += (all.empty() ? "" : "\n") + e;
    throw Error("type", all);
  }
}

void desugar(Program& p) {
  if (!p.typed) typecheck(p);
  Desugarer d{p};
  p.body = renest_seq(d.go(p.body));
  typecheck(p);
}

Program load_program(const std::string& text) {
  Program p = parse_program(text);
  typecheck(p);
  desugar(p);
  return p;
}

CmdP subst_cmd(const CmdP& c, const std::string& x, const ExprP& v) {
  auto nc = std::make_shared<Command>(*c);
  auto se = [&](const ExprP& e) { return e ? subst_expr(e, x, v) : e; };
  nc->target = se(c->target);
  nc->expr = se(c->expr);
  for (auto& t : nc->targets) t = se(t);
  nc->lo = se(c->lo);
  nc->hi = se(c->hi);
  if (c->c1) nc->c1 = subst_cmd(c->c1, x, v);
  if (c->c2) nc->c2 = subst_cmd(c->c2, x, v);
  return nc;
}

CmdP retype_cmd(const CmdP& c, Program& prog) {
  Checker ck(prog);
  CmdP out = ck.check(c, false);
  if (!ck.errors.empty()) {
    std::string all;
    for (const auto& e : ck.errors) all += (all.empty() ? "" : "\n") + e;
    throw Error("type", all);
  }
  return out;
}

}  // namespace psl::lang
