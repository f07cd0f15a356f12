#include "psl/ast.hpp"

#include <algorithm>

namespace psl::lang {

ExprP mk_lit(Value v, SrcLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = EKind::Lit;
  e->lit = std::move(v);
  e->loc = loc;
  return e;
}

ExprP mk_loc(std::string base, std::vector<LocComp> comps, SrcLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = EKind::Loc;
  e->base = std::move(base);
  e->comps = std::move(comps);
  e->loc = loc;
  return e;
}

ExprP mk_var(const VarId& v, SrcLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = EKind::Loc;
  e->base = v.name;
  e->vid = v;
  e->loc = loc;
  return e;
}

ExprP mk_un(ExprP a, SrcLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = EKind::Unary;
  e->args = {std::move(a)};
  e->loc = loc;
  return e;
}

ExprP mk_bin(BOp op, ExprP a, ExprP b, SrcLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = EKind::Binary;
  e->op = op;
  e->args = {std::move(a), std::move(b)};
  e->loc = loc;
  return e;
}

ExprP mk_tuple(std::vector<ExprP> es, SrcLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = EKind::TupleMk;
  e->args = std::move(es);
  e->loc = loc;
  return e;
}

ExprP mk_proj(ExprP x, int k, SrcLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = EKind::ValueProj;
  e->args = {std::move(x)};
  e->proj = k;
  e->loc = loc;
  return e;
}

ExprP mk_node(EKind k, std::vector<ExprP> es, SrcLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->args = std::move(es);
  e->loc = loc;
  return e;
}

std::string SampleSet::str() const {
  if (carrier) {
    if (carrier->kind == TypeKind::BitStr) return "bitstr(" + std::to_string(carrier->width) + ")";
    if (carrier->kind == TypeKind::ZMod) return "zmod(" + std::to_string(carrier->modulus) + ")";
    if (carrier->kind == TypeKind::Bool) return "bool";
    if (carrier->kind == TypeKind::Nat) return "nat(" + std::to_string(carrier->bound) + ")";
  }
  std::string s = "{";
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) s += ",";
    s += values[i].str();
  }
  return s + "}";
}

CmdP mk_skip(SrcLoc loc) {
  auto c = std::make_shared<Command>();
  c->kind = CKind::Skip;
  c->loc = loc;
  return c;
}

CmdP mk_assign(ExprP target, ExprP e, SrcLoc loc) {
  auto c = std::make_shared<Command>();
  c->kind = CKind::Assign;
  c->target = std::move(target);
  c->expr = std::move(e);
  c->loc = loc;
  return c;
}

CmdP mk_sample(ExprP target, SampleSet s, SrcLoc loc) {
  auto c = std::make_shared<Command>();
  c->kind = CKind::Sample;
  c->target = std::move(target);
  c->sset = std::move(s);
  c->loc = loc;
  return c;
}

CmdP mk_seq(CmdP a, CmdP b) {
  auto c = std::make_shared<Command>();
  c->kind = CKind::Seq;
  c->loc = a->loc;
  c->c1 = std::move(a);
  c->c2 = std::move(b);
  return c;
}

CmdP mk_cond(ExprP g, CmdP t, CmdP f, SrcLoc loc) {
  auto c = std::make_shared<Command>();
  c->kind = CKind::Cond;
  c->expr = std::move(g);
  c->c1 = std::move(t);
  c->c2 = std::move(f);
  c->loc = loc;
  return c;
}

CmdP mk_while(ExprP g, CmdP body, SrcLoc loc) {
  auto c = std::make_shared<Command>();
  c->kind = CKind::While;
  c->expr = std::move(g);
  c->c1 = std::move(body);
  c->loc = loc;
  return c;
}

CmdP mk_dfor(std::string i, ExprP lo, ExprP hi, CmdP body, SrcLoc loc) {
  auto c = std::make_shared<Command>();
  c->kind = CKind::DFor;
  c->ivar = std::move(i);
  c->lo = std::move(lo);
  c->hi = std::move(hi);
  c->c1 = std::move(body);
  c->loc = loc;
  return c;
}

CmdP mk_tuple_assign(std::vector<ExprP> targets, ExprP e, SrcLoc loc) {
  auto c = std::make_shared<Command>();
  c->kind = CKind::TupleAssign;
  c->targets = std::move(targets);
  c->expr = std::move(e);
  c->loc = loc;
  return c;
}

CmdP mk_multi_sample(std::vector<ExprP> targets, SampleSet s, SrcLoc loc) {
  auto c = std::make_shared<Command>();
  c->kind = CKind::MultiSample;
  c->targets = std::move(targets);
  c->sset = std::move(s);
  c->loc = loc;
  return c;
}

const Decl& Program::decl(const std::string& base) const {
  auto it = by_name.find(base);
  if (it == by_name.end()) throw Error("scope", "undeclared variable " + base);
  return it->second;
}

VarKind Program::kind_of(const VarId& v) const { return decl(v.name).kind; }

const ValType& Program::type_of(const VarId& v) const {
  auto it = flat.find(v);
  if (it == flat.end()) throw Error("scope", "unknown variable " + v.str());
  return it->second;
}

std::vector<VarId> Program::cells_of(const std::string& base) const {
  std::vector<VarId> out;
  VarId probe;
  probe.name = base;
  for (auto it = flat.lower_bound(probe); it != flat.end() && it->first.name == base; ++it)
    out.push_back(it->first);
  return out;
}

VarSet Program::all_vars(VarKind k) const {
  VarSet out;
  for (const auto& [v, t] : flat)
    if (kind_of(v) == k) out.insert(v);
  return out;
}

void Program::add_decl(const std::string& name, Decl d) {
  if (by_name.count(name)) throw Error("scope", "duplicate declaration of " + name, d.loc);
  decls.emplace_back(name, d);
  by_name.emplace(name, d);
  flatten_decl(name, d, flat);
}

std::string Program::fresh_name(const std::string& hint) const {
  std::string base = hint + "f";
  if (!by_name.count(base)) return base;
  for (int i = 1;; ++i) {
    std::string s = base + std::to_string(i);
    if (!by_name.count(s)) return s;
  }
}

std::vector<std::string> addr_components(int n) {
  std::vector<std::string> out;
  out.push_back("@");
  std::vector<std::string> level = {""};
  for (int d = 1; d <= n; ++d) {
    std::vector<std::string> next;
    for (const auto& s : level) {
      next.push_back(s + "0");
      next.push_back(s + "1");
    }
    for (const auto& s : next) out.push_back("@" + s);
    level = next;
  }
  return out;
}

static void flatten_shape(const VarId& at, VarKind k, const DeclShapeP& sh,
                          std::map<VarId, ValType>& out) {
  switch (sh->kind) {
    case DimKind::Leaf: {
      VarId v = at;
      v.kind = k;
      out.emplace(v, sh->leaf);
      break;
    }
    case DimKind::Array:
      for (long i = 1; i <= sh->count; ++i) {
        VarId v = at;
        v.idx.push_back(std::to_string(i));
        flatten_shape(v, k, sh->inner, out);
      }
      break;
    case DimKind::Addr:
      for (const auto& a : addr_components(sh->addr_len)) {
        VarId v = at;
        v.idx.push_back(a);
        flatten_shape(v, k, sh->inner, out);
      }
      break;
    case DimKind::Tuple:
      for (size_t i = 0; i < sh->elems.size(); ++i) {
        VarId v = at;
        v.idx.push_back(std::to_string(i + 1));
        flatten_shape(v, k, sh->elems[i], out);
      }
      break;
  }
}

void flatten_decl(const std::string& name, const Decl& d, std::map<VarId, ValType>& out) {
  VarId root;
  root.name = name;
  flatten_shape(root, d.kind, d.shape, out);
}

}  // namespace psl::lang
