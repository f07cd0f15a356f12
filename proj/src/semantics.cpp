#include "psl/semantics.hpp"

#include "psl/printer.hpp"

namespace psl::sem {

using lang::BOp;
using lang::Bits;
using lang::DeclShapeP;
using lang::DimKind;
using lang::EKind;
using lang::TypeKind;
using lang::ValType;
using lang::VarSet;

namespace {

[[noreturn]] void everr(const std::string& msg, SrcLoc loc = {}) {
  throw Error("eval", msg, loc);
}

int lcp_len(const Bits& a, const Bits& b) {
  int n = std::min(a.width, b.width);
  for (int i = 1; i <= n; ++i) {
    bool ba = (a.bits >> (a.width - i)) & 1;
    bool bb = (b.bits >> (b.width - i)) & 1;
    if (ba != bb) return i - 1;
  }
  return n;
}

struct Evaluator {
  const DetStore& store;
  const RandMemory* mem;  // null for deterministic evaluation
  const Program& prog;

  Value lookup(const VarId& v) const {
    if (prog.kind_of(v) == lang::VarKind::Det) {
      const Value* p = store.find(v);
      if (!p) everr("deterministic variable " + v.str() + " not in store");
      return *p;
    }
    if (!mem) everr("randomized variable " + v.str() + " in deterministic context");
    const Value* p = mem->find(v);
    if (!p) everr("randomized variable " + v.str() + " outside distribution domain");
    return *p;
  }

  VarId resolve_loc(const lang::Expr& e) const {
    if (e.vid) return *e.vid;
    const lang::Decl& d = prog.decl(e.base);
    DeclShapeP sh = d.shape;
    VarId out;
    out.name = e.base;
    out.kind = d.kind;
    size_t ci = 0;
    while (sh->kind != DimKind::Leaf) {
      if (ci >= e.comps.size()) everr("aggregate " + e.base + " not fully indexed", e.loc);
      const auto& c = e.comps[ci++];
      switch (sh->kind) {
        case DimKind::Array: {
          Value iv = eval(c.index);
          long n = iv.as_nat();
          if (n < 1 || n > sh->count) everr("index " + std::to_string(n) + " out of range", e.loc);
          out.idx.push_back(std::to_string(n));
          sh = sh->inner;
          break;
        }
        case DimKind::Tuple: {
          Value iv = eval(c.index);
          long n = iv.as_nat();
          if (n < 1 || n > static_cast<long>(sh->elems.size()))
            everr("field index out of range", e.loc);
          out.idx.push_back(std::to_string(n));
          sh = sh->elems[static_cast<size_t>(n - 1)];
          break;
        }
        case DimKind::Addr: {
          if (c.index->kind != EKind::Loc || c.index->base.empty() || c.index->base[0] != '@')
            everr("tree address must be concrete", e.loc);
          out.idx.push_back(c.index->base);
          sh = sh->inner;
          break;
        }
        default: break;
      }
    }
    if (ci != e.comps.size()) everr("leftover indices on " + e.base, e.loc);
    return out;
  }

  Value eval(const ExprP& e) const {
    switch (e->kind) {
      case EKind::Lit: return e->lit;
      case EKind::Loc: return lookup(resolve_loc(*e));
      case EKind::Unary: return Value::of_bool(!eval(e->args[0]).as_bool());
      case EKind::Binary: return eval_bin(*e);
      case EKind::TupleMk: {
        std::vector<Value> vs;
        for (const auto& a : e->args) vs.push_back(eval(a));
        return Value::of_tuple(std::move(vs));
      }
      case EKind::ValueProj: {
        Value t = eval(e->args[0]);
        const auto& es = t.as_tuple().elems;
        if (e->proj < 1 || static_cast<size_t>(e->proj) > es.size())
          everr("projection out of range", e->loc);
        return es[static_cast<size_t>(e->proj - 1)];
      }
      case EKind::BitIndex: {
        Bits b = eval(e->args[0]).as_bits();
        long i = eval(e->args[1]).as_nat();
        if (i < 1 || i > b.width) everr("bit index out of range", e->loc);
        return Value::of_bool((b.bits >> (b.width - i)) & 1);
      }
      case EKind::Slice: {
        Bits b = eval(e->args[0]).as_bits();
        long j = eval(e->args[1]).as_nat();
        if (j < 0 || j > b.width) everr("slice length out of range", e->loc);
        return Value::of_bits(static_cast<int>(j), j == 0 ? 0 : (b.bits >> (b.width - j)));
      }
      case EKind::Lcp: {
        Bits a = eval(e->args[0]).as_bits();
        Bits b = eval(e->args[1]).as_bits();
        int n = lcp_len(a, b);
        return Value::of_bits(n, n == 0 ? 0 : (a.bits >> (a.width - n)));
      }
      case EKind::Head: {
        Value l = eval(e->args[0]);
        if (l.as_list().elems.empty()) everr("head of empty list", e->loc);
        return l.as_list().elems.front();
      }
      case EKind::SplitReg: {
        Value l = eval(e->args[0]);
        Value reg = eval(e->args[1]);
        std::vector<Value> match, rest;
        for (const auto& t : l.as_list().elems)
          (t.as_tuple().elems[0] == reg ? match : rest).push_back(t);
        return Value::of_tuple({Value::of_list(std::move(match)), Value::of_list(std::move(rest))});
      }
      case EKind::SplitPath: {
        Value l = eval(e->args[0]);
        Bits leaf = eval(e->args[1]).as_bits();
        long depth = eval(e->args[2]).as_nat();
        std::vector<Value> match, rest;
        for (const auto& t : l.as_list().elems) {
          Bits tl = t.as_tuple().elems[2].as_bits();
          (lcp_len(leaf, tl) == depth ? match : rest).push_back(t);
        }
        return Value::of_tuple({Value::of_list(std::move(match)), Value::of_list(std::move(rest))});
      }
    }
    everr("unhandled expression kind");
  }

  Value eval_bin(const lang::Expr& e) const {
    Value a = eval(e.args[0]);
    Value b = eval(e.args[1]);
    switch (e.op) {
      case BOp::Xor:
        if (std::holds_alternative<bool>(a.v)) return Value::of_bool(a.as_bool() != b.as_bool());
        {
          Bits x = a.as_bits(), y = b.as_bits();
          if (x.width != y.width) everr("xor width mismatch", e.loc);
          return Value::of_bits(x.width, x.bits ^ y.bits);
        }
      case BOp::Add:
      case BOp::Sub:
      case BOp::Mul: {
        if (std::holds_alternative<lang::ZVal>(a.v)) {
          long q = a.as_z().q;
          long x = a.as_z().v, y = b.as_z().v;
          long r = e.op == BOp::Add ? x + y : e.op == BOp::Sub ? x - y : x * y;
          return Value::of_z(q, r);
        }
        if (a.is_list() || b.is_list()) everr("arithmetic on lists", e.loc);
        long x = a.as_nat(), y = b.as_nat();
        if (e.op == BOp::Sub && x < y) everr("nat subtraction underflow", e.loc);
        return Value::of_nat(e.op == BOp::Add ? x + y : e.op == BOp::Sub ? x - y : x * y);
      }
      case BOp::And: return Value::of_bool(a.as_bool() && b.as_bool());
      case BOp::Or: return Value::of_bool(a.as_bool() || b.as_bool());
      case BOp::Eq: return Value::of_bool(a == b);
      case BOp::Ne: return Value::of_bool(!(a == b));
      case BOp::Le: return Value::of_bool(a.as_nat() <= b.as_nat());
      case BOp::Lt: return Value::of_bool(a.as_nat() < b.as_nat());
      case BOp::Concat: {
        std::vector<Value> vs = a.as_list().elems;
        for (const auto& v : b.as_list().elems) vs.push_back(v);
        return Value::of_list(std::move(vs));
      }
      case BOp::Cons: {
        std::vector<Value> vs;
        vs.push_back(a);
        for (const auto& v : b.as_list().elems) vs.push_back(v);
        return Value::of_list(std::move(vs));
      }
    }
    everr("unhandled operator");
  }
};

}  // namespace

Value eval_det(const DetStore& store, const ExprP& e, const Program& prog) {
  Evaluator ev{store, nullptr, prog};
  return ev.eval(e);
}

Value eval_rand(const DetStore& store, const RandMemory& m, const ExprP& e, const Program& prog) {
  Evaluator ev{store, &m, prog};
  return ev.eval(e);
}

std::map<Value, Rat> eval_rand_dist(const DetStore& store, const Dist& mu, const ExprP& e,
                                    const Program& prog) {
  std::map<Value, Rat> out;
  for (const auto& [m, p] : mu.weights()) out[eval_rand(store, m, e, prog)] += p;
  return out;
}

VarId resolve_target(const ExprP& loc, const DetStore& store, const Program& prog) {
  Evaluator ev{store, nullptr, prog};
  return ev.resolve_loc(*loc);
}

namespace {

// The executor works on raw weight maps: every clause of the semantics is
// linear in the measure, so a randomized conditional can partition the
// support, run each branch on its unnormalized part, and add the results.
// This is pointwise equal to condition-execute-recombine and performs no
// rational division. Totals are validated at the exec boundary.
using WMap = std::map<RandMemory, Rat>;

struct State {
  DetStore store;
  WMap w;
};

struct Executor {
  const Program& prog;
  long fuel_left;

  State run(const CmdP& c, State st) {
    switch (c->kind) {
      case lang::CKind::Skip: return st;
      case lang::CKind::Assign: {
        VarId v = resolve_target(c->target, st.store, prog);
        if (c->det_assign) {
          Value val = eval_det(st.store, c->expr, prog);
          st.store = st.store.set(v, std::move(val));
          return st;
        }
        WMap w;
        for (const auto& [m, p] : st.w)
          w[m.set(v, eval_rand(st.store, m, c->expr, prog))] += p;
        st.w = std::move(w);
        return st;
      }
      case lang::CKind::Sample: {
        VarId v = resolve_target(c->target, st.store, prog);
        const auto& vals = c->sset.values;
        Rat frac(1, static_cast<long>(vals.size()));
        WMap w;
        for (const auto& [m, q] : st.w) {
          Rat share = q * frac;
          for (const auto& val : vals) w[m.set(v, val)] += share;
        }
        st.w = std::move(w);
        return st;
      }
      case lang::CKind::Seq: return run(c->c2, run(c->c1, std::move(st)));
      case lang::CKind::Cond: {
        if (c->flavor == lang::CondFlavor::Det) {
          bool g = eval_det(st.store, c->expr, prog).as_bool();
          return run(g ? c->c1 : c->c2, std::move(st));
        }
        State t{st.store, {}};
        State f{st.store, {}};
        while (!st.w.empty()) {
          auto node = st.w.extract(st.w.begin());
          bool g = eval_rand(st.store, node.key(), c->expr, prog).as_bool();
          (g ? t : f).w.insert(std::move(node));
        }
        if (f.w.empty()) return run(c->c1, std::move(t));
        if (t.w.empty()) return run(c->c2, std::move(f));
        State t2 = run(c->c1, std::move(t));
        State f2 = run(c->c2, std::move(f));
        if (!(t2.store == f2.store))
          throw Error("semantics", "branches under a randomized guard changed the store", c->loc);
        while (!f2.w.empty()) {
          auto node = f2.w.extract(f2.w.begin());
          auto it = t2.w.find(node.key());
          if (it != t2.w.end())
            it->second += node.mapped();
          else
            t2.w.insert(std::move(node));
        }
        return t2;
      }
      case lang::CKind::While: {
        State cur = std::move(st);
        while (eval_det(cur.store, c->expr, prog).as_bool()) {
          if (--fuel_left < 0) throw Error("fuel", "loop iteration budget exhausted", c->loc);
          cur = run(c->c1, std::move(cur));
        }
        return cur;
      }
      default:
        throw Error("semantics", "command not desugared", c->loc);
    }
  }
};

}  // namespace

Configuration exec(const CmdP& c, const Configuration& cfg, const Program& prog, const Fuel& fuel) {
  Executor ex{prog, fuel.max_iters};
  State st{cfg.store, {}};
  for (const auto& [m, p] : cfg.dist.weights()) st.w.emplace(m, p);
  State out = ex.run(c, std::move(st));
  return Configuration{out.store, Dist::make(cfg.dist.domain(), std::move(out.w))};
}

DetStore default_store(const Program& prog, const std::map<VarId, Value>& overrides) {
  std::vector<std::pair<VarId, Value>> kv;
  for (const auto& [v, t] : prog.flat) {
    if (prog.kind_of(v) != lang::VarKind::Det) continue;
    auto it = overrides.find(v);
    kv.emplace_back(v, it != overrides.end() ? it->second : lang::default_value(t));
  }
  return DetStore(std::move(kv));
}

RandMemory default_rand_memory(const Program& prog, const std::map<VarId, Value>& overrides) {
  std::vector<std::pair<VarId, Value>> kv;
  for (const auto& [v, t] : prog.flat) {
    if (prog.kind_of(v) != lang::VarKind::Rand) continue;
    auto it = overrides.find(v);
    kv.emplace_back(v, it != overrides.end() ? it->second : lang::default_value(t));
  }
  return RandMemory(std::move(kv));
}

Dist extend_to_full(const Dist& mu, const Program& prog) {
  RandMemory defaults = default_rand_memory(prog);
  VarSet have = mu.domain();
  std::vector<std::pair<VarId, Value>> extra;
  for (const auto& [v, val] : defaults.entries())
    if (!have.count(v)) extra.emplace_back(v, val);
  if (extra.empty()) return mu;
  return mu.product(Dist::unit(RandMemory(std::move(extra))));
}

}  // namespace psl::sem
