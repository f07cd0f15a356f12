#include "psl/printer.hpp"

namespace psl::lang {

namespace {

// Precedence, loosest to tightest. Cons/Concat sit with additive ops.
int prec_of(const Expr& e) {
  switch (e.kind) {
    case EKind::Binary:
      switch (e.op) {
        case BOp::Or: return 1;
        case BOp::And: return 2;
        case BOp::Eq:
        case BOp::Ne:
        case BOp::Le:
        case BOp::Lt: return 3;
        case BOp::Xor: return 4;
        case BOp::Add:
        case BOp::Sub:
        case BOp::Concat:
        case BOp::Cons: return 5;
        case BOp::Mul: return 6;
      }
      return 9;
    case EKind::Unary: return 7;
    default: return 10;
  }
}

const char* op_str(BOp op) {
  switch (op) {
    case BOp::Xor: return "^";
    case BOp::Add: return "+";
    case BOp::Sub: return "-";
    case BOp::Mul: return "*";
    case BOp::And: return "&&";
    case BOp::Or: return "||";
    case BOp::Eq: return "=";
    case BOp::Ne: return "!=";
    case BOp::Le: return "<=";
    case BOp::Lt: return "<";
    case BOp::Concat: return "++";
    case BOp::Cons: return "::";
  }
  return "?";
}

std::string pe(const ExprP& e, int parent_prec);

std::string pe_atom(const ExprP& e) { return pe(e, 100); }

std::string pe(const ExprP& e, int parent_prec) {
  std::string s;
  int p = prec_of(*e);
  switch (e->kind) {
    case EKind::Loc: {
      if (e->vid) {
        s = e->vid->str();
      } else {
        s = e->base;
        for (const auto& c : e->comps) s += "[" + pe(c.index, 0) + "]";
      }
      break;
    }
    case EKind::Lit:
      s = e->lit.str();
      break;
    case EKind::Unary:
      s = "!" + pe(e->args[0], p);
      break;
    case EKind::Binary: {
      // left-assoc chains print without inner parens; right operand gets p+1
      s = pe(e->args[0], p) + " " + op_str(e->op) + " " + pe(e->args[1], p + 1);
      break;
    }
    case EKind::TupleMk: {
      s = "(";
      for (size_t i = 0; i < e->args.size(); ++i) {
        if (i) s += ", ";
        s += pe(e->args[i], 0);
      }
      s += ")";
      return s;  // always parenthesized
    }
    case EKind::ValueProj:
      s = pe_atom(e->args[0]) + "." + std::to_string(e->proj);
      break;
    case EKind::BitIndex:
      s = pe_atom(e->args[0]) + "[" + pe(e->args[1], 0) + "]";
      break;
    case EKind::Slice:
      s = pe_atom(e->args[0]) + "[1.." + pe(e->args[1], 0) + "]";
      break;
    case EKind::Lcp:
      s = "lcp(" + pe(e->args[0], 0) + ", " + pe(e->args[1], 0) + ")";
      break;
    case EKind::Head:
      s = "head(" + pe(e->args[0], 0) + ")";
      break;
    case EKind::SplitReg:
      s = "split_reg(" + pe(e->args[0], 0) + ", " + pe(e->args[1], 0) + ")";
      break;
    case EKind::SplitPath:
      s = "split_path(" + pe(e->args[0], 0) + ", " + pe(e->args[1], 0) + ", " + pe(e->args[2], 0) +
          ")";
      break;
  }
  if (p < parent_prec && (e->kind == EKind::Binary || e->kind == EKind::Unary)) s = "(" + s + ")";
  return s;
}

std::string ind(int n) { return std::string(static_cast<size_t>(n) * 2, ' '); }

std::string pc(const CmdP& c, int indent);

std::string block(const CmdP& c, int indent) {
  if (c->kind == CKind::Seq) return "{\n" + pc(c, indent + 1) + "\n" + ind(indent) + "}";
  return "{ " + pc(c, 0) + " }";
}

std::string pc(const CmdP& c, int indent) {
  std::string s = ind(indent);
  switch (c->kind) {
    case CKind::Skip: return s + "skip";
    case CKind::Assign: return s + print_expr(c->target) + " := " + print_expr(c->expr);
    case CKind::Sample: return s + print_expr(c->target) + " <-$ " + c->sset.str();
    case CKind::Seq: return pc(c->c1, indent) + ";\n" + pc(c->c2, indent);
    case CKind::Cond:
      return s + "if " + print_expr(c->expr) + " then " + block(c->c1, indent) +
             (c->c2->kind == CKind::Skip ? std::string()
                                         : " else " + block(c->c2, indent));
    case CKind::While:
      return s + "while " + print_expr(c->expr) + " do " + block(c->c1, indent);
    case CKind::DFor:
      return s + "for " + c->ivar + " = " + print_expr(c->lo) + " to " + print_expr(c->hi) +
             " do " + block(c->c1, indent);
    case CKind::TupleAssign: {
      std::string t = "(";
      for (size_t i = 0; i < c->targets.size(); ++i) {
        if (i) t += ", ";
        t += print_expr(c->targets[i]);
      }
      return s + t + ") := " + print_expr(c->expr);
    }
    case CKind::MultiSample: {
      std::string t;
      for (size_t i = 0; i < c->targets.size(); ++i) {
        if (i) t += ", ";
        t += print_expr(c->targets[i]);
      }
      return s + t + " <-$ " + c->sset.str();
    }
  }
  return s + "?";
}

std::string print_shape(const DeclShapeP& sh) {
  switch (sh->kind) {
    case DimKind::Leaf: return sh->leaf.str();
    case DimKind::Array: return print_shape(sh->inner) + "[" + std::to_string(sh->count) + "]";
    case DimKind::Addr:
      return print_shape(sh->inner) + "[addr(" + std::to_string(sh->addr_len) + ")]";
    case DimKind::Tuple: {
      std::string s = "(";
      for (size_t i = 0; i < sh->elems.size(); ++i) {
        if (i) s += ",";
        s += print_shape(sh->elems[i]);
      }
      return s + ")";
    }
  }
  return "?";
}

}  // namespace

std::string print_expr(const ExprP& e) { return pe(e, 0); }

std::string print_expr_prec(const ExprP& e, int prec) { return pe(e, prec); }

std::string print_cmd(const CmdP& c, int indent) { return pc(c, indent); }

std::string print_program(const Program& p) {
  std::string s;
  for (const auto& [name, d] : p.decls) {
    s += (d.kind == VarKind::Det ? "det " : "rand ");
    s += name + " : " + print_shape(d.shape) + ";\n";
  }
  s += "begin\n" + print_cmd(p.body, 1) + "\nend\n";
  return s;
}

}  // namespace psl::lang
