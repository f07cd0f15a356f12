#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "psl/ast.hpp"

namespace psl::bi {

using lang::ExprP;
using lang::Program;
using lang::Value;
using lang::VarId;
using lang::VarSet;

enum class FKind { Top, Bot, AtomDet, Unif, Sim, And, Or, Imp, SepAnd, SepImp, BigAnd, BigSep };

struct Formula;
using FormP = std::shared_ptr<const Formula>;

// Bounded index range with optional exclusions: [lo,hi] or [lo,hi) \ {e,...}
struct IndexRange {
  ExprP lo, hi;
  bool hi_closed = true;
  std::vector<ExprP> excl;
};

struct Formula {
  FKind kind = FKind::Top;
  SrcLoc loc;

  ExprP a, b;  // AtomDet: a; Unif: a; Sim: a, b
  std::vector<Value> uset;  // Unif: explicit set; empty means carrier of a's type
  bool printed_as_d = false;  // Sim(e,e) written D[e]

  FormP l, r;

  // big operators
  std::string ivar;
  IndexRange range;
  FormP body;
};

FormP f_top();
FormP f_bot();
FormP f_atom(ExprP e);
FormP f_unif(ExprP e, std::vector<Value> uset = {});
FormP f_sim(ExprP a, ExprP b);
FormP f_d(ExprP e);  // D[e] = e ~ e
FormP f_bin(FKind k, FormP l, FormP r);
FormP f_big(FKind k, std::string ivar, IndexRange range, FormP body);

std::string print_formula(const FormP& f);

// Environment for formula resolution: program declarations plus bound integer
// index variables (loop indices in rule templates).
struct FormulaEnv {
  const Program* prog = nullptr;
  std::vector<std::string> index_vars;
  bool is_index(const std::string& s) const {
    for (const auto& v : index_vars)
      if (v == s) return true;
    return false;
  }
};

// Typecheck + canonicalize: resolve storage paths with literal indices to
// VarIds, fold literal arithmetic in index positions, fill default uniform
// sets. Throws on ill-typed formulas.
FormP resolve_formula(const FormP& f, const FormulaEnv& env);

// Substitute det expression e for variable x (capture-avoiding through big
// binders); used by DAssn/DFor and template instantiation.
FormP subst_formula(const FormP& f, const std::string& x, const ExprP& e);

// Expand big operators into finite trees; all ranges must be concrete.
// Empty ranges become Top (the unit of both conjunctions).
FormP expand_big(const FormP& f, const FormulaEnv& env);

// Free variables of an expanded formula, split by kind.
struct FV {
  VarSet det, rand;
  VarSet all() const {
    VarSet s = det;
    s.insert(rand.begin(), rand.end());
    return s;
  }
};
FV fv_formula(const FormP& f, const Program& prog);

// Sound under-approximation of the domain forced by the formula:
// every configuration satisfying f has footprint(f) within dom(mu).
VarSet footprint(const FormP& f, const Program& prog);

// Syntactic classifiers (branch post-conditions of conditional rules).
bool sp_class(const FormP& f, const Program& prog);
bool cm_class(const FormP& f, const Program& prog);

// ACU key: equality up to associativity/commutativity of /\ and * with Top
// units. Formulas must be resolved first.
std::string fkey(const FormP& f);
inline bool acu_eq(const FormP& a, const FormP& b) { return fkey(a) == fkey(b); }

// Flatten conjunction multisets (recursively, dropping Top).
std::vector<FormP> flatten_and(const FormP& f);
std::vector<FormP> flatten_sep(const FormP& f);
FormP and_of(std::vector<FormP> fs);
FormP sep_of(std::vector<FormP> fs);

// uniform set of a resolved Unif node (explicit or full carrier)
std::vector<Value> unif_set(const Formula& f, const Program& prog);

}  // namespace psl::bi
