#pragma once

#include <optional>
#include <string>
#include <vector>

#include "psl/ast.hpp"

namespace psl::lang {

struct TypeEnv {
  const Program* prog = nullptr;
  const std::vector<std::string>* index_vars = nullptr;  // big-op / template indices
  bool is_index(const std::string& s) const {
    if (!index_vars) return false;
    for (const auto& v : *index_vars)
      if (v == s) return true;
    return false;
  }
};

// Type an expression, resolving storage paths (literal indices flatten to
// VarIds), splitting bit-indexing from cell access, folding literal index
// arithmetic, and coercing integer literals against the expected type.
ExprP type_expr(const ExprP& e, const TypeEnv& env, std::optional<ValType> expect = {});

// Free variables, split by kind. Dynamic cell paths contribute every cell of
// the base (sound over-approximation).
struct ExprFV {
  VarSet det, rand;
  bool has_rand() const { return !rand.empty(); }
  VarSet all() const {
    VarSet s = det;
    s.insert(rand.begin(), rand.end());
    return s;
  }
};
ExprFV fv_expr(const ExprP& e, const Program& prog);

// Capture-free substitution of expression `v` for scalar variable `x`.
ExprP subst_expr(const ExprP& e, const std::string& x, const ExprP& v);

// Typecheck and well-formedness: classifies conditionals (det/rand guard),
// verifies the randomized-branch discipline (no deterministic writes under a
// randomized guard, deterministic loop guards), types all expressions, and
// rewrites randomized self-assignments x := e with x in FV(e) through a fresh
// temporary. Collects all errors.
std::vector<std::string> typecheck_wf(Program& p);
// throwing variant
void typecheck(Program& p);

// Expand derived forms: for-loops into while form, multi-samples into sample
// sequences, simultaneous assignments through fresh temporaries. Idempotent;
// output contains only core constructs.
void desugar(Program& p);

// parse + typecheck + desugar + re-typecheck
Program load_program(const std::string& text);

bool is_literal_expr(const ExprP& e);
std::optional<long> literal_nat(const ExprP& e);

// substitute a deterministic expression for a scalar variable through a
// command (used to instantiate loop bodies at concrete indices)
CmdP subst_cmd(const CmdP& c, const std::string& x, const ExprP& v);
// re-resolve and re-type a command (folds indices that became literal);
// throws on any error
CmdP retype_cmd(const CmdP& c, Program& prog);

}  // namespace psl::lang
