#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "psl/oracle.hpp"

namespace psl::entail {

using bi::FormP;
using bi::FormulaEnv;
using lang::ExprP;
using lang::Program;
using nlohmann::json;

// One certificate step: apply `rule` to the subformula at path `at` (0/1
// child indices through /\, \/ and * nodes). Arguments are parsed at load
// time so that rule-template instantiation can substitute into them.
struct EntStep {
  std::string rule;
  std::vector<int> at;
  std::vector<FormP> fargs;
  std::vector<ExprP> eargs;
  std::string sarg;
  std::vector<std::vector<EntStep>> subs;
};

// A chain of implications from goal.lhs to goal.rhs.
struct EntProof {
  FormP lhs, rhs;
  std::vector<EntStep> steps;
};

struct Result {
  bool ok = true;
  std::string message;
  int step = -1;
  explicit operator bool() const { return ok; }
};

// JSON forms:
//   proof: {"lhs": "...", "rhs": "...", "steps": [step...]}
//   step:  {"rule": "U4", "at": [0,1], "f": ["..."], "e": ["..."],
//           "s": "...", "sub": [[step...], [step...]]}
std::vector<EntStep> load_steps(const json& j, const FormulaEnv& env);
EntProof load_entailment(const json& j, const FormulaEnv& env);

// substitute a concrete index for a template variable through all step args
std::vector<EntStep> subst_steps(const std::vector<EntStep>& steps, const std::string& x,
                                 const ExprP& v);

// Verify every step's shape and side conditions and that the chain endpoints
// match the goal (up to ACU of /\ and * with Top units).
Result check_entailment(const EntProof& p, const Program& prog);

// Apply steps to a formula (throws Error on violation); exposed for reuse by
// the proof checker and tests.
FormP apply_steps(FormP cur, const std::vector<EntStep>& steps, const Program& prog);

// E-theory normal form used by S3: commutativity/associativity of xor and
// mod-q sums, xor self-cancellation and unit, constant folding.
std::string e_normal_form(const ExprP& e);

}  // namespace psl::entail
