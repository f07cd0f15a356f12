#pragma once

#include <memory>

#include "psl/entailment.hpp"

namespace psl::proof {

using bi::FormP;
using entail::EntStep;
using entail::json;
using lang::CmdP;
using lang::Program;
using oracle::Judgment;

struct ProofNode;
using NodeP = std::shared_ptr<ProofNode>;

// One rule application. Formula parameters are resolved at load time against
// the program (plus any enclosing for-loop template indices); premise
// judgments are derived from the conclusion by the rule schema, so nodes only
// carry what the schema cannot determine.
struct ProofNode {
  std::string rule;
  FormP mid;                  // Seqn
  int take = 1;               // Seqn: statements covered by the first premise
  FormP phi, psi, eta;        // rule-dependent slots
  FormP phi2, psi2;           // Conj/Case second components
  lang::ExprP bexpr;          // RCase guard expression
  std::vector<lang::VarId> T; // Frame
  std::vector<EntStep> cert_pre, cert_post, cert;  // Weak / RDCond / Frame
  std::vector<NodeP> premises;
  // DFor
  std::string ivar;
  long lo = 0, hi = 0;
  FormP inv;
  NodeP body_template;
};

struct ProofScript {
  std::shared_ptr<Program> prog;
  Judgment goal;
  NodeP root;
};

struct CheckResult {
  bool ok = true;
  std::string node;     // path like root.premises[1]
  std::string rule;
  std::string message;
  explicit operator bool() const { return ok; }
  std::string str() const {
    return ok ? "ok" : node + " (" + rule + "): " + message;
  }
};

// Script JSON:
//  {"program": "path.psl" | "program_text": "...",
//   "pre": "...", "post": "...", "proof": {node}}
// node: {"rule": R, "mid"/"phi"/"psi"/"eta"/"phi2"/"psi2"/"inv": formula,
//        "T": ["x", ...], "cert_pre"/"cert_post"/"cert": [steps],
//        "ivar": "i", "lo": 1, "hi": 3, "template": node,
//        "premises": [node...]}
ProofScript load_proof_script(const json& j, const std::string& base_dir);
ProofScript load_proof_file(const std::string& path);

CheckResult check_proof(const ProofScript& s);
// check a node against an expected judgment (exposed for elaboration tests)
CheckResult check_node(const NodeP& n, const Judgment& expected, const Program& prog);

// Expand a derived-rule node (RAssnStar, RSampStar, DFor) into primitive
// rules with the same conclusion. DFor elaboration requires a body that does
// not mention the loop index.
NodeP elaborate_derived(const NodeP& n, const Judgment& expected, const Program& prog);

}  // namespace psl::proof
