#pragma once

#include <string>

#include "psl/ast.hpp"

namespace psl::lang {

// Canonical pretty-printer. parse(print(x)) == x structurally, and printed
// strings double as identity keys for expressions and commands.
std::string print_expr(const ExprP& e);
// print with an ambient precedence (operands of formula atoms need parens
// around comparisons)
std::string print_expr_prec(const ExprP& e, int prec);
std::string print_cmd(const CmdP& c, int indent = 0);
std::string print_program(const Program& p);

inline bool expr_eq(const ExprP& a, const ExprP& b) { return print_expr(a) == print_expr(b); }
inline bool cmd_eq(const CmdP& a, const CmdP& b) { return print_cmd(a) == print_cmd(b); }

}  // namespace psl::lang
