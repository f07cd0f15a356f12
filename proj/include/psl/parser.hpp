#pragma once

#include <string>

#include "psl/ast.hpp"
#include "psl/formula.hpp"

namespace psl::lang {

// Parse a .psl program (declarations + body). No desugaring is performed;
// source locations are attached to AST nodes.
Program parse_program(const std::string& text);

ExprP parse_expr(const std::string& text);
CmdP parse_cmd(const std::string& text);
SampleSet parse_sample_set(const std::string& text);

}  // namespace psl::lang

namespace psl::bi {
FormP parse_formula(const std::string& text);
}
