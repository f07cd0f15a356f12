#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "psl/value.hpp"

namespace psl::lang {

enum class VarKind { Det, Rand };

// Atomic program variable after flattening: array cells and tuple fields with
// concrete indices become index components of the name. Components are decimal
// numerals for array/tuple positions and "@bits" for tree addresses ("@" is
// the root).
struct VarId {
  std::string name;
  std::vector<std::string> idx;
  VarKind kind = VarKind::Det;

  std::string str() const {
    std::string s = name;
    for (const auto& c : idx) s += "[" + c + "]";
    return s;
  }
  // Namespaces are disjoint, so identity ignores kind.
  bool operator==(const VarId& o) const { return name == o.name && idx == o.idx; }
  bool operator<(const VarId& o) const {
    if (name != o.name) return name < o.name;
    return idx < o.idx;
  }
};

using VarSet = std::set<VarId>;

// ---------------------------------------------------------------------------
// Expressions

enum class EKind {
  Loc,       // variable reference / storage path (possibly dynamic indices)
  Lit,
  Unary,     // Not
  Binary,
  TupleMk,
  ValueProj, // projection out of a tuple-valued expression
  BitIndex,  // e[i], 1-based, Bool result
  Slice,     // e[1..j], first j bits
  Lcp,
  Head,
  SplitReg,  // split_reg(list, reg): (matching, rest) by triple.1 = reg
  SplitPath, // split_path(list, leaf, depth): (|lcp(leaf, triple.3)| = depth, rest)
};

enum class BOp { Xor, Add, Sub, Mul, And, Or, Eq, Ne, Le, Lt, Concat, Cons };

struct Expr;
using ExprP = std::shared_ptr<const Expr>;

struct LocComp {
  bool dot = false;  // printed as .k when written that way; brackets otherwise
  ExprP index;
};

struct Expr {
  EKind kind = EKind::Lit;
  SrcLoc loc;

  // Loc
  std::string base;
  std::vector<LocComp> comps;
  std::optional<VarId> vid;  // set by resolution when all comps are literal

  Value lit;                  // Lit
  BOp op = BOp::Xor;          // Binary
  std::vector<ExprP> args;    // operands / tuple elements
  int proj = 0;               // ValueProj index (1-based)

  std::optional<ValType> type;  // filled by typecheck
};

ExprP mk_lit(Value v, SrcLoc loc = {});
ExprP mk_loc(std::string base, std::vector<LocComp> comps = {}, SrcLoc loc = {});
ExprP mk_var(const VarId& v, SrcLoc loc = {});
ExprP mk_un(ExprP a, SrcLoc loc = {});  // Not
ExprP mk_bin(BOp op, ExprP a, ExprP b, SrcLoc loc = {});
ExprP mk_tuple(std::vector<ExprP> es, SrcLoc loc = {});
ExprP mk_proj(ExprP e, int k, SrcLoc loc = {});
ExprP mk_node(EKind k, std::vector<ExprP> es, SrcLoc loc = {});

// ---------------------------------------------------------------------------
// Commands

enum class CKind {
  Skip,
  Assign,       // classified det/rand by typecheck
  Sample,
  Seq,
  Cond,         // classified DCond/RCond by typecheck
  While,
  // sugar
  DFor,
  TupleAssign,  // (l1,...,lk) := e
  MultiSample,  // x1,...,xk <-$ S
};

enum class CondFlavor { Unknown, Det, Rand };

struct SampleSet {
  // either the full carrier of a type, or an explicit value list
  std::optional<ValType> carrier;
  std::vector<Value> values;  // resolved concrete set (sorted, distinct)
  std::string str() const;
  bool operator==(const SampleSet& o) const { return values == o.values; }
};

struct Command;
using CmdP = std::shared_ptr<const Command>;

struct Command {
  CKind kind = CKind::Skip;
  SrcLoc loc;
  ExprP target;               // Assign/Sample lvalue (a Loc expr)
  std::vector<ExprP> targets; // TupleAssign / MultiSample
  ExprP expr;                 // Assign rhs / guards
  SampleSet sset;
  CmdP c1, c2;
  CondFlavor flavor = CondFlavor::Unknown;
  bool det_assign = false;    // Assign classification
  // DFor
  std::string ivar;
  ExprP lo, hi;
};

CmdP mk_skip(SrcLoc loc = {});
CmdP mk_assign(ExprP target, ExprP e, SrcLoc loc = {});
CmdP mk_sample(ExprP target, SampleSet s, SrcLoc loc = {});
CmdP mk_seq(CmdP a, CmdP b);
CmdP mk_cond(ExprP g, CmdP t, CmdP f, SrcLoc loc = {});
CmdP mk_while(ExprP g, CmdP body, SrcLoc loc = {});
CmdP mk_dfor(std::string i, ExprP lo, ExprP hi, CmdP body, SrcLoc loc = {});
CmdP mk_tuple_assign(std::vector<ExprP> targets, ExprP e, SrcLoc loc = {});
CmdP mk_multi_sample(std::vector<ExprP> targets, SampleSet s, SrcLoc loc = {});

// ---------------------------------------------------------------------------
// Declarations and programs

struct DeclShape;
using DeclShapeP = std::shared_ptr<const DeclShape>;

enum class DimKind { Leaf, Array, Addr, Tuple };

struct DeclShape {
  DimKind kind = DimKind::Leaf;
  ValType leaf;                     // Leaf
  long count = 0;                   // Array: cells 1..count
  int addr_len = 0;                 // Addr: bitstrings of length <= addr_len
  std::vector<DeclShapeP> elems;    // Tuple
  DeclShapeP inner;                 // Array/Addr element shape
};

struct Decl {
  VarKind kind = VarKind::Det;
  DeclShapeP shape;
  SrcLoc loc;
};

struct Program {
  std::vector<std::pair<std::string, Decl>> decls;  // declaration order
  std::map<std::string, Decl> by_name;
  std::map<VarId, ValType> flat;  // flattened atomic variables
  CmdP body;
  bool typed = false;

  bool is_declared(const std::string& base) const { return by_name.count(base) != 0; }
  const Decl& decl(const std::string& base) const;
  VarKind kind_of(const VarId& v) const;
  const ValType& type_of(const VarId& v) const;
  // all flattened cells rooted at `base`
  std::vector<VarId> cells_of(const std::string& base) const;
  VarSet all_vars(VarKind k) const;
  void add_decl(const std::string& name, Decl d);
  std::string fresh_name(const std::string& hint) const;
};

// flatten a declaration into atomic cells
void flatten_decl(const std::string& name, const Decl& d, std::map<VarId, ValType>& out);

// address index components for a tree of depth n: "@", "@0", "@1", "@00", ...
std::vector<std::string> addr_components(int n);

}  // namespace psl::lang
