#pragma once

#include "psl/typecheck.hpp"

namespace psl::analyses {

using lang::CmdP;
using lang::Program;
using lang::VarKind;
using lang::VarSet;

// May-read-before-write, must-write-before-read, and may-modify sets of a
// desugared command; deterministic and randomized variables are both tracked.
struct VarReport {
  VarSet rv, wv, mv;

  static VarSet filter(const VarSet& s, const Program& p, VarKind k) {
    VarSet out;
    for (const auto& v : s)
      if (p.kind_of(v) == k) out.insert(v);
    return out;
  }
  VarSet rv_rand(const Program& p) const { return filter(rv, p, VarKind::Rand); }
  VarSet wv_rand(const Program& p) const { return filter(wv, p, VarKind::Rand); }
  VarSet mv_rand(const Program& p) const { return filter(mv, p, VarKind::Rand); }
};

VarReport analyze(const CmdP& c, const Program& prog);

}  // namespace psl::analyses
