#pragma once

#include <map>

#include "psl/dist.hpp"
#include "psl/typecheck.hpp"

namespace psl::sem {

using dist::Configuration;
using dist::DetStore;
using dist::Dist;
using dist::RandMemory;
using lang::CmdP;
using lang::ExprP;
using lang::Program;
using lang::Value;
using lang::VarId;

// Loop budget. Exceeding it raises Error("fuel", ...) rather than truncating.
struct Fuel {
  long max_iters = 10000;
};

Value eval_det(const DetStore& store, const ExprP& e, const Program& prog);
Value eval_rand(const DetStore& store, const RandMemory& m, const ExprP& e, const Program& prog);

// pushforward of the memory distribution through a randomized expression
std::map<Value, Rat> eval_rand_dist(const DetStore& store, const Dist& mu, const ExprP& e,
                                    const Program& prog);

// resolve a storage path (possibly with dynamic deterministic indices) to the
// atomic cell it denotes under the given store
VarId resolve_target(const ExprP& loc, const DetStore& store, const Program& prog);

// configuration-transformer semantics; requires a desugared, typed command and
// a distribution carrying the full declared randomized domain
Configuration exec(const CmdP& c, const Configuration& cfg, const Program& prog,
                   const Fuel& fuel = {});

// full-domain initial configuration: every deterministic variable present
// (defaults unless overridden), every randomized variable Dirac at its default
// unless a family distribution over some variables is supplied via `vary`.
DetStore default_store(const Program& prog, const std::map<VarId, Value>& overrides = {});
RandMemory default_rand_memory(const Program& prog, const std::map<VarId, Value>& overrides = {});
// extend a distribution over part of the randomized variables to the full
// declared domain, Dirac-defaulting the rest
Dist extend_to_full(const Dist& mu, const Program& prog);

}  // namespace psl::sem
