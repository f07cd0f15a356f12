#pragma once

#include <functional>
#include <optional>

#include "psl/satisfies.hpp"
#include "psl/semantics.hpp"

namespace psl::oracle {

using bi::FormP;
using dist::Configuration;
using dist::Dist;
using dist::RandMemory;
using lang::Program;
using lang::Value;
using lang::VarId;
using lang::VarSet;

struct Judgment {
  FormP pre;
  lang::CmdP cmd;
  FormP post;
};

// Variables the search ranges over; everything else is default-initialized
// (deterministic defaults, Dirac randomized defaults).
struct Universe {
  const Program* prog = nullptr;
  std::vector<VarId> vary_det;
  std::vector<VarId> vary_rand;
  long config_budget = 2'000'000;
  long memory_budget = 262'144;
};

// Structured distribution family tiers. Enumeration order is deterministic:
// Dirac memories, subset-uniforms by support size then lexicographic support,
// then seeded random rationals.
struct DistFamily {
  bool dirac = true;
  int subset_max = 8;       // uniforms over supports of size 2..subset_max (1.. if dirac off)
  long random_count = 0;    // seeded random rational distributions
  long denom_bound = 8;
  uint64_t seed = 20251207;

  std::string desc() const;
};

// memory space over the vary_rand variables, defaults merged in (full domain)
std::vector<RandMemory> memory_space(const Universe& u);
long family_count(const Universe& u, const DistFamily& fam);

// visit returns false to stop early; returns number of configurations visited
long enumerate_configs(const Universe& u, const DistFamily& fam,
                       const std::function<bool(const Configuration&)>& visit);
// the family distributions alone (full randomized domain)
long enumerate_family(const Universe& u, const DistFamily& fam,
                      const std::function<bool(const Dist&)>& visit);

struct Verdict {
  enum Kind { NoneFound, Counterexample, FuelExhausted } kind = NoneFound;
  std::optional<Configuration> witness;      // input configuration
  std::optional<Configuration> output;       // corresponding output
  long checked = 0;
  std::string family;
  std::string note;
  bool found() const { return kind == Counterexample; }
};

Verdict falsify_judgment(const Judgment& j, const Universe& u, const DistFamily& fam,
                         const sem::Fuel& fuel = {});

// entailment falsification: first configuration satisfying phi but not psi
Verdict falsify_entailment(const FormP& phi, const FormP& psi, const Universe& u,
                           const DistFamily& fam);

struct SecuritySpec {
  enum Kind { Uniformity, Independence } kind = Uniformity;
  FormP post;                                      // uniformity target
  std::vector<std::pair<VarSet, VarSet>> pairs;    // independence pairs
};

struct SecurityReport {
  bool pass = true;
  long runs = 0;
  std::string detail;
  std::optional<Configuration> witness;
};

// Uniformity: every deterministic input valuation must satisfy `post` after
// execution. Independence: for every family distribution over the secret
// inputs (u.vary_rand), each pair of output marginals must be independent.
SecurityReport check_security_direct(const Program& prog, const SecuritySpec& spec,
                                     const Universe& u, const DistFamily& fam,
                                     const sem::Fuel& fuel = {});

}  // namespace psl::oracle
