#pragma once

#include "psl/dist.hpp"
#include "psl/formula.hpp"

namespace psl::bi {

// Satisfaction in the probabilistic Kripke resource model. The formula must be
// resolved and expanded. The deterministic store is expected to carry every
// declared deterministic variable; the distribution domain may be partial
// except under -> and -*, which are decided only at full-domain worlds (the
// extension quantification collapses there) and raise Error("unsupported-
// fragment") elsewhere.
bool satisfies(const dist::Configuration& cfg, const FormP& f, const Program& prog);

// Convenience: resolve, expand, then decide.
bool satisfies_text(const dist::Configuration& cfg, const std::string& formula_text,
                    const Program& prog);

}  // namespace psl::bi
