#include "psl/satisfies.hpp"

#include <algorithm>

#include "psl/parser.hpp"
#include "psl/semantics.hpp"

namespace psl::bi {

using dist::Configuration;
using dist::Dist;
using lang::VarKind;

namespace {

bool subset_of(const VarSet& a, const VarSet& b) {
  for (const auto& v : a)
    if (!b.count(v)) return false;
  return true;
}

struct Sat {
  const Program& prog;

  bool full_domain(const Configuration& cfg) const {
    return cfg.dist.domain() == prog.all_vars(VarKind::Rand);
  }

  bool atom_fv_in_domain(const FormP& f, const Configuration& cfg) const {
    FV fv = fv_formula(f, prog);
    return subset_of(fv.rand, cfg.dist.domain());
  }

  bool go(const Configuration& cfg, const FormP& f) const {
    switch (f->kind) {
      case FKind::Top: return true;
      case FKind::Bot: return false;
      case FKind::AtomDet:
        return sem::eval_det(cfg.store, f->a, prog).as_bool();
      case FKind::Unif: {
        if (!atom_fv_in_domain(f, cfg)) return false;
        auto push = sem::eval_rand_dist(cfg.store, cfg.dist, f->a, prog);
        std::vector<Value> set = unif_set(*f, prog);
        if (push.size() != set.size()) return false;
        Rat each(1, static_cast<long>(set.size()));
        for (const auto& v : set) {
          auto it = push.find(v);
          if (it == push.end() || it->second != each) return false;
        }
        return true;
      }
      case FKind::Sim: {
        if (!atom_fv_in_domain(f, cfg)) return false;
        for (const auto& [m, p] : cfg.dist.weights()) {
          (void)p;
          if (!(sem::eval_rand(cfg.store, m, f->a, prog) ==
                sem::eval_rand(cfg.store, m, f->b, prog)))
            return false;
        }
        return true;
      }
      case FKind::And: return go(cfg, f->l) && go(cfg, f->r);
      case FKind::Or: return go(cfg, f->l) || go(cfg, f->r);
      case FKind::Imp: {
        if (!full_domain(cfg))
          throw Error("unsupported-fragment",
                      "-> is decided only at full-domain configurations");
        return !go(cfg, f->l) || go(cfg, f->r);
      }
      case FKind::SepImp: {
        if (!full_domain(cfg))
          throw Error("unsupported-fragment",
                      "-* is decided only at full-domain configurations");
        // the only worlds composable with a full-domain world carry the empty
        // randomized domain
        Configuration empty{cfg.store, Dist::unit(dist::RandMemory{})};
        return !go(empty, f->l) || go(cfg, f->r);
      }
      case FKind::SepAnd: return sep_and(cfg, f);
      default: throw Error("formula", "satisfaction of an unexpanded big operator");
    }
  }

  bool sep_and(const Configuration& cfg, const FormP& f) const {
    // candidate split variables, bounded by the Restriction lemma
    auto side_vars = [&](const FormP& g) {
      std::vector<lang::VarId> vs;
      for (const auto& v : fv_formula(g, prog).rand)
        if (cfg.dist.domain().count(v)) vs.push_back(v);
      return vs;
    };
    std::vector<lang::VarId> f1 = side_vars(f->l);
    std::vector<lang::VarId> f2 = side_vars(f->r);
    if (f1.size() > 20 || f2.size() > 20)
      throw Error("budget", "separating-conjunction split search too large");

    // prefer the lexicographically least left side (diagnostic determinism):
    // subsets enumerated in increasing bitmask order over sorted variables
    for (uint64_t m1 = 0; m1 < (1ull << f1.size()); ++m1) {
      VarSet s1;
      for (size_t i = 0; i < f1.size(); ++i)
        if (m1 & (1ull << i)) s1.insert(f1[i]);
      Dist p1 = cfg.dist.project(s1);
      if (!go(Configuration{cfg.store, p1}, f->l)) continue;
      for (uint64_t m2 = 0; m2 < (1ull << f2.size()); ++m2) {
        VarSet s2;
        bool overlap = false;
        for (size_t i = 0; i < f2.size(); ++i)
          if (m2 & (1ull << i)) {
            if (s1.count(f2[i])) {
              overlap = true;
              break;
            }
            s2.insert(f2[i]);
          }
        if (overlap) continue;
        VarSet both = s1;
        both.insert(s2.begin(), s2.end());
        Dist p2 = cfg.dist.project(s2);
        if (cfg.dist.project(both) != p1.product(p2)) continue;
        if (go(Configuration{cfg.store, p2}, f->r)) return true;
      }
    }
    return false;
  }
};

}  // namespace

bool satisfies(const Configuration& cfg, const FormP& f, const Program& prog) {
  Sat s{prog};
  return s.go(cfg, f);
}

bool satisfies_text(const Configuration& cfg, const std::string& formula_text,
                    const Program& prog) {
  FormulaEnv env{&prog, {}};
  FormP f = parse_formula(formula_text);
  f = resolve_formula(f, env);
  f = expand_big(f, env);
  return satisfies(cfg, f, prog);
}

}  // namespace psl::bi
