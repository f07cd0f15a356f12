#include "psl/oracle.hpp"

#include <random>

namespace psl::oracle {

using lang::VarKind;

std::string DistFamily::desc() const {
  std::string s;
  if (dirac) s += "dirac";
  if (subset_max > 0) s += (s.empty() ? "" : "+") + std::string("subsets:") + std::to_string(subset_max);
  if (random_count > 0)
    s += (s.empty() ? "" : "+") + std::string("random:") + std::to_string(random_count) + ":" +
         std::to_string(denom_bound) + "@" + std::to_string(seed);
  return s.empty() ? "none" : s;
}

std::vector<RandMemory> memory_space(const Universe& u) {
  const Program& prog = *u.prog;
  RandMemory defaults = sem::default_rand_memory(prog);
  std::vector<RandMemory> out;
  out.push_back(defaults);
  for (const auto& v : u.vary_rand) {
    std::vector<Value> carrier = lang::enumerate_carrier(prog.type_of(v));
    std::vector<RandMemory> next;
    next.reserve(out.size() * carrier.size());
    for (const auto& m : out)
      for (const auto& val : carrier) next.push_back(m.set(v, val));
    out = std::move(next);
    if (static_cast<long>(out.size()) > u.memory_budget)
      throw Error("budget", "memory space exceeds budget (" + std::to_string(out.size()) +
                                " partial memories)");
  }
  return out;
}

namespace {

long binom_capped(long n, long k, long cap) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (long i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > cap) return cap;
  }
  return r;
}

std::vector<std::map<VarId, Value>> det_assignments(const Universe& u) {
  const Program& prog = *u.prog;
  std::vector<std::map<VarId, Value>> out = {{}};
  for (const auto& v : u.vary_det) {
    std::vector<Value> carrier = lang::enumerate_carrier(prog.type_of(v));
    std::vector<std::map<VarId, Value>> next;
    next.reserve(out.size() * carrier.size());
    for (const auto& a : out)
      for (const auto& val : carrier) {
        auto b = a;
        b[v] = val;
        next.push_back(std::move(b));
      }
    out = std::move(next);
    if (static_cast<long>(out.size()) > u.config_budget)
      throw Error("budget", "deterministic input space exceeds budget");
  }
  return out;
}

// uniform over a subset of memories given by sorted indices
Dist uniform_subset(const std::vector<RandMemory>& space, const std::vector<long>& ix,
                    const VarSet& domain) {
  std::map<RandMemory, Rat> w;
  Rat p(1, static_cast<long>(ix.size()));
  for (long i : ix) w[space[static_cast<size_t>(i)]] += p;
  return Dist::make(domain, std::move(w));
}

}  // namespace

long family_count(const Universe& u, const DistFamily& fam) {
  long n = static_cast<long>(memory_space(u).size());
  long total = 0;
  if (fam.dirac) total += n;
  if (fam.subset_max > 0) {
    int lo = fam.dirac ? 2 : 1;
    for (int k = lo; k <= std::min<long>(fam.subset_max, n); ++k) {
      total += binom_capped(n, k, u.config_budget + 1);
      if (total > u.config_budget) return total;
    }
  }
  total += fam.random_count;
  return total;
}

long enumerate_family(const Universe& u, const DistFamily& fam,
                      const std::function<bool(const Dist&)>& visit) {
  std::vector<RandMemory> space = memory_space(u);
  long n = static_cast<long>(space.size());
  VarSet domain = space.front().domain();
  long seen = 0;

  if (fam.dirac) {
    for (const auto& m : space) {
      ++seen;
      if (!visit(Dist::unit(m))) return seen;
    }
  }
  if (fam.subset_max > 0) {
    int lo = fam.dirac ? 2 : 1;
    for (int k = lo; k <= std::min<long>(fam.subset_max, n); ++k) {
      // lexicographic combinations of size k
      std::vector<long> ix(static_cast<size_t>(k));
      for (int i = 0; i < k; ++i) ix[static_cast<size_t>(i)] = i;
      while (true) {
        ++seen;
        if (seen > u.config_budget)
          throw Error("budget", "family enumeration exceeds budget (" + std::to_string(seen) + ")");
        if (!visit(uniform_subset(space, ix, domain))) return seen;
        int i = k - 1;
        while (i >= 0 && ix[static_cast<size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++ix[static_cast<size_t>(i)];
        for (int j = i + 1; j < k; ++j) ix[static_cast<size_t>(j)] = ix[static_cast<size_t>(j - 1)] + 1;
      }
    }
  }
  if (fam.random_count > 0) {
    std::mt19937_64 rng(fam.seed);
    for (long t = 0; t < fam.random_count; ++t) {
      long d = 1 + static_cast<long>(rng() % static_cast<uint64_t>(fam.denom_bound));
      long s = 1 + static_cast<long>(rng() % static_cast<uint64_t>(std::min(d, n)));
      // distinct support indices
      std::vector<long> ix;
      while (static_cast<long>(ix.size()) < s) {
        long cand = static_cast<long>(rng() % static_cast<uint64_t>(n));
        bool dup = false;
        for (long x : ix) dup |= (x == cand);
        if (!dup) ix.push_back(cand);
      }
      std::sort(ix.begin(), ix.end());
      // composition of d into s positive parts
      std::vector<long> parts(static_cast<size_t>(s), 1);
      for (long r = d - s; r > 0; --r)
        parts[static_cast<size_t>(rng() % static_cast<uint64_t>(s))] += 1;
      std::map<RandMemory, Rat> w;
      for (long i = 0; i < s; ++i)
        w[space[static_cast<size_t>(ix[static_cast<size_t>(i)])]] +=
            Rat(parts[static_cast<size_t>(i)], d);
      ++seen;
      if (!visit(Dist::make(domain, std::move(w)))) return seen;
    }
  }
  return seen;
}

long enumerate_configs(const Universe& u, const DistFamily& fam,
                       const std::function<bool(const Configuration&)>& visit) {
  const Program& prog = *u.prog;
  auto dets = det_assignments(u);
  long total_est = static_cast<long>(dets.size()) * family_count(u, fam);
  if (total_est > u.config_budget)
    throw Error("budget", "configuration space " + std::to_string(total_est) +
                              " exceeds budget " + std::to_string(u.config_budget));
  long seen = 0;
  for (const auto& da : dets) {
    dist::DetStore store = sem::default_store(prog, da);
    bool keep = true;
    enumerate_family(u, fam, [&](const Dist& mu) {
      ++seen;
      keep = visit(Configuration{store, mu});
      return keep;
    });
    if (!keep) break;
  }
  return seen;
}

Verdict falsify_judgment(const Judgment& j, const Universe& u, const DistFamily& fam,
                         const sem::Fuel& fuel) {
  const Program& prog = *u.prog;
  Verdict v;
  v.family = fam.desc();
  bool fuel_out = false;
  std::string fuel_note;
  enumerate_configs(u, fam, [&](const Configuration& cfg) {
    ++v.checked;
    if (!bi::satisfies(cfg, j.pre, prog)) return true;
    Configuration out;
    try {
      out = sem::exec(j.cmd, cfg, prog, fuel);
    } catch (const Error& e) {
      if (e.kind() == "fuel") {
        fuel_out = true;
        fuel_note = e.what();
        return false;
      }
      throw;
    }
    if (!bi::satisfies(out, j.post, prog)) {
      v.kind = Verdict::Counterexample;
      v.witness = cfg;
      v.output = out;
      return false;
    }
    return true;
  });
  if (fuel_out) {
    v.kind = Verdict::FuelExhausted;
    v.note = fuel_note;
  }
  return v;
}

Verdict falsify_entailment(const FormP& phi, const FormP& psi, const Universe& u,
                           const DistFamily& fam) {
  const Program& prog = *u.prog;
  Verdict v;
  v.family = fam.desc();
  enumerate_configs(u, fam, [&](const Configuration& cfg) {
    ++v.checked;
    if (bi::satisfies(cfg, phi, prog) && !bi::satisfies(cfg, psi, prog)) {
      v.kind = Verdict::Counterexample;
      v.witness = cfg;
      return false;
    }
    return true;
  });
  return v;
}

SecurityReport check_security_direct(const Program& prog, const SecuritySpec& spec,
                                     const Universe& u, const DistFamily& fam,
                                     const sem::Fuel& fuel) {
  SecurityReport rep;
  if (spec.kind == SecuritySpec::Uniformity) {
    for (const auto& da : det_assignments(u)) {
      dist::DetStore store = sem::default_store(prog, da);
      Configuration cfg{store, Dist::unit(sem::default_rand_memory(prog))};
      Configuration out = sem::exec(prog.body, cfg, prog, fuel);
      ++rep.runs;
      if (!bi::satisfies(out, spec.post, prog)) {
        rep.pass = false;
        rep.witness = cfg;
        rep.detail = "uniformity target fails for store " + store.str();
        return rep;
      }
    }
    rep.detail = "uniform for all " + std::to_string(rep.runs) + " input valuations";
    return rep;
  }
  // independence over secret-input distributions
  dist::DetStore store = sem::default_store(prog);
  bool stop = false;
  enumerate_family(u, fam, [&](const Dist& mu) {
    Configuration cfg{store, mu};
    Configuration out = sem::exec(prog.body, cfg, prog, fuel);
    ++rep.runs;
    for (const auto& [s1, s2] : spec.pairs) {
      if (!out.dist.is_independent(s1, s2)) {
        rep.pass = false;
        rep.witness = cfg;
        rep.detail = "independence fails on input distribution:\n" + mu.table();
        stop = true;
        return false;
      }
    }
    return true;
  });
  if (!stop) rep.detail = "independent across " + std::to_string(rep.runs) + " input distributions";
  return rep;
}

}  // namespace psl::oracle
