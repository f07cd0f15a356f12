#include "psl/corpus.hpp"

#include <fstream>
#include <sstream>

#include "psl/parser.hpp"
#include "psl/printer.hpp"

namespace psl::corpus {

using lang::Program;
using oracle::DistFamily;
using oracle::Universe;

namespace {

std::vector<std::string> addrs_at_level(int j) {
  std::vector<std::string> out = {""};
  for (int d = 0; d < j; ++d) {
    std::vector<std::string> next;
    for (const auto& s : out) {
      next.push_back(s + "0");
      next.push_back(s + "1");
    }
    out = next;
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

std::string compile_oram(const std::vector<OramInstr>& prog, int n, int regs, long val_bound) {
  if (n < 1 || regs < 1) throw Error("oram", "need n >= 1 and at least one register");
  long k = static_cast<long>(prog.size());
  std::ostringstream s;
  long reg_bound = regs;  // register ids 1..regs
  std::string triple =
      "(nat(" + std::to_string(reg_bound) + "),nat(" + std::to_string(val_bound) + "),bitstr(" +
      std::to_string(n) + "))";
  s << "det v : nat(" << val_bound << ")[" << regs << "];\n";
  s << "det c : nat(" << (k + 2) << ");\n";
  s << "rand p : bitstr(" << n << ")[" << regs << "];\n";
  s << "rand a : list<" << triple << ">[addr(" << n << ")];\n";
  s << "rand l : bitstr(" << n << ");\n";
  s << "rand w, wr : list<" << triple << ">;\n";
  s << "rand yv : nat(" << reg_bound << ");\n";
  s << "rand uv : nat(" << val_bound << ");\n";
  s << "rand lv : bitstr(" << n << ");\n";
  if (k > 0) s << "rand lk : (bitstr(" << n << "),bitstr(" << n << "))[" << k << "];\n";
  s << "begin\n";
  s << "  c := 1;\n";
  // position map sampled uniformly and independently; initial triples sit in
  // the root bucket, which prefixes every path
  for (int x = 1; x <= regs; ++x) s << "  p[" << x << "] <-$ bitstr(" << n << ");\n";
  for (int x = 1; x <= regs; ++x)
    s << "  a[@] := (" << x << ", v[" << x << "], p[" << x << "]) :: a[@];\n";

  auto path_search = [&](int x) {
    // collect the register's triples along the path from the root to p[x]
    s << "  w := [];\n";
    s << "  (wr, a[@]) := split_reg(a[@], " << x << ");\n";
    s << "  w := w ++ wr;\n";
    for (int j = 1; j <= n; ++j) {
      for (const auto& ad : addrs_at_level(j)) {
        s << "  if p[" << x << "][1.." << j << "] = \"" << ad << "\" then {\n";
        s << "    (wr, a[@" << ad << "]) := split_reg(a[@" << ad << "], " << x << ");\n";
        s << "    w := w ++ wr\n";
        s << "  };\n";
      }
    }
    s << "  (yv, uv, lv) := head(w);\n";
  };
  auto flush = [&]() {
    s << "  l <-$ bitstr(" << n << ");\n";
    s << "  lk[c].2 := l;\n";
    s << "  w := [];\n";
    s << "  (a[@], w) := split_path(a[@] ++ w, l, 0);\n";
    for (int j = 1; j <= n; ++j) {
      for (const auto& ad : addrs_at_level(j)) {
        s << "  if l[1.." << j << "] = \"" << ad << "\" then {\n";
        s << "    (a[@" << ad << "], w) := split_path(a[@" << ad << "] ++ w, l, " << j << ")\n";
        s << "  };\n";
      }
    }
  };

  for (const auto& ins : prog) {
    int x = ins.reg;
    s << "  lk[c].1 := p[" << x << "];\n";
    path_search(x);
    s << "  p[" << x << "] <-$ bitstr(" << n << ");\n";
    if (ins.is_read)
      s << "  a[@] := (" << x << ", uv, p[" << x << "]) :: a[@];\n";
    else
      s << "  a[@] := (" << x << ", " << ins.val << ", p[" << x << "]) :: a[@];\n";
    flush();
    s << "  c := c + 1;\n";
  }
  s << "  skip\nend\n";
  return s.str();
}

std::vector<std::vector<OramInstr>> oram_programs(int k, int regs, long val_bound) {
  std::vector<OramInstr> alphabet;
  for (int x = 1; x <= regs; ++x) {
    alphabet.push_back({true, x, 0});
    for (long v = 0; v <= val_bound; ++v) alphabet.push_back({false, x, v});
  }
  std::vector<std::vector<OramInstr>> out = {{}};
  for (int step = 0; step < k; ++step) {
    std::vector<std::vector<OramInstr>> next;
    for (const auto& p : out)
      if (static_cast<int>(p.size()) == step)
        for (const auto& i : alphabet) {
          auto q = p;
          q.push_back(i);
          next.push_back(q);
        }
    for (auto& q : next) out.push_back(std::move(q));
  }
  // keep only non-empty programs
  std::vector<std::vector<OramInstr>> res;
  for (auto& p : out)
    if (!p.empty()) res.push_back(std::move(p));
  return res;
}

std::string oram_post(int k) {
  return "bigsep b in [1," + std::to_string(k) + "] : U[(lk[b].1, lk[b].2)]";
}

JudgmentSpec load_judgment(const json& j, const std::string& base_dir) {
  JudgmentSpec spec;
  std::string text;
  if (j.contains("program_text")) {
    text = j.at("program_text").get<std::string>();
  } else {
    std::string p = j.at("program").get<std::string>();
    if (!p.empty() && p[0] != '/' && !base_dir.empty()) p = base_dir + "/" + p;
    text = read_file(p);
  }
  spec.prog = std::make_shared<Program>(lang::load_program(text));
  bi::FormulaEnv env{spec.prog.get(), {}};
  auto form = [&](const std::string& t) {
    return bi::expand_big(bi::resolve_formula(bi::parse_formula(t), env), env);
  };
  spec.judgment.pre = form(j.at("pre").get<std::string>());
  spec.judgment.post = form(j.at("post").get<std::string>());
  spec.judgment.cmd = spec.prog->body;
  spec.universe.prog = spec.prog.get();
  lang::TypeEnv tenv{spec.prog.get(), nullptr};
  auto vars = [&](const char* key) {
    std::vector<lang::VarId> out;
    if (!j.contains(key)) return out;
    for (const auto& s : j.at(key)) {
      lang::ExprP e = lang::type_expr(lang::parse_expr(s.get<std::string>()), tenv, {});
      if (!e->vid) throw Error("schema", "universe entry must name a cell");
      out.push_back(*e->vid);
    }
    return out;
  };
  spec.universe.vary_det = vars("vary_det");
  spec.universe.vary_rand = vars("vary_rand");
  if (j.contains("family")) {
    const auto& f = j.at("family");
    spec.family.dirac = f.value("dirac", true);
    spec.family.subset_max = f.value("subsets", 8);
    spec.family.random_count = f.value("random", 0L);
    spec.family.denom_bound = f.value("denom", 8L);
    spec.family.seed = f.value("seed", static_cast<uint64_t>(20251207));
  }
  if (j.contains("fuel")) spec.fuel.max_iters = j.at("fuel").get<long>();
  if (j.contains("budget")) spec.universe.config_budget = j.at("budget").get<long>();
  return spec;
}

JudgmentSpec load_judgment_file(const std::string& path) {
  json j = json::parse(read_file(path), nullptr, true, true);
  std::string dir = ".";
  auto slash = path.find_last_of('/');
  if (slash != std::string::npos) dir = path.substr(0, slash);
  return load_judgment(j, dir);
}

namespace {

Outcome run_entry(const json& e, const std::string& dir) {
  Outcome out;
  out.name = e.at("name").get<std::string>();
  std::string kind = e.at("kind").get<std::string>();
  auto path_of = [&](const char* key) {
    std::string p = e.at(key).get<std::string>();
    if (!p.empty() && p[0] != '/') p = dir + "/" + p;
    return p;
  };
  try {
    if (kind == "note") {
      out.pass = true;
      out.detail = e.value("detail", std::string("noted"));
      return out;
    }
    if (kind == "proof") {
      auto script = proof::load_proof_file(path_of("script"));
      auto res = proof::check_proof(script);
      out.pass = res.ok;
      out.detail = res.ok ? "proof accepted" : res.str();
    } else if (kind == "proof-rejected") {
      auto script = proof::load_proof_file(path_of("script"));
      auto res = proof::check_proof(script);
      out.pass = !res.ok;
      out.detail = res.ok ? "expected rejection but proof was accepted" : "rejected: " + res.str();
    } else if (kind == "security-uniformity") {
      auto text = read_file(path_of("program"));
      auto prog = std::make_shared<Program>(lang::load_program(text));
      Universe u;
      u.prog = prog.get();
      lang::TypeEnv tenv{prog.get(), nullptr};
      for (const auto& s : e.at("inputs")) {
        lang::ExprP x = lang::type_expr(lang::parse_expr(s.get<std::string>()), tenv, {});
        u.vary_det.push_back(*x->vid);
      }
      oracle::SecuritySpec spec;
      spec.kind = oracle::SecuritySpec::Uniformity;
      bi::FormulaEnv env{prog.get(), {}};
      spec.post = bi::expand_big(
          bi::resolve_formula(bi::parse_formula(e.at("post").get<std::string>()), env), env);
      auto rep = oracle::check_security_direct(*prog, spec, u, DistFamily{});
      out.pass = rep.pass;
      out.detail = rep.detail;
    } else if (kind == "security-independence") {
      auto text = read_file(path_of("program"));
      auto prog = std::make_shared<Program>(lang::load_program(text));
      Universe u;
      u.prog = prog.get();
      lang::TypeEnv tenv{prog.get(), nullptr};
      auto cell = [&](const std::string& s) {
        lang::ExprP x = lang::type_expr(lang::parse_expr(s), tenv, {});
        return *x->vid;
      };
      for (const auto& s : e.at("secrets")) u.vary_rand.push_back(cell(s.get<std::string>()));
      oracle::SecuritySpec spec;
      spec.kind = oracle::SecuritySpec::Independence;
      for (const auto& pr : e.at("pairs")) {
        lang::VarSet s1, s2;
        for (const auto& s : pr.at(0)) s1.insert(cell(s.get<std::string>()));
        for (const auto& s : pr.at(1)) s2.insert(cell(s.get<std::string>()));
        spec.pairs.emplace_back(s1, s2);
      }
      DistFamily fam;
      if (e.contains("family")) {
        const auto& f = e.at("family");
        fam.dirac = f.value("dirac", true);
        fam.subset_max = f.value("subsets", 8);
        fam.random_count = f.value("random", 0L);
        fam.denom_bound = f.value("denom", 8L);
        fam.seed = f.value("seed", static_cast<uint64_t>(20251207));
      }
      auto rep = oracle::check_security_direct(*prog, spec, u, fam);
      out.pass = rep.pass;
      out.detail = rep.detail;
    } else if (kind == "falsify-expect-none" || kind == "falsify-expect-cex") {
      JudgmentSpec spec = e.contains("judgment") && e.at("judgment").is_string()
                              ? load_judgment_file(path_of("judgment"))
                              : load_judgment(e.at("judgment"), dir);
      auto v = oracle::falsify_judgment(spec.judgment, spec.universe, spec.family, spec.fuel);
      bool want_cex = kind == "falsify-expect-cex";
      out.pass = want_cex ? v.found() : v.kind == oracle::Verdict::NoneFound;
      out.detail = v.found() ? "counterexample after " + std::to_string(v.checked) + " configs"
                             : (v.kind == oracle::Verdict::FuelExhausted
                                    ? "fuel exhausted: " + v.note
                                    : "none-found over " + v.family + " (" +
                                          std::to_string(v.checked) + " configs)");
    } else if (kind == "oram") {
      int n = e.value("n", 2);
      int regs = e.value("regs", 2);
      int k = e.value("k", 2);
      long val_bound = e.value("val_bound", 1L);
      long runs = 0;
      for (const auto& cp : oram_programs(k, regs, val_bound)) {
        std::string text = compile_oram(cp, n, regs, val_bound);
        auto prog = std::make_shared<Program>(lang::load_program(text));
        Universe u;
        u.prog = prog.get();
        for (int x = 1; x <= regs; ++x) {
          lang::VarId v;
          v.name = "v";
          v.idx = {std::to_string(x)};
          u.vary_det.push_back(v);
        }
        oracle::SecuritySpec spec;
        spec.kind = oracle::SecuritySpec::Uniformity;
        bi::FormulaEnv env{prog.get(), {}};
        spec.post = bi::expand_big(
            bi::resolve_formula(bi::parse_formula(oram_post(static_cast<int>(cp.size()))), env),
            env);
        sem::Fuel fuel;
        auto rep = oracle::check_security_direct(*prog, spec, u, DistFamily{}, fuel);
        runs += rep.runs;
        if (!rep.pass) {
          out.pass = false;
          out.detail = "leakage not uniform for a length-" + std::to_string(cp.size()) +
                       " program: " + rep.detail;
          return out;
        }
      }
      out.pass = true;
      out.detail = "oblivious across " + std::to_string(runs) + " program/input combinations";
    } else {
      out.pass = false;
      out.detail = "unknown manifest kind " + kind;
    }
  } catch (const Error& ex) {
    out.pass = false;
    out.detail = ex.what();
  }
  return out;
}

}  // namespace

std::vector<Outcome> run_manifest(const std::string& manifest_path) {
  json j = json::parse(read_file(manifest_path), nullptr, true, true);
  std::string dir = ".";
  auto slash = manifest_path.find_last_of('/');
  if (slash != std::string::npos) dir = manifest_path.substr(0, slash);
  std::vector<Outcome> out;
  for (const auto& e : j.at("entries")) out.push_back(run_entry(e, dir));
  return out;
}

}  // namespace psl::corpus
