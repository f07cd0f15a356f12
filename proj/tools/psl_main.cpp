// Batch front end: run programs, decide assertions, check proof scripts,
// falsify judgments, dump variable analyses, and replay the corpus manifest.
// Exit codes: 0 pass/ok, 1 counterexample or rejection, 2 usage/infrastructure.

#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "json.hpp"
#include "psl/analyses.hpp"
#include "psl/corpus.hpp"
#include "psl/oracle.hpp"
#include "psl/parser.hpp"
#include "psl/printer.hpp"

using nlohmann::json;
using namespace psl;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

oracle::DistFamily parse_family(const std::string& s, uint64_t seed) {
  oracle::DistFamily fam;
  fam.dirac = false;
  fam.subset_max = 0;
  fam.random_count = 0;
  fam.seed = seed;
  size_t pos = 0;
  while (pos < s.size()) {
    size_t end = s.find('+', pos);
    std::string part = s.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    if (part == "dirac") {
      fam.dirac = true;
    } else if (part.rfind("subsets:", 0) == 0) {
      fam.subset_max = std::stoi(part.substr(8));
    } else if (part.rfind("random:", 0) == 0) {
      auto rest = part.substr(7);
      auto colon = rest.find(':');
      fam.random_count = std::stol(rest.substr(0, colon));
      if (colon != std::string::npos) fam.denom_bound = std::stol(rest.substr(colon + 1));
    } else {
      throw Error("usage", "bad family component: " + part);
    }
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return fam;
}

json store_json(const dist::Memory& m) {
  json j = json::object();
  for (const auto& [v, val] : m.entries()) j[v.str()] = val.str();
  return j;
}

json dist_json(const dist::Dist& d) {
  json rows = json::array();
  for (const auto& [m, p] : d.weights()) {
    rows.push_back(json{{"memory", store_json(m)}, {"weight", rat_str(p)}});
  }
  return rows;
}

json config_json(const dist::Configuration& c) {
  return json{{"store", store_json(c.store)}, {"dist", dist_json(c.dist)}};
}

void emit(const json& j, bool as_json) {
  if (as_json) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  // plain text rendering
  std::function<void(const json&, int)> pr = [&](const json& x, int ind) {
    std::string pad(static_cast<size_t>(ind) * 2, ' ');
    if (x.is_object()) {
      for (auto it = x.begin(); it != x.end(); ++it) {
        if (it.value().is_structured()) {
          std::cout << pad << it.key() << ":\n";
          pr(it.value(), ind + 1);
        } else {
          std::cout << pad << it.key() << ": "
                    << (it.value().is_string() ? it.value().get<std::string>() : it.value().dump())
                    << "\n";
        }
      }
    } else if (x.is_array()) {
      for (const auto& e : x) {
        pr(e, ind + 1);
        std::cout << "\n";
      }
    } else {
      std::cout << pad << (x.is_string() ? x.get<std::string>() : x.dump()) << "\n";
    }
  };
  pr(j, 0);
}

std::map<lang::VarId, lang::Value> parse_sets(const lang::Program& prog,
                                              const std::vector<std::string>& sets) {
  std::map<lang::VarId, lang::Value> out;
  lang::TypeEnv tenv{&prog, nullptr};
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw Error("usage", "--set expects var=value");
    lang::ExprP x = lang::type_expr(lang::parse_expr(s.substr(0, eq)), tenv, {});
    if (!x->vid) throw Error("usage", "--set target must be a declared cell");
    lang::ExprP v =
        lang::type_expr(lang::parse_expr(s.substr(eq + 1)), tenv, *x->type);
    if (!lang::is_literal_expr(v)) throw Error("usage", "--set value must be a literal");
    out[*x->vid] = v->lit;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PSL toolkit: probabilistic separation logic checker"};
  app.require_subcommand(1);

  std::string program_path, formula_text, script_path, judgment_path, manifest_path;
  std::string family_spec = "dirac+subsets:8";
  std::vector<std::string> set_values, vary_det, vary_rand;
  long fuel = 10000;
  uint64_t seed = 20251207;
  bool as_json = false;

  app.add_flag("--json", as_json, "emit JSON reports");
  app.add_option("--seed", seed, "random-rational family seed");
  app.add_option("--fuel", fuel, "loop iteration budget");

  auto* run = app.add_subcommand("run", "execute a program and print the output distribution");
  run->add_option("program", program_path)->required();
  run->add_option("--set", set_values, "initial deterministic value var=value");

  auto* asrt = app.add_subcommand("assert", "run a program and decide an assertion");
  asrt->add_option("program", program_path)->required();
  asrt->add_option("formula", formula_text)->required();
  asrt->add_option("--set", set_values, "initial deterministic value var=value");

  auto* prove = app.add_subcommand("prove", "check a proof script");
  prove->add_option("script", script_path)->required();

  auto* fals = app.add_subcommand("falsify", "search for a judgment counterexample");
  fals->add_option("judgment", judgment_path)->required();
  fals->add_option("--family", family_spec, "dirac|subsets:K|random:N:D joined by +");

  auto* an = app.add_subcommand("analyze", "print rv/wv/mv variable sets");
  an->add_option("program", program_path)->required();

  auto* corp = app.add_subcommand("corpus", "replay a corpus manifest");
  corp->add_option("manifest", manifest_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run || *asrt) {
      lang::Program prog = lang::load_program(read_file(program_path));
      auto overrides = parse_sets(prog, set_values);
      dist::Configuration cfg{sem::default_store(prog, overrides),
                              dist::Dist::unit(sem::default_rand_memory(prog))};
      auto rep = analyses::analyze(prog.body, prog);
      json warnings = json::array();
      for (const auto& v : rep.rv_rand(prog))
        warnings.push_back("randomized variable " + v.str() +
                           " may be read before it is written; its Dirac default is visible");
      sem::Fuel fu{fuel};
      dist::Configuration out = sem::exec(prog.body, cfg, prog, fu);
      if (*run) {
        json j{{"seed", seed}, {"store", store_json(out.store)}, {"dist", dist_json(out.dist)}};
        if (!warnings.empty()) j["warnings"] = warnings;
        emit(j, as_json);
        return 0;
      }
      bool ok = bi::satisfies_text(out, formula_text, prog);
      emit(json{{"seed", seed}, {"formula", formula_text}, {"holds", ok}}, as_json);
      return ok ? 0 : 1;
    }
    if (*prove) {
      auto script = proof::load_proof_file(script_path);
      auto res = proof::check_proof(script);
      emit(json{{"script", script_path}, {"ok", res.ok}, {"diagnosis", res.str()}}, as_json);
      return res.ok ? 0 : 1;
    }
    if (*fals) {
      auto spec = corpus::load_judgment_file(judgment_path);
      if (fals->count("--family")) spec.family = parse_family(family_spec, seed);
      spec.family.seed = seed;
      if (app.count("--fuel")) spec.fuel.max_iters = fuel;
      auto v = oracle::falsify_judgment(spec.judgment, spec.universe, spec.family, spec.fuel);
      json j{{"seed", seed},
             {"family", v.family},
             {"checked", v.checked},
             {"verdict", v.kind == oracle::Verdict::NoneFound       ? "none-found"
                         : v.kind == oracle::Verdict::Counterexample ? "counterexample"
                                                                      : "fuel-exhausted"}};
      if (v.witness) j["witness"] = config_json(*v.witness);
      if (v.output) j["output"] = config_json(*v.output);
      emit(j, as_json);
      return v.found() ? 1 : 0;
    }
    if (*an) {
      lang::Program prog = lang::load_program(read_file(program_path));
      auto rep = analyses::analyze(prog.body, prog);
      auto names = [](const lang::VarSet& s) {
        json a = json::array();
        for (const auto& v : s) a.push_back(v.str());
        return a;
      };
      emit(json{{"rv", names(rep.rv)}, {"wv", names(rep.wv)}, {"mv", names(rep.mv)}}, as_json);
      return 0;
    }
    if (*corp) {
      auto outcomes = corpus::run_manifest(manifest_path);
      bool all = true;
      json rows = json::array();
      for (const auto& o : outcomes) {
        all = all && o.pass;
        rows.push_back(json{{"name", o.name}, {"pass", o.pass}, {"detail", o.detail}});
        if (!as_json)
          std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << o.name << ": " << o.detail << "\n";
      }
      if (as_json) emit(json{{"seed", seed}, {"entries", rows}}, true);
      return all ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
