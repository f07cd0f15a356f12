#pragma once

#include <string>
#include <vector>

#include "psl/proofcheck.hpp"

namespace psl::corpus {

using entail::json;

// Core RAM language: P ::= eps | i;P with i ::= read(x) | write(x,v).
struct OramInstr {
  bool is_read = true;
  int reg = 1;   // 1-based register index
  long val = 0;  // write payload
};

// Compile a core program to pWhile source over a depth-n address tree with
// list-valued buckets, a sampled position map, and ghost leakage recording
// (lk[c].1 = position-map read, lk[c].2 = flush leaf). Registers hold values
// in {0..val_bound}; initial register values are the deterministic inputs
// v[1..regs], planted as triples in the root bucket.
std::string compile_oram(const std::vector<OramInstr>& prog, int n, int regs,
                         long val_bound = 1);

// all core programs of exactly length k
std::vector<std::vector<OramInstr>> oram_programs(int k, int regs, long val_bound);

// obliviousness post-condition over the first k leakage pairs
std::string oram_post(int k);

struct JudgmentSpec {
  std::shared_ptr<lang::Program> prog;
  oracle::Judgment judgment;
  oracle::Universe universe;
  oracle::DistFamily family;
  sem::Fuel fuel;
};
JudgmentSpec load_judgment_file(const std::string& path);
JudgmentSpec load_judgment(const json& j, const std::string& base_dir);

struct Outcome {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Replay a corpus manifest: proof scripts must check, direct security checks
// must pass, falsification entries must match their expected verdict.
std::vector<Outcome> run_manifest(const std::string& manifest_path);

}  // namespace psl::corpus
