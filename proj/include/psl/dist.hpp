#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "psl/ast.hpp"

namespace psl::dist {

using lang::Value;
using lang::VarId;
using lang::VarSet;

// Finite memory with an explicit domain: the assignment's key set is the
// domain. Shared by randomized memories and deterministic stores. The sorted
// variable layout is shared across memories of one distribution, so updates
// copy only the value vector and map-key comparisons skip the variable names.
class Memory {
 public:
  using Layout = std::shared_ptr<const std::vector<VarId>>;

  Memory() = default;
  explicit Memory(std::vector<std::pair<VarId, Value>> kv);
  Memory(Layout layout, std::vector<Value> vals);

  static Memory empty() { return Memory(); }

  const Value& get(const VarId& v) const;
  const Value* find(const VarId& v) const;
  Memory set(const VarId& v, Value val) const;  // v must be in the domain
  Memory extend(const VarId& v, Value val) const;
  Memory restrict_to(const VarSet& s) const;
  Memory merge(const Memory& other) const;  // domains must be disjoint

  VarSet domain() const;
  bool has(const VarId& v) const { return find(v) != nullptr; }
  size_t size() const { return vals_.size(); }
  std::vector<std::pair<VarId, Value>> entries() const;
  const Layout& layout() const { return layout_; }
  const std::vector<Value>& values() const { return vals_; }

  bool operator==(const Memory& o) const;
  bool operator<(const Memory& o) const;
  std::string str() const;

 private:
  static const Layout& empty_layout();
  void build_key();
  Layout layout_ = empty_layout();
  std::vector<Value> vals_;
  // order-preserving byte encoding of vals_; map-key comparisons reduce to
  // memcmp instead of element-wise variant comparisons
  std::string key_;
};

using RandMemory = Memory;
using DetStore = Memory;

// Exact finite-support distribution over randomized memories. Weights are
// positive rationals summing to one; zero-weight entries are never stored.
class Dist {
 public:
  Dist() = default;

  static Dist unit(const RandMemory& m);
  static Dist uniform_over(const std::vector<Value>& values, const VarId& x);
  // weighted construction; drops zeros, checks total weight is one
  static Dist make(VarSet domain, std::map<RandMemory, Rat> weights);

  const VarSet& domain() const { return domain_; }
  const std::map<RandMemory, Rat>& weights() const { return w_; }
  size_t support_size() const { return w_.size(); }
  Rat mass_of(const std::function<bool(const RandMemory&)>& event) const;

  Dist bind(const std::function<Dist(const RandMemory&)>& f) const;
  Dist map(const std::function<RandMemory(const RandMemory&)>& f) const;
  Dist product(const Dist& other) const;
  Dist project(const VarSet& s) const;
  std::optional<Dist> condition(const std::function<bool(const RandMemory&)>& event) const;
  static Dist convex(const Rat& rho, const std::optional<Dist>& mu1,
                     const std::optional<Dist>& mu2);
  bool is_independent(const VarSet& s1, const VarSet& s2) const;

  bool operator==(const Dist& o) const { return domain_ == o.domain_ && w_ == o.w_; }
  bool operator!=(const Dist& o) const { return !(*this == o); }

  // canonical text table: sorted memories, reduced fractions
  std::string table() const;

 private:
  VarSet domain_;
  std::map<RandMemory, Rat> w_;
};

struct Configuration {
  DetStore store;
  Dist dist;
  bool operator==(const Configuration& o) const { return store == o.store && dist == o.dist; }
  std::string str() const;
};

}  // namespace psl::dist
