#include "psl/dist.hpp"

#include <algorithm>

namespace psl::dist {

const Memory::Layout& Memory::empty_layout() {
  static const Layout e = std::make_shared<const std::vector<VarId>>();
  return e;
}

namespace {

void be64(std::string& out, uint64_t x) {
  for (int i = 7; i >= 0; --i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

// tag bytes start at 1 so a 0 terminator sorts shorter lists first, matching
// lexicographic element order
void value_key(std::string& out, const Value& v) {
  switch (v.v.index()) {
    case 0:
      out.push_back(1);
      out.push_back(v.as_bool() ? 1 : 0);
      return;
    case 1: {
      out.push_back(2);
      be64(out, static_cast<uint64_t>(v.as_bits().width));
      be64(out, v.as_bits().bits);
      return;
    }
    case 2:
      out.push_back(3);
      be64(out, static_cast<uint64_t>(v.as_z().q));
      be64(out, static_cast<uint64_t>(v.as_z().v));
      return;
    case 3:
      out.push_back(4);
      be64(out, static_cast<uint64_t>(v.as_nat()));
      return;
    case 4:
      out.push_back(5);
      for (const auto& e : v.as_tuple().elems) value_key(out, e);
      out.push_back(0);
      return;
    case 5:
      out.push_back(6);
      for (const auto& e : v.as_list().elems) value_key(out, e);
      out.push_back(0);
      return;
  }
}

}  // namespace

void Memory::build_key() {
  key_.clear();
  for (const auto& v : vals_) value_key(key_, v);
}

Memory::Memory(std::vector<std::pair<VarId, Value>> kv) {
  std::sort(kv.begin(), kv.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (size_t i = 1; i < kv.size(); ++i)
    if (kv[i - 1].first == kv[i].first)
      throw Error("memory", "duplicate variable " + kv[i].first.str());
  auto keys = std::make_shared<std::vector<VarId>>();
  keys->reserve(kv.size());
  vals_.reserve(kv.size());
  for (auto& [v, val] : kv) {
    keys->push_back(v);
    vals_.push_back(std::move(val));
  }
  layout_ = std::move(keys);
  build_key();
}

Memory::Memory(Layout layout, std::vector<Value> vals)
    : layout_(std::move(layout)), vals_(std::move(vals)) {
  if (layout_->size() != vals_.size()) throw Error("memory", "layout/value size mismatch");
  build_key();
}

const Value* Memory::find(const VarId& v) const {
  auto it = std::lower_bound(layout_->begin(), layout_->end(), v);
  if (it != layout_->end() && *it == v)
    return &vals_[static_cast<size_t>(it - layout_->begin())];
  return nullptr;
}

const Value& Memory::get(const VarId& v) const {
  const Value* p = find(v);
  if (!p) throw Error("memory", "variable " + v.str() + " not in domain");
  return *p;
}

Memory Memory::set(const VarId& v, Value val) const {
  auto it = std::lower_bound(layout_->begin(), layout_->end(), v);
  if (it == layout_->end() || !(*it == v))
    throw Error("memory", "variable " + v.str() + " not in domain");
  Memory m = *this;
  m.vals_[static_cast<size_t>(it - layout_->begin())] = std::move(val);
  m.build_key();
  return m;
}

Memory Memory::extend(const VarId& v, Value val) const {
  if (find(v)) throw Error("memory", "variable " + v.str() + " already in domain");
  auto kv = entries();
  kv.emplace_back(v, std::move(val));
  return Memory(std::move(kv));
}

Memory Memory::restrict_to(const VarSet& s) const {
  std::vector<std::pair<VarId, Value>> kv;
  for (size_t i = 0; i < layout_->size(); ++i)
    if (s.count((*layout_)[i])) kv.emplace_back((*layout_)[i], vals_[i]);
  return Memory(std::move(kv));
}

Memory Memory::merge(const Memory& other) const {
  auto kv = entries();
  for (auto& e : other.entries()) {
    if (find(e.first)) throw Error("memory", "overlapping domains at " + e.first.str());
    kv.push_back(std::move(e));
  }
  return Memory(std::move(kv));
}

VarSet Memory::domain() const {
  VarSet s;
  for (const auto& v : *layout_) s.insert(v);
  return s;
}

std::vector<std::pair<VarId, Value>> Memory::entries() const {
  std::vector<std::pair<VarId, Value>> kv;
  kv.reserve(vals_.size());
  for (size_t i = 0; i < vals_.size(); ++i) kv.emplace_back((*layout_)[i], vals_[i]);
  return kv;
}

bool Memory::operator==(const Memory& o) const {
  if (layout_ != o.layout_ && !(*layout_ == *o.layout_)) return false;
  return key_ == o.key_;
}

bool Memory::operator<(const Memory& o) const {
  if (layout_ != o.layout_) {
    if (*layout_ < *o.layout_) return true;
    if (*o.layout_ < *layout_) return false;
  }
  return key_ < o.key_;
}

std::string Memory::str() const {
  std::string s;
  for (size_t i = 0; i < vals_.size(); ++i) {
    if (!s.empty()) s += " ";
    s += (*layout_)[i].str() + "=" + vals_[i].str();
  }
  return s.empty() ? "()" : s;
}

Dist Dist::unit(const RandMemory& m) {
  Dist d;
  d.domain_ = m.domain();
  d.w_.emplace(m, Rat(1));
  return d;
}

Dist Dist::uniform_over(const std::vector<Value>& values, const VarId& x) {
  if (values.empty()) throw Error("dist", "uniform over empty set");
  Dist d;
  d.domain_.insert(x);
  Rat p(1, static_cast<long>(values.size()));
  for (const auto& v : values) {
    Memory m;
    m = m.extend(x, v);
    auto [it, fresh] = d.w_.emplace(m, p);
    if (!fresh) throw Error("dist", "duplicate value in sample set");
  }
  return d;
}

Dist Dist::make(VarSet domain, std::map<RandMemory, Rat> weights) {
  Dist d;
  d.domain_ = std::move(domain);
  Rat total(0);
  Memory::Layout checked;  // one domain check per shared layout
  for (auto& [m, p] : weights) {
    if (p < 0) throw Error("dist", "negative weight");
    if (p == 0) continue;
    if (m.layout() != checked) {
      if (m.domain() != d.domain_)
        throw Error("dist", "support memory domain mismatch at " + m.str());
      checked = m.layout();
    }
    total += p;
    d.w_.emplace(m, p);
  }
  if (total != Rat(1)) throw Error("dist", "total weight " + rat_str(total) + " is not one");
  return d;
}

Rat Dist::mass_of(const std::function<bool(const RandMemory&)>& event) const {
  Rat total(0);
  for (const auto& [m, p] : w_)
    if (event(m)) total += p;
  return total;
}

Dist Dist::bind(const std::function<Dist(const RandMemory&)>& f) const {
  Dist out;
  bool first = true;
  for (const auto& [m, p] : w_) {
    Dist dm = f(m);
    if (first) {
      out.domain_ = dm.domain_;
      first = false;
    } else if (dm.domain_ != out.domain_) {
      throw Error("dist", "bind: continuation domains differ");
    }
    for (const auto& [m2, q] : dm.w_) out.w_[m2] += p * q;
  }
  if (first) throw Error("dist", "bind over empty distribution");
  return out;
}

Dist Dist::map(const std::function<RandMemory(const RandMemory&)>& f) const {
  return bind([&](const RandMemory& m) { return unit(f(m)); });
}

Dist Dist::product(const Dist& other) const {
  for (const auto& v : other.domain_)
    if (domain_.count(v)) throw Error("dist", "product domains overlap at " + v.str());
  Dist out;
  out.domain_ = domain_;
  out.domain_.insert(other.domain_.begin(), other.domain_.end());
  for (const auto& [m1, p1] : w_)
    for (const auto& [m2, p2] : other.w_) out.w_.emplace(m1.merge(m2), p1 * p2);
  return out;
}

Dist Dist::project(const VarSet& s) const {
  for (const auto& v : s)
    if (!domain_.count(v)) throw Error("dist", "projection target not in domain: " + v.str());
  Dist out;
  out.domain_ = s;
  // memories of one distribution share their layout; compute the index map once
  Memory::Layout in_layout;
  Memory::Layout out_layout;
  std::vector<size_t> ix;
  for (const auto& [m, p] : w_) {
    if (m.layout() != in_layout) {
      in_layout = m.layout();
      auto keys = std::make_shared<std::vector<VarId>>();
      ix.clear();
      for (size_t i = 0; i < in_layout->size(); ++i) {
        if (s.count((*in_layout)[i])) {
          keys->push_back((*in_layout)[i]);
          ix.push_back(i);
        }
      }
      out_layout = std::move(keys);
    }
    std::vector<Value> vals;
    vals.reserve(ix.size());
    for (size_t i : ix) vals.push_back(m.values()[i]);
    out.w_[Memory(out_layout, std::move(vals))] += p;
  }
  return out;
}

std::optional<Dist> Dist::condition(const std::function<bool(const RandMemory&)>& event) const {
  Rat z = mass_of(event);
  if (z == 0) return std::nullopt;
  Dist out;
  out.domain_ = domain_;
  for (const auto& [m, p] : w_)
    if (event(m)) out.w_.emplace(m, p / z);
  return out;
}

Dist Dist::convex(const Rat& rho, const std::optional<Dist>& mu1, const std::optional<Dist>& mu2) {
  if (rho < 0 || rho > 1) throw Error("dist", "convex weight outside [0,1]");
  if (rho == 1) {
    if (!mu1) throw Error("dist", "convex(1, undefined, _)");
    return *mu1;
  }
  if (rho == 0) {
    if (!mu2) throw Error("dist", "convex(0, _, undefined)");
    return *mu2;
  }
  if (!mu1 || !mu2) throw Error("dist", "convex with undefined argument and rho in (0,1)");
  if (mu1->domain_ != mu2->domain_) throw Error("dist", "convex domains differ");
  Dist out;
  out.domain_ = mu1->domain_;
  for (const auto& [m, p] : mu1->w_) out.w_[m] += rho * p;
  for (const auto& [m, p] : mu2->w_) out.w_[m] += (Rat(1) - rho) * p;
  return out;
}

bool Dist::is_independent(const VarSet& s1, const VarSet& s2) const {
  for (const auto& v : s1)
    if (s2.count(v)) throw Error("dist", "independence sets overlap at " + v.str());
  VarSet both = s1;
  both.insert(s2.begin(), s2.end());
  Dist joint = project(both);
  Dist p1 = project(s1);
  Dist p2 = project(s2);
  return joint == p1.product(p2);
}

std::string Dist::table() const {
  std::string s;
  for (const auto& [m, p] : w_) s += m.str() + " : " + rat_str(p) + "\n";
  return s;
}

std::string Configuration::str() const {
  return "store: " + store.str() + "\n" + dist.table();
}

}  // namespace psl::dist
