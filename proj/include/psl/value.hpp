#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "psl/common.hpp"

namespace psl::lang {

enum class TypeKind { Bool, BitStr, ZMod, Nat, Tuple, List };

// Value carriers are finite and declared: Bool, BitStr(n), ZMod(q), Nat
// bounded by `bound` (carrier 0..bound). Lists are not enumerable; they only
// appear as container state (ORAM buckets) and never in carrier enumeration.
struct ValType {
  TypeKind kind = TypeKind::Bool;
  int width = 0;     // BitStr; -1 means dynamic width (lcp/slice results)
  long modulus = 0;  // ZMod
  long bound = 0;    // Nat: carrier {0..bound}
  std::vector<ValType> elems;            // Tuple
  std::shared_ptr<const ValType> elem;   // List

  static ValType boolean() { return {TypeKind::Bool}; }
  static ValType bitstr(int n) {
    ValType t;
    t.kind = TypeKind::BitStr;
    t.width = n;
    return t;
  }
  static ValType zmod(long q) {
    ValType t;
    t.kind = TypeKind::ZMod;
    t.modulus = q;
    return t;
  }
  static ValType nat(long bound) {
    ValType t;
    t.kind = TypeKind::Nat;
    t.bound = bound;
    return t;
  }
  static ValType tuple(std::vector<ValType> ts) {
    ValType t;
    t.kind = TypeKind::Tuple;
    t.elems = std::move(ts);
    return t;
  }
  static ValType list(ValType e) {
    ValType t;
    t.kind = TypeKind::List;
    t.elem = std::make_shared<const ValType>(std::move(e));
    return t;
  }

  bool operator==(const ValType& o) const;
  std::string str() const;
};

struct Value;

struct Bits {
  int width = 0;
  uint64_t bits = 0;  // bit 1 (leftmost in the literal) is the high position
  auto operator<=>(const Bits&) const = default;
};

struct ZVal {
  long q = 0;
  long v = 0;
  auto operator<=>(const ZVal&) const = default;
};

struct TupleVal {
  std::vector<Value> elems;
};
struct ListVal {
  std::vector<Value> elems;
};

struct Value {
  std::variant<bool, Bits, ZVal, long, TupleVal, ListVal> v;

  Value() : v(false) {}
  static Value of_bool(bool b) { return Value{b}; }
  static Value of_bits(int w, uint64_t b) { return Value{Bits{w, b}}; }
  static Value of_z(long q, long x) {
    long m = x % q;
    if (m < 0) m += q;
    return Value{ZVal{q, m}};
  }
  static Value of_nat(long n) { return Value{n}; }
  static Value of_tuple(std::vector<Value> vs) { return Value{TupleVal{std::move(vs)}}; }
  static Value of_list(std::vector<Value> vs) { return Value{ListVal{std::move(vs)}}; }

  bool as_bool() const { return std::get<bool>(v); }
  const Bits& as_bits() const { return std::get<Bits>(v); }
  const ZVal& as_z() const { return std::get<ZVal>(v); }
  long as_nat() const { return std::get<long>(v); }
  const TupleVal& as_tuple() const { return std::get<TupleVal>(v); }
  const ListVal& as_list() const { return std::get<ListVal>(v); }
  bool is_tuple() const { return std::holds_alternative<TupleVal>(v); }
  bool is_list() const { return std::holds_alternative<ListVal>(v); }

  bool operator==(const Value& o) const;
  bool operator<(const Value& o) const;
  std::string str() const;

 private:
  explicit Value(std::variant<bool, Bits, ZVal, long, TupleVal, ListVal> x) : v(std::move(x)) {}
};

// Default value per type (all-zero); used to Dirac-initialize randomized
// variables that programs overwrite before reading.
Value default_value(const ValType& t);

// Carrier size; throws for list/dynamic types.
long carrier_size(const ValType& t);
std::vector<Value> enumerate_carrier(const ValType& t);

std::string bits_str(const Bits& b);

}  // namespace psl::lang
