#include "psl/value.hpp"

#include <algorithm>

namespace psl::lang {

bool ValType::operator==(const ValType& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case TypeKind::Bool: return true;
    case TypeKind::BitStr: return width == o.width;
    case TypeKind::ZMod: return modulus == o.modulus;
    case TypeKind::Nat: return bound == o.bound;
    case TypeKind::Tuple: return elems == o.elems;
    case TypeKind::List: return *elem == *o.elem;
  }
  return false;
}

std::string ValType::str() const {
  switch (kind) {
    case TypeKind::Bool: return "bool";
    case TypeKind::BitStr:
      return width < 0 ? "bitstr(?)" : "bitstr(" + std::to_string(width) + ")";
    case TypeKind::ZMod: return "zmod(" + std::to_string(modulus) + ")";
    case TypeKind::Nat: return "nat(" + std::to_string(bound) + ")";
    case TypeKind::Tuple: {
      std::string s = "(";
      for (size_t i = 0; i < elems.size(); ++i) {
        if (i) s += ",";
        s += elems[i].str();
      }
      return s + ")";
    }
    case TypeKind::List: return "list<" + elem->str() + ">";
  }
  return "?";
}

static int tag_of(const Value& x) { return static_cast<int>(x.v.index()); }

bool Value::operator==(const Value& o) const {
  if (v.index() != o.v.index()) return false;
  switch (v.index()) {
    case 0: return std::get<bool>(v) == std::get<bool>(o.v);
    case 1: return std::get<Bits>(v) == std::get<Bits>(o.v);
    case 2: return std::get<ZVal>(v) == std::get<ZVal>(o.v);
    case 3: return std::get<long>(v) == std::get<long>(o.v);
    case 4: return std::get<TupleVal>(v).elems == std::get<TupleVal>(o.v).elems;
    case 5: return std::get<ListVal>(v).elems == std::get<ListVal>(o.v).elems;
  }
  return false;
}

bool Value::operator<(const Value& o) const {
  if (tag_of(*this) != tag_of(o)) return tag_of(*this) < tag_of(o);
  switch (v.index()) {
    case 0: return std::get<bool>(v) < std::get<bool>(o.v);
    case 1: return std::get<Bits>(v) < std::get<Bits>(o.v);
    case 2: return std::get<ZVal>(v) < std::get<ZVal>(o.v);
    case 3: return std::get<long>(v) < std::get<long>(o.v);
    case 4: {
      const auto& a = std::get<TupleVal>(v).elems;
      const auto& b = std::get<TupleVal>(o.v).elems;
      return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    }
    case 5: {
      const auto& a = std::get<ListVal>(v).elems;
      const auto& b = std::get<ListVal>(o.v).elems;
      return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    }
  }
  return false;
}

std::string bits_str(const Bits& b) {
  std::string s;
  for (int i = 0; i < b.width; ++i) s += ((b.bits >> (b.width - 1 - i)) & 1) ? '1' : '0';
  return s;
}

std::string Value::str() const {
  switch (v.index()) {
    case 0: return as_bool() ? "tt" : "ff";
    case 1: return "\"" + bits_str(as_bits()) + "\"";
    case 2: return std::to_string(as_z().v);
    case 3: return std::to_string(as_nat());
    case 4: {
      std::string s = "(";
      const auto& es = as_tuple().elems;
      for (size_t i = 0; i < es.size(); ++i) {
        if (i) s += ",";
        s += es[i].str();
      }
      return s + ")";
    }
    case 5: {
      std::string s = "[";
      const auto& es = as_list().elems;
      for (size_t i = 0; i < es.size(); ++i) {
        if (i) s += ",";
        s += es[i].str();
      }
      return s + "]";
    }
  }
  return "?";
}

Value default_value(const ValType& t) {
  switch (t.kind) {
    case TypeKind::Bool: return Value::of_bool(false);
    case TypeKind::BitStr: return Value::of_bits(t.width < 0 ? 0 : t.width, 0);
    case TypeKind::ZMod: return Value::of_z(t.modulus, 0);
    case TypeKind::Nat: return Value::of_nat(0);
    case TypeKind::Tuple: {
      std::vector<Value> vs;
      for (const auto& e : t.elems) vs.push_back(default_value(e));
      return Value::of_tuple(std::move(vs));
    }
    case TypeKind::List: return Value::of_list({});
  }
  return Value::of_bool(false);
}

long carrier_size(const ValType& t) {
  switch (t.kind) {
    case TypeKind::Bool: return 2;
    case TypeKind::BitStr:
      if (t.width < 0) throw Error("carrier", "dynamic-width bitstring has no carrier");
      if (t.width > 30) throw Error("carrier", "bitstring carrier too large to enumerate");
      return 1L << t.width;
    case TypeKind::ZMod: return t.modulus;
    case TypeKind::Nat: return t.bound + 1;
    case TypeKind::Tuple: {
      long n = 1;
      for (const auto& e : t.elems) {
        n *= carrier_size(e);
        if (n > (1L << 40)) throw Error("carrier", "tuple carrier too large");
      }
      return n;
    }
    case TypeKind::List: throw Error("carrier", "list type has no finite carrier");
  }
  return 0;
}

std::vector<Value> enumerate_carrier(const ValType& t) {
  std::vector<Value> out;
  switch (t.kind) {
    case TypeKind::Bool:
      out = {Value::of_bool(false), Value::of_bool(true)};
      break;
    case TypeKind::BitStr: {
      long n = carrier_size(t);
      for (long i = 0; i < n; ++i) out.push_back(Value::of_bits(t.width, static_cast<uint64_t>(i)));
      break;
    }
    case TypeKind::ZMod:
      for (long i = 0; i < t.modulus; ++i) out.push_back(Value::of_z(t.modulus, i));
      break;
    case TypeKind::Nat:
      for (long i = 0; i <= t.bound; ++i) out.push_back(Value::of_nat(i));
      break;
    case TypeKind::Tuple: {
      std::vector<std::vector<Value>> parts;
      for (const auto& e : t.elems) parts.push_back(enumerate_carrier(e));
      std::vector<size_t> ix(parts.size(), 0);
      while (true) {
        std::vector<Value> vs;
        for (size_t i = 0; i < parts.size(); ++i) vs.push_back(parts[i][ix[i]]);
        out.push_back(Value::of_tuple(std::move(vs)));
        size_t k = parts.size();
        while (k > 0) {
          --k;
          if (++ix[k] < parts[k].size()) break;
          ix[k] = 0;
          if (k == 0) return out;
        }
        if (parts.empty()) break;
      }
      break;
    }
    case TypeKind::List: throw Error("carrier", "list type has no finite carrier");
  }
  return out;
}

}  // namespace psl::lang
