#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace psl {

// Exact rational weights; gcd-normalized by construction so equality of
// distributions is structural equality.
using Rat = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

struct SrcLoc {
  int line = 0;
  int col = 0;
  std::string str() const {
    if (line == 0) return "";
    return std::to_string(line) + ":" + std::to_string(col);
  }
};

// Infrastructure failure (bad input file, syntax error, budget exceeded).
// Checker verdicts are values, not exceptions.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, std::string msg, SrcLoc loc = {})
      : std::runtime_error(loc.line ? kind + " at " + loc.str() + ": " + msg
                                    : kind + ": " + msg),
        kind_(std::move(kind)),
        loc_(loc) {}
  const std::string& kind() const { return kind_; }
  SrcLoc loc() const { return loc_; }

 private:
  std::string kind_;
  SrcLoc loc_;
};

inline std::string rat_str(const Rat& r) {
  std::string s = r.str();
  return s;
}

}  // namespace psl
