#include "psl/parser.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <cstring>

namespace psl::lang {

namespace {

enum class Tok {
  End, Ident, Int, BitLit, AddrLit,
  LParen, RParen, LBrack, RBrack, LBrace, RBrace,
  Comma, Semi, Colon, Dot, DotDot,
  Assign, SampleArrow, Eq, Ne, Le, Lt, Gt, Caret, Plus, Minus, Star, Slash2 /* \ */,
  AmpAmp, PipePipe, Bang, PlusPlus, ColonColon,
  FAnd, FOr, FImp, FWand, Tilde,
};

struct Token {
  Tok t = Tok::End;
  std::string s;
  long n = 0;
  SrcLoc loc;
};

struct Lexer {
  std::string src;
  size_t i = 0;
  int line = 1, col = 1;
  std::vector<Token> toks;

  explicit Lexer(std::string text) : src(std::move(text)) { run(); }

  [[noreturn]] void fail(const std::string& m) { throw Error("syntax", m, {line, col}); }

  void adv(size_t n = 1) {
    for (size_t k = 0; k < n && i < src.size(); ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  }

  bool at(const char* s) const {
    size_t n = strlen(s);
    return src.compare(i, n, s) == 0;
  }

  void push(Tok t, std::string s = "", long n = 0) { toks.push_back({t, std::move(s), n, {line, col}}); }

  void run() {
    // unicode operator aliases
    struct Alias { const char* u; const char* a; };
    static const Alias aliases[] = {
        {"⊕", "^"}, {"⊛", "*"}, {"∼", "~"}, {"→", "->"},
        {"⊸", "-*"}, {"≤", "<="}, {"∧", "/\\"}, {"∨", "\\/"},
        {"⊤", "T"}, {"⊥", "F"},
    };
    std::string out;
    out.reserve(src.size());
    for (size_t k = 0; k < src.size();) {
      bool hit = false;
      for (const auto& al : aliases) {
        size_t n = strlen(al.u);
        if (src.compare(k, n, al.u) == 0) {
          out += al.a;
          out += ' ';
          k += n;
          hit = true;
          break;
        }
      }
      if (!hit) out += src[k++];
    }
    src = std::move(out);

    while (i < src.size()) {
      char c = src[i];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        adv();
        continue;
      }
      if (at("//") || c == '#') {
        while (i < src.size() && src[i] != '\n') adv();
        continue;
      }
      if (isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t j = i;
        while (j < src.size() && (isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
        push(Tok::Ident, src.substr(i, j - i));
        adv(j - i);
        continue;
      }
      if (isdigit(static_cast<unsigned char>(c))) {
        size_t j = i;
        while (j < src.size() && isdigit(static_cast<unsigned char>(src[j]))) ++j;
        push(Tok::Int, src.substr(i, j - i), std::strtol(src.substr(i, j - i).c_str(), nullptr, 10));
        adv(j - i);
        continue;
      }
      if (c == '"') {
        size_t j = i + 1;
        std::string bits;
        while (j < src.size() && src[j] != '"') {
          if (src[j] != '0' && src[j] != '1') fail("bitstring literal may contain only 0/1");
          bits += src[j++];
        }
        if (j >= src.size()) fail("unterminated bitstring literal");
        push(Tok::BitLit, bits);
        adv(j - i + 1);
        continue;
      }
      if (c == '@') {
        size_t j = i + 1;
        std::string bits;
        while (j < src.size() && (src[j] == '0' || src[j] == '1')) bits += src[j++];
        push(Tok::AddrLit, bits);
        adv(j - i);
        continue;
      }
      struct Sym { const char* s; Tok t; };
      static const Sym syms[] = {
          {"<-$", Tok::SampleArrow}, {":=", Tok::Assign}, {"..", Tok::DotDot},
          {"/\\", Tok::FAnd}, {"\\/", Tok::FOr}, {"->", Tok::FImp}, {"-*", Tok::FWand},
          {"!=", Tok::Ne}, {"<=", Tok::Le}, {"&&", Tok::AmpAmp}, {"||", Tok::PipePipe},
          {"++", Tok::PlusPlus}, {"::", Tok::ColonColon},
          {"(", Tok::LParen}, {")", Tok::RParen}, {"[", Tok::LBrack}, {"]", Tok::RBrack},
          {"{", Tok::LBrace}, {"}", Tok::RBrace}, {",", Tok::Comma}, {";", Tok::Semi},
          {":", Tok::Colon}, {".", Tok::Dot}, {"=", Tok::Eq}, {"<", Tok::Lt}, {">", Tok::Gt},
          {"^", Tok::Caret}, {"+", Tok::Plus}, {"-", Tok::Minus}, {"*", Tok::Star},
          {"~", Tok::Tilde}, {"!", Tok::Bang}, {"\\", Tok::Slash2},
      };
      bool matched = false;
      for (const auto& sy : syms) {
        if (at(sy.s)) {
          push(sy.t, sy.s);
          adv(strlen(sy.s));
          matched = true;
          break;
        }
      }
      if (!matched) fail(std::string("unexpected character '") + c + "'");
    }
    push(Tok::End);
  }
};

struct Parser {
  std::vector<Token> toks;
  size_t p = 0;

  explicit Parser(const std::string& text) : toks(Lexer(text).toks) {}

  const Token& peek(size_t k = 0) const { return toks[std::min(p + k, toks.size() - 1)]; }
  Token next() { return toks[std::min(p++, toks.size() - 1)]; }
  bool is(Tok t, size_t k = 0) const { return peek(k).t == t; }
  bool is_kw(const char* s, size_t k = 0) const {
    return peek(k).t == Tok::Ident && peek(k).s == s;
  }
  [[noreturn]] void fail(const std::string& m) {
    throw Error("syntax", m + " (got '" + peek().s + "')", peek().loc);
  }
  Token expect(Tok t, const char* what) {
    if (!is(t)) fail(std::string("expected ") + what);
    return next();
  }
  bool accept(Tok t) {
    if (is(t)) {
      ++p;
      return true;
    }
    return false;
  }
  bool accept_kw(const char* s) {
    if (is_kw(s)) {
      ++p;
      return true;
    }
    return false;
  }
  std::string expect_ident() {
    if (!is(Tok::Ident)) fail("expected identifier");
    return next().s;
  }
  long expect_int() {
    if (!is(Tok::Int)) fail("expected integer");
    return next().n;
  }

  static bool is_keyword(const std::string& s) {
    static const char* kws[] = {"det",  "rand",  "begin", "end",   "skip", "if",   "then",
                                "else", "while", "do",    "for",   "to",   "in",   "bool",
                                "bitstr", "zmod", "nat",  "list",  "addr", "true", "false",
                                "tt",   "ff",    "lcp",   "head",  "split_reg", "split_path",
                                "bigand", "bigsep", "where", "U",   "D",    "T",    "F"};
    for (const char* k : kws)
      if (s == k) return true;
    return false;
  }

  // ---- types -------------------------------------------------------------

  DeclShapeP parse_shape() {
    auto leaf = [&](ValType t) {
      auto s = std::make_shared<DeclShape>();
      s->kind = DimKind::Leaf;
      s->leaf = std::move(t);
      return s;
    };
    DeclShapeP base;
    if (accept_kw("bool")) {
      base = leaf(ValType::boolean());
    } else if (accept_kw("bitstr")) {
      expect(Tok::LParen, "(");
      long n = expect_int();
      expect(Tok::RParen, ")");
      base = leaf(ValType::bitstr(static_cast<int>(n)));
    } else if (accept_kw("zmod")) {
      expect(Tok::LParen, "(");
      long q = expect_int();
      expect(Tok::RParen, ")");
      if (q < 2) fail("zmod modulus must be >= 2");
      base = leaf(ValType::zmod(q));
    } else if (accept_kw("nat")) {
      expect(Tok::LParen, "(");
      long b = expect_int();
      expect(Tok::RParen, ")");
      base = leaf(ValType::nat(b));
    } else if (accept_kw("list")) {
      expect(Tok::Lt, "<");
      DeclShapeP inner = parse_shape();
      ValType vt = shape_to_valtype(inner);
      expect(Tok::Gt, ">");
      base = leaf(ValType::list(std::move(vt)));
    } else if (is(Tok::LParen)) {
      next();
      auto s = std::make_shared<DeclShape>();
      s->kind = DimKind::Tuple;
      s->elems.push_back(parse_shape());
      while (accept(Tok::Comma)) s->elems.push_back(parse_shape());
      expect(Tok::RParen, ")");
      base = s;
    } else {
      fail("expected type");
    }
    // dimension suffixes
    while (is(Tok::LBrack)) {
      next();
      auto s = std::make_shared<DeclShape>();
      if (accept_kw("addr")) {
        expect(Tok::LParen, "(");
        long n = expect_int();
        expect(Tok::RParen, ")");
        s->kind = DimKind::Addr;
        s->addr_len = static_cast<int>(n);
      } else {
        long n = expect_int();
        s->kind = DimKind::Array;
        s->count = n;
      }
      expect(Tok::RBrack, "]");
      s->inner = base;
      base = s;
    }
    return base;
  }

  static ValType shape_to_valtype(const DeclShapeP& s) {
    switch (s->kind) {
      case DimKind::Leaf: return s->leaf;
      case DimKind::Tuple: {
        std::vector<ValType> ts;
        for (const auto& e : s->elems) ts.push_back(shape_to_valtype(e));
        return ValType::tuple(std::move(ts));
      }
      default: throw Error("syntax", "array type not allowed as a value type");
    }
  }

  // ---- expressions -------------------------------------------------------

  ExprP parse_expr_top() { return parse_or(); }

  ExprP parse_or() {
    ExprP e = parse_and();
    while (is(Tok::PipePipe)) {
      SrcLoc loc = next().loc;
      e = mk_bin(BOp::Or, e, parse_and(), loc);
    }
    return e;
  }
  ExprP parse_and() {
    ExprP e = parse_cmp();
    while (is(Tok::AmpAmp)) {
      SrcLoc loc = next().loc;
      e = mk_bin(BOp::And, e, parse_cmp(), loc);
    }
    return e;
  }
  ExprP parse_cmp() {
    ExprP e = parse_xor();
    while (is(Tok::Eq) || is(Tok::Ne) || is(Tok::Le) || is(Tok::Lt)) {
      Token t = next();
      BOp op = t.t == Tok::Eq ? BOp::Eq : t.t == Tok::Ne ? BOp::Ne : t.t == Tok::Le ? BOp::Le : BOp::Lt;
      e = mk_bin(op, e, parse_xor(), t.loc);
    }
    return e;
  }
  ExprP parse_xor() {
    ExprP e = parse_add();
    while (is(Tok::Caret)) {
      SrcLoc loc = next().loc;
      e = mk_bin(BOp::Xor, e, parse_add(), loc);
    }
    return e;
  }
  ExprP parse_add() {
    ExprP e = parse_mul();
    while (true) {
      if (is(Tok::Plus) || is(Tok::Minus) || is(Tok::PlusPlus)) {
        Token t = next();
        BOp op = t.t == Tok::Plus ? BOp::Add : t.t == Tok::Minus ? BOp::Sub : BOp::Concat;
        e = mk_bin(op, e, parse_mul(), t.loc);
      } else if (is(Tok::ColonColon)) {
        SrcLoc loc = next().loc;
        return mk_bin(BOp::Cons, e, parse_add(), loc);  // right associative
      } else {
        return e;
      }
    }
  }
  ExprP parse_mul() {
    ExprP e = parse_unary();
    while (is(Tok::Star)) {
      SrcLoc loc = next().loc;
      e = mk_bin(BOp::Mul, e, parse_unary(), loc);
    }
    return e;
  }
  ExprP parse_unary() {
    if (is(Tok::Bang)) {
      SrcLoc loc = next().loc;
      return mk_un(parse_unary(), loc);
    }
    return parse_postfix();
  }

  ExprP parse_postfix() {
    ExprP e = parse_primary();
    while (true) {
      if (is(Tok::LBrack)) {
        SrcLoc loc = peek().loc;
        next();
        // slice e[1..j] vs index e[i]
        if (is(Tok::Int) && peek().n == 1 && is(Tok::DotDot, 1)) {
          next();
          next();
          ExprP hi = parse_expr_top();
          expect(Tok::RBrack, "]");
          e = mk_node(EKind::Slice, {e, hi}, loc);
          continue;
        }
        ExprP ix;
        if (is(Tok::AddrLit)) {
          Token t = next();
          // address components appear only as storage indices; encode as a
          // Loc component carrying the raw address in base "@..."
          ix = mk_loc("@" + t.s, {}, t.loc);
        } else {
          ix = parse_expr_top();
        }
        expect(Tok::RBrack, "]");
        if (e->kind == EKind::Loc && !e->vid) {
          auto ne = std::make_shared<Expr>(*e);
          ne->comps.push_back({false, ix});
          e = ne;
        } else {
          e = mk_node(EKind::BitIndex, {e, ix}, loc);
        }
        continue;
      }
      if (is(Tok::Dot) && (is(Tok::Int, 1) || is(Tok::Ident, 1) || is(Tok::LParen, 1))) {
        SrcLoc loc = peek().loc;
        next();
        ExprP ix;
        long lit = -1;
        if (is(Tok::Int)) {
          lit = expect_int();
          ix = mk_lit(Value::of_nat(lit), loc);
        } else if (is(Tok::Ident) && !is_keyword(peek().s)) {
          ix = mk_loc(next().s, {}, loc);
        } else if (is(Tok::LParen)) {
          next();
          ix = parse_expr_top();
          expect(Tok::RParen, ")");
        } else {
          fail("expected field index");
        }
        if (e->kind == EKind::Loc && !e->vid) {
          auto ne = std::make_shared<Expr>(*e);
          ne->comps.push_back({true, ix});
          e = ne;
        } else if (lit >= 0) {
          e = mk_proj(e, static_cast<int>(lit), loc);
        } else {
          fail("projection from a tuple value needs a literal index");
        }
        continue;
      }
      break;
    }
    return e;
  }

  ExprP parse_primary() {
    SrcLoc loc = peek().loc;
    if (is(Tok::Int)) return mk_lit(Value::of_nat(next().n), loc);
    if (is(Tok::BitLit)) {
      Token t = next();
      uint64_t b = 0;
      for (char c : t.s) b = (b << 1) | static_cast<uint64_t>(c == '1');
      return mk_lit(Value::of_bits(static_cast<int>(t.s.size()), b), loc);
    }
    if (accept_kw("true") || accept_kw("tt")) return mk_lit(Value::of_bool(true), loc);
    if (accept_kw("false") || accept_kw("ff")) return mk_lit(Value::of_bool(false), loc);
    if (accept_kw("lcp")) {
      expect(Tok::LParen, "(");
      ExprP a = parse_expr_top();
      expect(Tok::Comma, ",");
      ExprP b = parse_expr_top();
      expect(Tok::RParen, ")");
      return mk_node(EKind::Lcp, {a, b}, loc);
    }
    if (accept_kw("head")) {
      expect(Tok::LParen, "(");
      ExprP a = parse_expr_top();
      expect(Tok::RParen, ")");
      return mk_node(EKind::Head, {a}, loc);
    }
    if (accept_kw("split_reg")) {
      expect(Tok::LParen, "(");
      ExprP a = parse_expr_top();
      expect(Tok::Comma, ",");
      ExprP b = parse_expr_top();
      expect(Tok::RParen, ")");
      return mk_node(EKind::SplitReg, {a, b}, loc);
    }
    if (accept_kw("split_path")) {
      expect(Tok::LParen, "(");
      ExprP a = parse_expr_top();
      expect(Tok::Comma, ",");
      ExprP b = parse_expr_top();
      expect(Tok::Comma, ",");
      ExprP c = parse_expr_top();
      expect(Tok::RParen, ")");
      return mk_node(EKind::SplitPath, {a, b, c}, loc);
    }
    if (is(Tok::LBrack) && is(Tok::RBrack, 1)) {
      next();
      next();
      return mk_lit(Value::of_list({}), loc);
    }
    if (is(Tok::LParen)) {
      next();
      ExprP e = parse_expr_top();
      if (is(Tok::Comma)) {
        std::vector<ExprP> es = {e};
        while (accept(Tok::Comma)) es.push_back(parse_expr_top());
        expect(Tok::RParen, ")");
        return mk_tuple(std::move(es), loc);
      }
      expect(Tok::RParen, ")");
      return e;
    }
    if (is(Tok::Ident) && !is_keyword(peek().s)) return mk_loc(next().s, {}, loc);
    fail("expected expression");
  }

  // ---- values (sample sets, uniform sets) ---------------------------------

  Value parse_value() {
    SrcLoc loc = peek().loc;
    if (is(Tok::Int)) return Value::of_nat(next().n);
    if (is(Tok::BitLit)) {
      Token t = next();
      uint64_t b = 0;
      for (char c : t.s) b = (b << 1) | static_cast<uint64_t>(c == '1');
      return Value::of_bits(static_cast<int>(t.s.size()), b);
    }
    if (accept_kw("true") || accept_kw("tt")) return Value::of_bool(true);
    if (accept_kw("false") || accept_kw("ff")) return Value::of_bool(false);
    if (is(Tok::LParen)) {
      next();
      std::vector<Value> vs;
      vs.push_back(parse_value());
      while (accept(Tok::Comma)) vs.push_back(parse_value());
      expect(Tok::RParen, ")");
      return Value::of_tuple(std::move(vs));
    }
    throw Error("syntax", "expected literal value", loc);
  }

  SampleSet parse_sset() {
    SampleSet s;
    if (accept_kw("bool")) {
      s.carrier = ValType::boolean();
    } else if (accept_kw("bitstr")) {
      expect(Tok::LParen, "(");
      long n = expect_int();
      expect(Tok::RParen, ")");
      s.carrier = ValType::bitstr(static_cast<int>(n));
    } else if (accept_kw("zmod")) {
      expect(Tok::LParen, "(");
      long q = expect_int();
      expect(Tok::RParen, ")");
      s.carrier = ValType::zmod(q);
    } else if (is(Tok::LBrace)) {
      // {0,1}^n or explicit value list
      if (is(Tok::Int, 1) && peek(1).n == 0 && is(Tok::Comma, 2) && is(Tok::Int, 3) &&
          peek(3).n == 1 && is(Tok::RBrace, 4) && is(Tok::Caret, 5)) {
        p += 6;
        long n = expect_int();
        s.carrier = ValType::bitstr(static_cast<int>(n));
      } else {
        next();
        s.values.push_back(parse_value());
        while (accept(Tok::Comma)) s.values.push_back(parse_value());
        expect(Tok::RBrace, "}");
      }
    } else {
      fail("expected sample set");
    }
    if (s.carrier) s.values = enumerate_carrier(*s.carrier);
    std::sort(s.values.begin(), s.values.end());
    s.values.erase(std::unique(s.values.begin(), s.values.end()), s.values.end());
    if (s.values.empty()) fail("sample set must be non-empty");
    return s;
  }

  // ---- statements ----------------------------------------------------------

  ExprP parse_lvalue() {
    if (!is(Tok::Ident) || is_keyword(peek().s)) fail("expected variable");
    ExprP e = parse_postfix();
    if (e->kind != EKind::Loc) fail("expected assignable location");
    return e;
  }

  CmdP parse_stmt() {
    SrcLoc loc = peek().loc;
    if (accept_kw("skip")) return mk_skip(loc);
    if (accept_kw("if")) {
      ExprP g = parse_expr_top();
      if (!accept_kw("then")) fail("expected then");
      CmdP t = parse_block();
      CmdP f = accept_kw("else") ? parse_block() : mk_skip(loc);
      return mk_cond(g, t, f, loc);
    }
    if (accept_kw("while")) {
      ExprP g = parse_expr_top();
      if (!accept_kw("do")) fail("expected do");
      return mk_while(g, parse_block(), loc);
    }
    if (accept_kw("for")) {
      std::string iv = expect_ident();
      expect(Tok::Eq, "=");
      ExprP lo = parse_expr_top();
      if (!accept_kw("to")) fail("expected to");
      ExprP hi = parse_expr_top();
      if (!accept_kw("do")) fail("expected do");
      return mk_dfor(iv, lo, hi, parse_block(), loc);
    }
    if (is(Tok::LParen)) {
      // (l1, l2, ...) := e
      next();
      std::vector<ExprP> ls;
      ls.push_back(parse_lvalue());
      while (accept(Tok::Comma)) ls.push_back(parse_lvalue());
      expect(Tok::RParen, ")");
      expect(Tok::Assign, ":=");
      return mk_tuple_assign(std::move(ls), parse_expr_top(), loc);
    }
    ExprP l = parse_lvalue();
    if (is(Tok::Comma)) {
      std::vector<ExprP> ls = {l};
      while (accept(Tok::Comma)) ls.push_back(parse_lvalue());
      expect(Tok::SampleArrow, "<-$");
      return mk_multi_sample(std::move(ls), parse_sset(), loc);
    }
    if (accept(Tok::SampleArrow)) return mk_sample(l, parse_sset(), loc);
    expect(Tok::Assign, ":=");
    return mk_assign(l, parse_expr_top(), loc);
  }

  bool stmt_starts() {
    if (is(Tok::LParen)) return true;
    if (!is(Tok::Ident)) return false;
    const std::string& s = peek().s;
    if (s == "end" || s == "else" || s == "then" || s == "to" || s == "do") return false;
    return s == "skip" || s == "if" || s == "while" || s == "for" || !is_keyword(s);
  }

  CmdP parse_seq() {
    std::vector<CmdP> cs;
    cs.push_back(parse_stmt());
    while (is(Tok::Semi)) {
      next();
      if (!stmt_starts()) break;  // trailing semicolon
      cs.push_back(parse_stmt());
    }
    CmdP out = cs.back();
    for (size_t k = cs.size() - 1; k-- > 0;) out = mk_seq(cs[k], out);
    return out;
  }

  CmdP parse_block() {
    if (accept(Tok::LBrace)) {
      CmdP c = parse_seq();
      expect(Tok::RBrace, "}");
      return c;
    }
    return parse_stmt();
  }

  Program parse_prog() {
    Program prog;
    while (is_kw("det") || is_kw("rand")) {
      VarKind k = peek().s == "det" ? VarKind::Det : VarKind::Rand;
      SrcLoc loc = next().loc;
      std::vector<std::string> names;
      names.push_back(expect_ident());
      while (accept(Tok::Comma)) names.push_back(expect_ident());
      expect(Tok::Colon, ":");
      DeclShapeP sh = parse_shape();
      expect(Tok::Semi, ";");
      for (const auto& n : names) {
        Decl d;
        d.kind = k;
        d.shape = sh;
        d.loc = loc;
        prog.add_decl(n, d);
      }
    }
    bool has_begin = accept_kw("begin");
    prog.body = parse_seq();
    if (has_begin && !accept_kw("end")) fail("expected end");
    if (!is(Tok::End)) fail("trailing input after program");
    return prog;
  }

  // ---- formulas ------------------------------------------------------------

  bi::FormP parse_formula_top() { return parse_f_imp(); }

  bi::FormP parse_f_imp() {
    bi::FormP l = parse_f_or();
    if (is(Tok::FImp)) {
      next();
      return bi::f_bin(bi::FKind::Imp, l, parse_f_imp());
    }
    if (is(Tok::FWand)) {
      next();
      return bi::f_bin(bi::FKind::SepImp, l, parse_f_imp());
    }
    return l;
  }
  bi::FormP parse_f_or() {
    bi::FormP l = parse_f_and();
    while (is(Tok::FOr)) {
      next();
      l = bi::f_bin(bi::FKind::Or, l, parse_f_and());
    }
    return l;
  }
  bi::FormP parse_f_and() {
    bi::FormP l = parse_f_sep();
    while (is(Tok::FAnd)) {
      next();
      l = bi::f_bin(bi::FKind::And, l, parse_f_sep());
    }
    return l;
  }
  bi::FormP parse_f_sep() {
    bi::FormP l = parse_f_atom();
    while (is(Tok::Star)) {
      next();
      l = bi::f_bin(bi::FKind::SepAnd, l, parse_f_atom());
    }
    return l;
  }

  bi::IndexRange parse_range() {
    bi::IndexRange r;
    expect(Tok::LBrack, "[");
    r.lo = parse_expr_top();
    expect(Tok::Comma, ",");
    r.hi = parse_expr_top();
    if (accept(Tok::RBrack)) {
      r.hi_closed = true;
    } else if (accept(Tok::RParen)) {
      r.hi_closed = false;
    } else {
      fail("expected ] or )");
    }
    if (accept(Tok::Slash2)) {
      expect(Tok::LBrace, "{");
      r.excl.push_back(parse_expr_top());
      while (accept(Tok::Comma)) r.excl.push_back(parse_expr_top());
      expect(Tok::RBrace, "}");
    }
    return r;
  }

  bi::FormP parse_f_atom() {
    SrcLoc loc = peek().loc;
    if (accept_kw("T")) return bi::f_top();
    if (accept_kw("F")) return bi::f_bot();
    if (is_kw("U")) {
      next();
      std::vector<Value> uset;
      if (accept(Tok::LBrace)) {
        uset.push_back(parse_value());
        while (accept(Tok::Comma)) uset.push_back(parse_value());
        expect(Tok::RBrace, "}");
      }
      expect(Tok::LBrack, "[");
      ExprP e = parse_expr_top();
      expect(Tok::RBrack, "]");
      return bi::f_unif(e, std::move(uset));
    }
    if (is_kw("D")) {
      next();
      expect(Tok::LBrack, "[");
      std::vector<ExprP> es;
      es.push_back(parse_expr_top());
      while (accept(Tok::Comma)) es.push_back(parse_expr_top());
      expect(Tok::RBrack, "]");
      bi::FormP f = bi::f_d(es[0]);
      for (size_t k = 1; k < es.size(); ++k) f = bi::f_bin(bi::FKind::SepAnd, f, bi::f_d(es[k]));
      return f;
    }
    if (is_kw("bigand") || is_kw("bigsep")) {
      bool isand = peek().s == "bigand";
      next();
      std::string iv = expect_ident();
      if (!accept_kw("in")) fail("expected in");
      bi::IndexRange r = parse_range();
      expect(Tok::Colon, ":");
      bi::FormP body = parse_f_atom();
      return bi::f_big(isand ? bi::FKind::BigAnd : bi::FKind::BigSep, iv, std::move(r), body);
    }
    if (is(Tok::LParen)) {
      // try a parenthesized formula; fall back to an expression comparison
      size_t save = p;
      try {
        next();
        bi::FormP f = parse_formula_top();
        expect(Tok::RParen, ")");
        if (is(Tok::Tilde) || is(Tok::Eq) || is(Tok::Le) || is(Tok::Lt) || is(Tok::Ne))
          throw Error("syntax", "backtrack");
        return f;
      } catch (const Error&) {
        p = save;
      }
    }
    // expression atom: e1 ~ e2 | e1 = e2 | e1 <= e2 | e1 < e2 | e1 != e2
    ExprP e1 = parse_xor();
    if (accept(Tok::Tilde)) return bi::f_sim(e1, parse_xor());
    if (is(Tok::Eq) || is(Tok::Le) || is(Tok::Lt) || is(Tok::Ne)) {
      Token t = next();
      BOp op = t.t == Tok::Eq ? BOp::Eq : t.t == Tok::Le ? BOp::Le : t.t == Tok::Lt ? BOp::Lt : BOp::Ne;
      return bi::f_atom(mk_bin(op, e1, parse_xor(), t.loc));
    }
    throw Error("syntax", "expected formula atom", loc);
  }
};

}  // namespace

bi::FormP parse_formula_text(const std::string& text) {
  Parser ps(text);
  bi::FormP f = ps.parse_formula_top();
  if (!ps.is(Tok::End)) ps.fail("trailing input after formula");
  return f;
}

Program parse_program(const std::string& text) {
  Parser ps(text);
  return ps.parse_prog();
}

ExprP parse_expr(const std::string& text) {
  Parser ps(text);
  ExprP e = ps.parse_expr_top();
  if (!ps.is(Tok::End)) ps.fail("trailing input after expression");
  return e;
}

CmdP parse_cmd(const std::string& text) {
  Parser ps(text);
  CmdP c = ps.parse_seq();
  if (!ps.is(Tok::End)) ps.fail("trailing input after command");
  return c;
}

SampleSet parse_sample_set(const std::string& text) {
  Parser ps(text);
  return ps.parse_sset();
}

}  // namespace psl::lang

namespace psl::bi {

FormP parse_formula(const std::string& text) { return lang::parse_formula_text(text); }

}  // namespace psl::bi
