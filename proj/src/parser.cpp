#include <cctype>
#include <cmath>
#include <sstream>

#include "joinstate/syntax.hpp"

namespace joinstate {

std::string showPos(const Pos& p) { return std::to_string(p.line) + ":" + std::to_string(p.col); }

FrontendError::FrontendError(Pos p, const std::string& msg)
    : std::runtime_error(showPos(p) + ": " + msg), pos(p) {}

namespace {

enum class Tok { Ident, TypeName, Number, Sym, End };

struct Token {
  Tok kind;
  std::string text;
  Pos pos;
};

bool identStart(unsigned char c) { return std::isalpha(c) || c == '_'; }
bool identChar(unsigned char c) { return std::isalnum(c) || c == '_' || c == '\''; }

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  size_t i = 0;
  int line = 1, col = 1;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n && i < src.size(); ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else if ((static_cast<unsigned char>(src[i]) & 0xC0) != 0x80) {
        ++col;
      }
      ++i;
    }
  };
  auto starts = [&](const char* s) { return src.compare(i, std::char_traits<char>::length(s), s) == 0; };

  while (i < src.size()) {
    unsigned char c = src[i];
    if (std::isspace(c)) {
      advance(1);
      continue;
    }
    if (starts("//")) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Pos pos{line, col};
    if (identStart(c)) {
      size_t j = i;
      while (j < src.size() && identChar(src[j])) ++j;
      out.push_back({Tok::Ident, src.substr(i, j - i), pos});
      advance(j - i);
      continue;
    }
    if (c == '#') {
      size_t j = i + 1;
      while (j < src.size() && identChar(src[j])) ++j;
      if (j == i + 1) throw FrontendError(pos, "expected a type name after '#'");
      out.push_back({Tok::TypeName, src.substr(i, j - i), pos});
      advance(j - i);
      continue;
    }
    if (std::isdigit(c)) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      // `4.` is a float, `x.Get` is a call; a dot followed by a letter stays separate
      if (j < src.size() && src[j] == '.' && (j + 1 >= src.size() || !identStart(src[j + 1]))) {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      out.push_back({Tok::Number, src.substr(i, j - i), pos});
      advance(j - i);
      continue;
    }
    static const std::pair<const char*, const char*> syms[] = {
        {"\xE2\x96\xB6", "|>"}, {"|>", "|>"}, {"\xC2\xB7", "."}, {"\xC3\x97", "*"}, {"<=", "<="},
        {">=", ">="},           {"[", "["},   {"]", "]"},        {"(", "("},        {")", ")"},
        {",", ","},             {"&", "&"},   {"|", "|"},        {"!", "!"},        {".", "."},
        {":", ":"},             {"=", "="},   {"+", "+"},        {"-", "-"},        {"*", "*"},
        {"/", "/"},             {"%", "%"},   {"<", "<"},        {">", ">"}};
    bool matched = false;
    for (auto& [lit, name] : syms) {
      if (starts(lit)) {
        out.push_back({Tok::Sym, name, pos});
        advance(std::char_traits<char>::length(lit));
        matched = true;
        break;
      }
    }
    if (!matched) {
      size_t len = 1;
      if (c >= 0xC0) len = c >= 0xF0 ? 4 : c >= 0xE0 ? 3 : 2;
      throw FrontendError(pos, "unknown operator '" + src.substr(i, len) + "'");
    }
  }
  out.push_back({Tok::End, "", {line, col}});
  return out;
}

bool capitalized(const std::string& s) { return !s.empty() && std::isupper(static_cast<unsigned char>(s[0])); }

const char* const kKeywords[] = {"new", "in", "class", "let", "if", "then", "else", "done", "type", "and", "true", "false"};

bool isKeyword(const std::string& s) {
  for (auto k : kKeywords)
    if (s == k) return true;
  return false;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

  SurfaceProgram program() {
    SurfaceProgram p;
    while (isKw("type")) {
      next();
      p.decls.push_back(typeDecl());
      while (isKw("and")) {
        next();
        p.decls.push_back(typeDecl());
      }
    }
    if (peek().kind == Tok::End) {
      p.body = std::make_shared<Proc>();
      p.body->pos = peek().pos;
    } else {
      p.body = process();
    }
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return p;
  }

  TypePtr typeOnly() {
    auto t = type();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "' after type");
    return t;
  }

 private:
  std::vector<Token> t_;
  size_t i_ = 0;

  const Token& peek(size_t k = 0) const { return t_[std::min(i_ + k, t_.size() - 1)]; }
  Token next() { return t_[std::min(i_++, t_.size() - 1)]; }
  bool isSym(const std::string& s, size_t k = 0) const { return peek(k).kind == Tok::Sym && peek(k).text == s; }
  bool isKw(const std::string& s) const { return peek().kind == Tok::Ident && peek().text == s; }
  [[noreturn]] void fail(const std::string& msg) const { throw FrontendError(peek().pos, msg); }
  void expectSym(const std::string& s) {
    if (!isSym(s)) fail("expected '" + s + "'" + (peek().kind == Tok::End ? " before end of input" : " near '" + peek().text + "'"));
    next();
  }
  void expectKw(const std::string& s) {
    if (!isKw(s)) fail("expected '" + s + "'");
    next();
  }
  Name ident(const char* what) {
    if (peek().kind != Tok::Ident || isKeyword(peek().text)) fail(std::string("expected ") + what);
    Token tk = next();
    return Name{tk.text, -1, tk.pos};
  }

  TypeDecl typeDecl() {
    if (peek().kind != Tok::TypeName) fail("expected a type name");
    Token n = next();
    expectSym("=");
    return TypeDecl{n.text, type(), n.pos};
  }

  TypePtr type() {
    std::vector<TypePtr> parts{typeProd()};
    while (isSym("+")) {
      next();
      parts.push_back(typeProd());
    }
    return parts.size() == 1 ? parts[0] : sum(parts);
  }

  TypePtr typeProd() {
    std::vector<TypePtr> parts{typeUnary()};
    while (isSym(".")) {
      next();
      parts.push_back(typeUnary());
    }
    return parts.size() == 1 ? parts[0] : prod(parts);
  }

  TypePtr typeUnary() {
    if (isSym("*")) {
      next();
      return star(typeUnary());
    }
    if (isSym("(")) {
      next();
      auto t = type();
      expectSym(")");
      return t;
    }
    if (peek().kind == Tok::Number && (peek().text == "0" || peek().text == "1")) {
      return next().text == "0" ? zero() : one();
    }
    if (peek().kind == Tok::TypeName) return joinstate::ref(next().text);
    if (peek().kind == Tok::Ident && !isKeyword(peek().text)) {
      std::string tag = next().text;
      std::vector<TypePtr> args;
      if (isSym("(")) {
        next();
        if (!isSym(")")) {
          args.push_back(type());
          while (isSym(",")) {
            next();
            args.push_back(type());
          }
        }
        expectSym(")");
      }
      return msg(tag, args);
    }
    fail("expected a type");
  }

  // process := prefix ('&' prefix)*
  ProcPtr process() {
    Pos pos = peek().pos;
    std::vector<ProcPtr> parts{prefix()};
    while (isSym("&")) {
      next();
      parts.push_back(prefix());
    }
    if (parts.size() == 1) return parts[0];
    auto p = std::make_shared<Proc>();
    p->kind = ProcKind::Par;
    p->pos = pos;
    p->kids = std::move(parts);
    return p;
  }

  ProcPtr prefix() {
    auto p = std::make_shared<Proc>();
    p->pos = peek().pos;
    if (isKw("done")) {
      next();
      return p;
    }
    if (isSym("(")) {
      next();
      auto inner = process();
      expectSym(")");
      return inner;
    }
    if (isKw("new")) {
      next();
      p->kind = ProcKind::New;
      p->name = ident("an object name");
      if (isSym(":")) {
        next();
        p->type = type();
      }
      p->rules = rules();
      expectKw("in");
      p->kids.push_back(process());
      return p;
    }
    if (isKw("class")) {
      next();
      p->kind = ProcKind::Class;
      p->name = ident("a class name");
      p->rules = rules();
      if (isKw("in")) next();
      if (startsProcess()) {
        p->kids.push_back(process());
      } else {
        auto d = std::make_shared<Proc>();
        d->pos = peek().pos;
        p->kids.push_back(d);
      }
      return p;
    }
    if (isKw("let")) {
      next();
      p->kind = ProcKind::Let;
      p->letVars.push_back(ident("a variable"));
      while (isSym(",")) {
        next();
        p->letVars.push_back(ident("a variable"));
      }
      expectSym("=");
      p->expr = expr();
      expectKw("in");
      p->kids.push_back(process());
      return p;
    }
    if (isKw("if")) {
      next();
      p->kind = ProcKind::If;
      p->expr = expr();
      expectKw("then");
      p->kids.push_back(process());
      expectKw("else");
      p->kids.push_back(process());
      return p;
    }
    // send
    p->kind = ProcKind::Send;
    p->name = ident("a process");
    expectSym("!");
    if (isSym("(")) {
      next();
      molecule(p->msgs);
      expectSym(")");
    } else {
      molecule(p->msgs);
    }
    return p;
  }

  bool startsProcess() const {
    if (peek().kind == Tok::End || isSym("]") || isSym("|")) return false;
    return true;
  }

  // A '&' continues the molecule only when followed by a bare tag.
  bool moleculeContinues() const {
    if (!isSym("&")) return false;
    const Token& a = peek(1);
    if (a.kind != Tok::Ident || !capitalized(a.text)) return false;
    const Token& b = peek(2);
    return !(b.kind == Tok::Sym && (b.text == "!" || b.text == "."));
  }

  void molecule(std::vector<Message>& out) {
    out.push_back(message());
    while (moleculeContinues()) {
      next();
      out.push_back(message());
    }
  }

  Message message() {
    Message m;
    m.pos = peek().pos;
    if (peek().kind != Tok::Ident || !capitalized(peek().text)) fail("expected a message tag");
    m.tag = next().text;
    if (isSym("(")) {
      next();
      if (!isSym(")")) {
        m.args.push_back(expr());
        while (isSym(",")) {
          next();
          m.args.push_back(expr());
        }
      }
      expectSym(")");
    }
    return m;
  }

  std::vector<Rule> rules() {
    expectSym("[");
    std::vector<Rule> out;
    out.push_back(rule());
    while (isSym("|")) {
      next();
      out.push_back(rule());
    }
    expectSym("]");
    return out;
  }

  Rule rule() {
    Rule r;
    r.pos = peek().pos;
    r.pattern.push_back(patMsg());
    while (isSym("&")) {
      next();
      r.pattern.push_back(patMsg());
    }
    expectSym("|>");
    r.body = process();
    return r;
  }

  PatMsg patMsg() {
    PatMsg m;
    m.pos = peek().pos;
    if (peek().kind != Tok::Ident || !capitalized(peek().text)) fail("expected a pattern message");
    m.tag = next().text;
    if (isSym("(")) {
      next();
      if (!isSym(")")) {
        m.vars.push_back(ident("a pattern variable"));
        while (isSym(",")) {
          next();
          m.vars.push_back(ident("a pattern variable"));
        }
      }
      expectSym(")");
    }
    return m;
  }

  ExprPtr mk(ExprKind k, Pos pos) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->pos = pos;
    return e;
  }

  ExprPtr expr() {
    auto lhs = additive();
    for (const char* op : {"=", "<", ">", "<=", ">="}) {
      if (isSym(op)) {
        Pos pos = next().pos;
        auto e = mk(ExprKind::Binary, pos);
        e->op = op;
        e->kids = {lhs, additive()};
        return e;
      }
    }
    return lhs;
  }

  ExprPtr additive() {
    auto lhs = multiplicative();
    while (isSym("+") || isSym("-")) {
      Token op = next();
      auto e = mk(ExprKind::Binary, op.pos);
      e->op = op.text;
      e->kids = {lhs, multiplicative()};
      lhs = e;
    }
    return lhs;
  }

  ExprPtr multiplicative() {
    auto lhs = unary();
    while (isSym("*") || isSym("/") || isSym("%")) {
      Token op = next();
      auto e = mk(ExprKind::Binary, op.pos);
      e->op = op.text;
      e->kids = {lhs, unary()};
      lhs = e;
    }
    return lhs;
  }

  ExprPtr unary() {
    if (isSym("-")) {
      Pos pos = next().pos;
      auto e = mk(ExprKind::Neg, pos);
      e->kids = {unary()};
      return e;
    }
    return primary();
  }

  ExprPtr primary() {
    Pos pos = peek().pos;
    if (peek().kind == Tok::Number) {
      auto e = mk(ExprKind::Num, pos);
      e->num = std::stod(next().text);
      return e;
    }
    if (isKw("true") || isKw("false")) {
      auto e = mk(ExprKind::Bool, pos);
      e->boolean = next().text == "true";
      return e;
    }
    if (isSym("(")) {
      next();
      auto e = expr();
      expectSym(")");
      return e;
    }
    if (isSym("[")) {
      auto e = mk(ExprKind::Block, pos);
      e->rules = rules();
      return e;
    }
    Name n = ident("an expression");
    if (isSym(".")) {
      next();
      auto e = mk(ExprKind::Call, pos);
      e->var = n;
      if (peek().kind != Tok::Ident || !capitalized(peek().text)) fail("expected a method tag after '.'");
      e->op = next().text;
      if (isSym("(")) {
        next();
        if (!isSym(")")) {
          e->kids.push_back(expr());
          while (isSym(",")) {
            next();
            e->kids.push_back(expr());
          }
        }
        expectSym(")");
      }
      return e;
    }
    auto e = mk(ExprKind::Var, pos);
    e->var = n;
    return e;
  }
};

std::string formatNum(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15) {
    std::ostringstream s;
    s << static_cast<long long>(v);
    return s.str();
  }
  std::ostringstream s;
  s.precision(17);
  s << v;
  std::string out = s.str();
  if (out.find('.') == std::string::npos && out.find('e') == std::string::npos) out += ".";
  return out;
}

int precOf(const std::string& op) {
  if (op == "=" || op == "<" || op == ">" || op == "<=" || op == ">=") return 1;
  if (op == "+" || op == "-") return 2;
  return 3;
}

std::string exprPrec(const ExprPtr& e, int prec);
std::string printRules(const std::vector<Rule>& rules);

std::string callText(const ExprPtr& e) {
  std::string s = e->var.text + "." + e->op;
  if (!e->kids.empty()) {
    s += "(";
    for (size_t i = 0; i < e->kids.size(); ++i) s += (i ? ", " : "") + exprPrec(e->kids[i], 0);
    s += ")";
  }
  return s;
}

std::string exprPrec(const ExprPtr& e, int prec) {
  switch (e->kind) {
    case ExprKind::Var: return e->var.text;
    case ExprKind::Num: return e->num < 0 ? "(" + formatNum(e->num) + ")" : formatNum(e->num);
    case ExprKind::Bool: return e->boolean ? "true" : "false";
    case ExprKind::Neg: return "-" + exprPrec(e->kids[0], 4);
    case ExprKind::Call: return callText(e);
    case ExprKind::Block: return printRules(e->rules);
    case ExprKind::Binary: {
      int p = precOf(e->op);
      // left-associative: right operand needs strictly higher precedence
      std::string s = exprPrec(e->kids[0], p) + " " + e->op + " " + exprPrec(e->kids[1], p + 1);
      return p < prec ? "(" + s + ")" : s;
    }
  }
  return "?";
}

std::string printPrec(const ProcPtr& p, bool nested);

std::string printRules(const std::vector<Rule>& rules) {
  std::string s = "[ ";
  for (size_t i = 0; i < rules.size(); ++i) {
    if (i) s += " | ";
    for (size_t k = 0; k < rules[i].pattern.size(); ++k) {
      auto& m = rules[i].pattern[k];
      s += (k ? " & " : "") + m.tag;
      if (!m.vars.empty()) {
        s += "(";
        for (size_t j = 0; j < m.vars.size(); ++j) s += (j ? ", " : "") + m.vars[j].text;
        s += ")";
      }
    }
    s += " |> " + printPrec(rules[i].body, false);
  }
  return s + " ]";
}

// nested: the process sits inside a parallel and must not swallow siblings
std::string printPrec(const ProcPtr& p, bool nested) {
  auto wrap = [&](const std::string& s) { return nested ? "(" + s + ")" : s; };
  switch (p->kind) {
    case ProcKind::Done: return "done";
    case ProcKind::Send: {
      std::string s = p->name.text + "!";
      for (size_t i = 0; i < p->msgs.size(); ++i) {
        auto& m = p->msgs[i];
        s += (i ? " & " : "") + m.tag;
        if (!m.args.empty()) {
          s += "(";
          for (size_t j = 0; j < m.args.size(); ++j) s += (j ? ", " : "") + exprPrec(m.args[j], 0);
          s += ")";
        }
      }
      return s;
    }
    case ProcKind::Par: {
      std::string s;
      for (size_t i = 0; i < p->kids.size(); ++i) s += (i ? " & " : "") + printPrec(p->kids[i], true);
      return wrap(s);
    }
    case ProcKind::New: {
      if (p->stateless && !p->type)
        return wrap("class " + p->name.text + " " + printRules(p->rules) + " in " + printPrec(p->kids[0], false));
      std::string s = "new " + p->name.text;
      if (p->type) s += " : " + show(p->type);
      return wrap(s + " " + printRules(p->rules) + " in " + printPrec(p->kids[0], false));
    }
    case ProcKind::Class:
      return wrap("class " + p->name.text + " " + printRules(p->rules) + " in " + printPrec(p->kids[0], false));
    case ProcKind::Let: {
      std::string s = "let ";
      for (size_t i = 0; i < p->letVars.size(); ++i) s += (i ? ", " : "") + p->letVars[i].text;
      return wrap(s + " = " + exprPrec(p->expr, 0) + " in " + printPrec(p->kids[0], false));
    }
    case ProcKind::If:
      return wrap("if " + exprPrec(p->expr, 0) + " then " + printPrec(p->kids[0], true) + " else " +
                  printPrec(p->kids[1], false));
  }
  return "?";
}

}  // namespace

SurfaceProgram parseProgram(const std::string& source) { return Parser(lex(source)).program(); }

TypePtr parseType(const std::string& source) { return Parser(lex(source)).typeOnly(); }

std::string printProcess(const ProcPtr& p) { return printPrec(p, false); }

std::string printExpr(const ExprPtr& e) { return exprPrec(e, 0); }

}  // namespace joinstate
