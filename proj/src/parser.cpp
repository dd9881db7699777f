#include <cctype>
#include <charconv>
#include <cmath>
#include <string>
#include <vector>

#include "dcplp/ast.hpp"
#include "dcplp/error.hpp"

namespace dcplp {

namespace {

struct Token {
  enum class Type { Atom, Var, Num, Punct, End, Eof } type = Type::Eof;
  std::string text;
  double value = 0.0;
  bool is_int = false;
  std::int64_t ival = 0;
  bool quoted = false;
  int line = 1;
  int col = 1;
};

const char* kPuncts[] = {":-", "::", "=:=", "=\\=", "=<", ">=", "\\+", "<", ">", "+", "-", "*",
                         "/", "(", ")", "[", "]", ",", ";", ":", "~"};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.line = line_;
      t.col = col_;
      if (pos_ >= src_.size()) {
        t.type = Token::Type::Eof;
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (c == '.' && end_dot()) {
        advance(1);
        t.type = Token::Type::End;
        t.text = ".";
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        lex_number(t);
      } else if (std::islower(static_cast<unsigned char>(c))) {
        t.type = Token::Type::Atom;
        t.text = ident();
      } else if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
        t.type = Token::Type::Var;
        t.text = ident();
      } else if (c == '\'') {
        t.type = Token::Type::Atom;
        t.quoted = true;
        t.text = quoted();
      } else {
        bool found = false;
        for (const char* p : kPuncts) {
          std::string_view sv(p);
          if (src_.substr(pos_, sv.size()) == sv) {
            t.type = Token::Type::Punct;
            t.text = std::string(sv);
            advance(sv.size());
            found = true;
            break;
          }
        }
        if (!found)
          throw Error(Errc::Syntax, "unexpected character '" + std::string(1, c) + "'", t.line, t.col);
      }
      out.push_back(t);
    }
  }

 private:
  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance(1);
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance(1);
      } else {
        break;
      }
    }
  }

  bool end_dot() const {
    if (pos_ + 1 >= src_.size()) return true;
    char n = src_[pos_ + 1];
    return std::isspace(static_cast<unsigned char>(n)) || n == '%';
  }

  std::string ident() {
    std::size_t b = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      advance(1);
    return std::string(src_.substr(b, pos_ - b));
  }

  std::string quoted() {
    int l = line_, c = col_;
    advance(1);
    std::string s;
    while (pos_ < src_.size() && src_[pos_] != '\'') {
      if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) advance(1);
      s += src_[pos_];
      advance(1);
    }
    if (pos_ >= src_.size()) throw Error(Errc::Syntax, "unterminated quoted atom", l, c);
    advance(1);
    return s;
  }

  void lex_number(Token& t) {
    std::size_t b = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance(1);
    };
    digits();
    bool is_int = true;
    if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
        std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
      is_int = false;
      advance(1);
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      std::size_t k = pos_ + 1;
      if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
      if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
        is_int = false;
        advance(k - save);
        digits();
      }
    }
    std::string text(src_.substr(b, pos_ - b));
    t.type = Token::Type::Num;
    t.text = text;
    t.is_int = is_int;
    if (is_int) {
      auto r = std::from_chars(text.data(), text.data() + text.size(), t.ival);
      if (r.ec != std::errc()) throw Error(Errc::Syntax, "integer literal out of range", t.line, t.col);
      t.value = static_cast<double>(t.ival);
    } else {
      auto r = std::from_chars(text.data(), text.data() + text.size(), t.value);
      if (r.ec != std::errc() || !std::isfinite(t.value))
        throw Error(Errc::Syntax, "invalid number literal", t.line, t.col);
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct OpInfo {
  int prec;
  enum Assoc { XFX, XFY, YFX } assoc;
};

std::optional<OpInfo> infix(const Token& t) {
  if (t.type != Token::Type::Punct) return std::nullopt;
  const auto& s = t.text;
  if (s == "<" || s == ">" || s == "=<" || s == ">=" || s == "=:=" || s == "=\\=")
    return OpInfo{700, OpInfo::XFX};
  if (s == "+" || s == "-") return OpInfo{500, OpInfo::YFX};
  if (s == "*" || s == "/") return OpInfo{400, OpInfo::YFX};
  if (s == ":") return OpInfo{650, OpInfo::XFY};
  return std::nullopt;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program program() {
    Program p;
    while (peek().type != Token::Type::Eof) statement(p);
    return p;
  }

  Term single_term() {
    Term t = expr(1200);
    if (peek().type == Token::Type::End) next();
    if (peek().type != Token::Type::Eof) fail({"end of input"});
    return t;
  }

  Term expr(int max_prec) {
    int left_prec = 0;
    Term left = primary(left_prec);
    for (;;) {
      auto op = infix(peek());
      if (!op || op->prec > max_prec) break;
      if (op->assoc == OpInfo::XFX || op->assoc == OpInfo::XFY) {
        if (left_prec >= op->prec) break;
      } else if (left_prec > op->prec) {
        break;
      }
      std::string name = next().text;
      int rmax = op->assoc == OpInfo::XFY ? op->prec : op->prec - 1;
      Term right = expr(rmax);
      if (name == "/" && left.is_num() && left.is_int && left.den == 0 && right.is_num() &&
          right.is_int && right.den == 0) {
        if (right.num == 0) fail_at(toks_[pos_ - 1], "division by zero in rational literal");
        left = make_rational(left.num, right.num);
      } else {
        left = make_compound(name, {std::move(left), std::move(right)});
      }
      left_prec = op->prec;
    }
    return left;
  }

 private:
  const Token& peek(std::size_t k = 0) const {
    std::size_t i = std::min(pos_ + k, toks_.size() - 1);
    return toks_[i];
  }
  Token next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  bool is_punct(const Token& t, const char* s) const {
    return t.type == Token::Type::Punct && t.text == s;
  }

  [[noreturn]] void fail(std::initializer_list<const char*> expected) {
    const Token& t = peek();
    std::string msg = "expected one of {";
    bool first = true;
    for (const char* e : expected) {
      if (!first) msg += ", ";
      msg += e;
      first = false;
    }
    msg += "} but found ";
    msg += t.type == Token::Type::Eof ? "end of input" : "'" + t.text + "'";
    throw Error(Errc::Syntax, msg, t.line, t.col);
  }

  [[noreturn]] void fail_at(const Token& t, const std::string& msg) {
    throw Error(Errc::Syntax, msg, t.line, t.col);
  }

  void expect(const char* p) {
    if (!is_punct(peek(), p)) fail({p});
    next();
  }

  Term primary(int& prec) {
    prec = 0;
    const Token& t = peek();
    switch (t.type) {
      case Token::Type::Num: {
        Token n = next();
        return n.is_int ? make_int(n.ival) : make_num(n.value);
      }
      case Token::Type::Var: {
        Token v = next();
        if (v.text == "_") return make_var("_G" + std::to_string(anon_++));
        return make_var(v.text);
      }
      case Token::Type::Atom: {
        Token a = next();
        if (is_punct(peek(), "(")) {
          next();
          std::vector<Term> args;
          args.push_back(expr(999));
          while (is_punct(peek(), ",")) {
            next();
            args.push_back(expr(999));
          }
          expect(")");
          return make_compound(a.text, std::move(args));
        }
        return make_const(a.text);
      }
      case Token::Type::Punct: {
        if (t.text == "(") {
          next();
          Term inner = expr(1200);
          expect(")");
          return inner;
        }
        if (t.text == "[") {
          next();
          std::vector<Term> items;
          if (!is_punct(peek(), "]")) {
            items.push_back(expr(999));
            while (is_punct(peek(), ",")) {
              next();
              items.push_back(expr(999));
            }
          }
          expect("]");
          return make_list(std::move(items));
        }
        if (t.text == "-") {
          next();
          int dummy = 0;
          Term operand = primary(dummy);
          if (dummy > 200) fail({"operand"});
          prec = 200;
          if (operand.is_num() && operand.den == 0) {
            if (operand.is_int) return make_int(-operand.num);
            return make_num(-operand.value);
          }
          return make_compound("-", {std::move(operand)});
        }
        break;
      }
      default:
        break;
    }
    fail({"term"});
  }

  Literal literal() {
    Literal l;
    const Token& t = peek();
    if ((t.type == Token::Type::Atom && t.text == "not" && !t.quoted) || is_punct(t, "\\+")) {
      next();
      l.negated = true;
    }
    Token start = peek();
    l.atom = expr(700);
    if (l.atom.is_num() || l.atom.is_var() || l.atom.is_list() || is_arith_functor(l.atom) ||
        (l.atom.is_compound() && l.atom.name == ":"))
      fail_at(start, "expected a literal");
    return l;
  }

  std::vector<Literal> body() {
    std::vector<Literal> b;
    for (;;) {
      Literal l = literal();
      if (!(l.atom.is_const() && l.atom.name == "true" && !l.negated)) b.push_back(std::move(l));
      if (!is_punct(peek(), ",")) break;
      next();
    }
    return b;
  }

  void check_atom_head(const Term& h, const Token& at) {
    if (h.is_num() || h.is_var() || h.is_list() || is_arith_functor(h) ||
        (h.is_compound() && h.name == ":"))
      fail_at(at, "expected an atom in clause head");
    if (h.is_compound() && (h.name == "delta_interval" || is_dist_functor_name(h.name)))
      throw Error(Errc::ReservedHead, "reserved predicate in clause head: " + indicator(h), at.line, at.col);
  }

  bool directive(Program& p) {
    const Token& t = peek();
    if (t.type != Token::Type::Atom || t.quoted || !is_punct(peek(1), "(")) return false;
    if (t.text != "query" && t.text != "evidence" && t.text != "observation") return false;
    Token at = t;
    Term d = expr(999);
    if (peek().type != Token::Type::End) fail({"."});
    next();
    if (d.name == "query" && d.args.size() == 1) {
      p.task.queries.push_back(d.args[0]);
    } else if (d.name == "evidence" && d.args.size() == 1) {
      p.task.evidence.emplace_back(d.args[0], true);
    } else if (d.name == "evidence" && d.args.size() == 2 && d.args[1].is_const() &&
               (d.args[1].name == "true" || d.args[1].name == "false")) {
      p.task.evidence.emplace_back(d.args[0], d.args[1].name == "true");
    } else if (d.name == "observation" && d.args.size() == 2 && d.args[1].is_num()) {
      p.task.observations.emplace_back(d.args[0], d.args[1].value);
    } else {
      fail_at(at, "malformed " + d.name + " directive");
    }
    return true;
  }

  void statement(Program& p) {
    if (directive(p)) return;
    Statement st;
    Token start = peek();
    st.line = start.line;
    Term first = expr(699);
    if (is_punct(peek(), "::")) {
      Term prob = std::move(first);
      for (;;) {
        expect("::");
        Token at = peek();
        Term atom = expr(699);
        check_atom_head(atom, at);
        st.choices.push_back({std::move(prob), std::move(atom)});
        if (!is_punct(peek(), ";")) break;
        next();
        prob = expr(699);
      }
      if (is_punct(peek(), ":-")) {
        next();
        st.body = body();
      }
      st.kind = st.choices.size() == 1 && st.body.empty() ? StmtKind::ProbFact
                                                          : StmtKind::AnnotatedDisjunction;
    } else if (is_punct(peek(), "~")) {
      next();
      if (first.is_num() || first.is_var() || first.is_list() || is_arith_functor(first))
        fail_at(start, "expected a random term before '~'");
      st.head = std::move(first);
      st.dist = expr(699);
      if (is_punct(peek(), ":-")) {
        next();
        st.body = body();
      }
      st.kind = st.body.empty() ? StmtKind::DistFact : StmtKind::DistClause;
    } else {
      if (infix(peek()) && infix(peek())->prec == 700)
        throw Error(Errc::ReservedHead, "comparison used as clause head", start.line, start.col);
      check_atom_head(first, start);
      st.head = std::move(first);
      if (is_punct(peek(), ":-")) {
        next();
        st.body = body();
      }
      st.kind = st.body.empty() ? StmtKind::Fact : StmtKind::NormalClause;
    }
    if (peek().type != Token::Type::End) {
      if (st.kind == StmtKind::Fact || st.kind == StmtKind::NormalClause)
        fail({".", ":-", "::", "~"});
      fail({"."});
    }
    next();
    p.statements.push_back(std::move(st));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int anon_ = 0;
};

}  // namespace

Program parse_program(std::string_view text) {
  Parser parser(Lexer(text).run());
  return parser.program();
}

Term parse_term(std::string_view text) {
  Parser parser(Lexer(text).run());
  return parser.single_term();
}

std::pair<Term, bool> parse_evidence_flag(std::string_view text) {
  auto eq = text.rfind('=');
  if (eq != std::string_view::npos && eq > 0 && text[eq - 1] != '=' && text[eq - 1] != ':' &&
      text[eq - 1] != '\\') {
    std::string_view val = text.substr(eq + 1);
    while (!val.empty() && std::isspace(static_cast<unsigned char>(val.front()))) val.remove_prefix(1);
    while (!val.empty() && std::isspace(static_cast<unsigned char>(val.back()))) val.remove_suffix(1);
    if (val == "true" || val == "false") return {parse_term(text.substr(0, eq)), val == "true"};
    throw Error(Errc::Usage, "evidence value must be true or false: " + std::string(text));
  }
  return {parse_term(text), true};
}

std::pair<Term, double> parse_observation_flag(std::string_view text) {
  auto eq = text.rfind('=');
  if (eq == std::string_view::npos || eq == 0)
    throw Error(Errc::Usage, "observation must have the form term=value: " + std::string(text));
  Term value = parse_term(text.substr(eq + 1));
  if (!value.is_num())
    throw Error(Errc::Usage, "observation value must be a number: " + std::string(text));
  return {parse_term(text.substr(0, eq)), value.value};
}

}  // namespace dcplp
