#include "fleet/logic/parser.hpp"

#include <cctype>
#include <optional>

#include "fleet/errors.hpp"

namespace fleet::logic {
namespace {

enum class Tok { Ident, True, Not, And, Or, Next, Until, Eventually, Always, LParen, RParen, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : src_(s) {}

  Token next() {
    while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
    const std::size_t start = i_;
    if (i_ >= src_.size()) return {Tok::End, "", start};
    const char c = src_[i_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_'))
        ++i_;
      std::string word(src_.substr(start, i_ - start));
      if (word == "X") return {Tok::Next, word, start};
      if (word == "F") return {Tok::Eventually, word, start};
      if (word == "U") return {Tok::Until, word, start};
      if (word == "G") return {Tok::Always, word, start};
      if (word == "true") return {Tok::True, word, start};
      return {Tok::Ident, word, start};
    }
    ++i_;
    switch (c) {
      case '!': return {Tok::Not, "!", start};
      case '&': return {Tok::And, "&", start};
      case '|': return {Tok::Or, "|", start};
      case '(': return {Tok::LParen, "(", start};
      case ')': return {Tok::RParen, ")", start};
      default: throw SyntaxError(start, "atom, operator or parenthesis");
    }
  }

 private:
  std::string_view src_;
  std::size_t i_ = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view s) : lex_(s) { cur_ = lex_.next(); }

  Formula parse() {
    Formula f = parse_or();
    if (cur_.kind != Tok::End) throw SyntaxError(cur_.pos, "end of input");
    return f;
  }

 private:
  void shift() { cur_ = lex_.next(); }

  Formula parse_or() {
    Formula f = parse_and();
    while (cur_.kind == Tok::Or) {
      shift();
      f = Formula::disj(f, parse_and());
    }
    return f;
  }

  Formula parse_and() {
    Formula f = parse_until();
    while (cur_.kind == Tok::And) {
      shift();
      f = Formula::conj(f, parse_until());
    }
    return f;
  }

  Formula parse_until() {
    Formula f = parse_unary();
    while (cur_.kind == Tok::Until) {
      shift();
      f = Formula::until(f, parse_unary());
    }
    return f;
  }

  Formula parse_unary() {
    switch (cur_.kind) {
      case Tok::Not: {
        shift();
        Formula inner = parse_unary();
        if (inner.op() == Op::Atom) return Formula::not_atom(inner.symbol());
        if (inner.op() == Op::NotAtom) return Formula::atom(inner.symbol());
        throw NotCoSafe("!");
      }
      case Tok::Next:
        shift();
        return Formula::next(parse_unary());
      case Tok::Eventually:
        shift();
        return Formula::eventually(parse_unary());
      case Tok::Always:
        throw NotCoSafe("G");
      default:
        return parse_primary();
    }
  }

  Formula parse_primary() {
    switch (cur_.kind) {
      case Tok::True:
        shift();
        return Formula::truth();
      case Tok::Ident: {
        std::string name = cur_.text;
        shift();
        return Formula::atom(std::move(name));
      }
      case Tok::LParen: {
        shift();
        Formula f = parse_or();
        if (cur_.kind != Tok::RParen) throw SyntaxError(cur_.pos, "')'");
        shift();
        return f;
      }
      default:
        throw SyntaxError(cur_.pos, "atom, 'true' or '('");
    }
  }

  Lexer lex_;
  Token cur_{Tok::End, "", 0};
};

}  // namespace

Formula parse_formula(std::string_view text) { return Parser(text).parse(); }

}  // namespace fleet::logic
