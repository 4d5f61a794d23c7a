#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "fit/errors.hpp"

namespace fit {

enum class Tok {
  Atom,  // unquoted identifier or 'quoted atom'
  Var,   // Uppercase / underscore identifier
  Int,
  Sym,   // operator symbol, text holds the spelling
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Bar,
  End,  // clause-terminating '.'
  Eof,
};

struct Token {
  Tok kind;
  std::string text;
  long long ival = 0;
  bool quoted = false;
  SourcePos pos;
};

// Tokenizes a whole source unit. Comments run from '%' to end of line.
// A '.' terminates an item only when followed by layout or end of input.
class Lexer {
 public:
  explicit Lexer(std::string_view src, std::string file = {})
      : src_(src), file_(std::move(file)) {}

  std::vector<Token> tokenize() {
    std::vector<Token> out;
    for (;;) {
      skip_layout();
      Token t = next_token();
      bool eof = t.kind == Tok::Eof;
      out.push_back(std::move(t));
      if (eof) break;
    }
    return out;
  }

 private:
  std::string_view src_;
  std::string file_;
  size_t i_ = 0;
  int line_ = 1, col_ = 1;

  [[noreturn]] void fail(const std::string& msg, SourcePos pos) {
    throw FitError(ErrorClass::Syntax, msg, pos, file_);
  }

  bool eof() const { return i_ >= src_.size(); }
  char peek(size_t k = 0) const { return i_ + k < src_.size() ? src_[i_ + k] : '\0'; }
  char advance() {
    char c = src_[i_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_layout() {
    for (;;) {
      if (eof()) return;
      char c = peek();
      if (c == '%') {
        while (!eof() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  Token tok(Tok k, std::string text, SourcePos pos) {
    Token t;
    t.kind = k;
    t.text = std::move(text);
    t.pos = pos;
    return t;
  }

  Token next_token() {
    SourcePos pos{line_, col_};
    if (eof()) return tok(Tok::Eof, "", pos);
    char c = peek();

    if (std::islower(static_cast<unsigned char>(c))) {
      std::string s;
      while (!eof() && ident_char(peek())) s += advance();
      return tok(Tok::Atom, std::move(s), pos);
    }
    if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
      std::string s;
      while (!eof() && ident_char(peek())) s += advance();
      return tok(Tok::Var, std::move(s), pos);
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string s;
      while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) s += advance();
      Token t = tok(Tok::Int, s, pos);
      try {
        t.ival = std::stoll(s);
      } catch (const std::exception&) {
        fail("integer literal out of range: " + s, pos);
      }
      return t;
    }

    switch (c) {
      case '\'': {
        advance();
        std::string s;
        for (;;) {
          if (eof()) fail("unterminated quoted atom", pos);
          char d = advance();
          if (d == '\'') {
            if (peek() == '\'') {  // '' escapes a quote
              advance();
              s += '\'';
              continue;
            }
            break;
          }
          if (d == '\\') {
            if (eof()) fail("unterminated escape in quoted atom", pos);
            char e = advance();
            switch (e) {
              case 'n': s += '\n'; break;
              case 't': s += '\t'; break;
              case 'r': s += '\r'; break;
              case '\\': s += '\\'; break;
              case '\'': s += '\''; break;
              default: s += e; break;
            }
            continue;
          }
          s += d;
        }
        Token t = tok(Tok::Atom, std::move(s), pos);
        t.quoted = true;
        return t;
      }
      case '(': advance(); return tok(Tok::LParen, "(", pos);
      case ')': advance(); return tok(Tok::RParen, ")", pos);
      case '[': advance(); return tok(Tok::LBracket, "[", pos);
      case ']': advance(); return tok(Tok::RBracket, "]", pos);
      case ',': advance(); return tok(Tok::Comma, ",", pos);
      case '|': advance(); return tok(Tok::Bar, "|", pos);
      case '.': {
        advance();
        if (eof() || std::isspace(static_cast<unsigned char>(peek())) || peek() == '%')
          return tok(Tok::End, ".", pos);
        fail("unexpected '.' (end of item must be followed by whitespace)", pos);
      }
      case '?': {
        advance();
        if (peek() == '-') {
          advance();
          return tok(Tok::Sym, "?-", pos);
        }
        fail("unexpected '?'", pos);
      }
      case ':': {
        advance();
        if (peek() == '-') {
          advance();
          return tok(Tok::Sym, ":-", pos);
        }
        if (peek() == '=') {
          advance();
          return tok(Tok::Sym, ":=", pos);
        }
        return tok(Tok::Sym, ":", pos);
      }
      case '>': {
        if (peek(1) == '>' && peek(2) == '>') {
          advance();
          advance();
          advance();
          return tok(Tok::Sym, ">>>", pos);
        }
        if (peek(1) == '>') fail("unknown operator '>>'", pos);
        advance();
        return tok(Tok::Sym, ">", pos);
      }
      case '`': {
        advance();
        if (peek() == '`') {
          advance();
          return tok(Tok::Sym, "``", pos);
        }
        return tok(Tok::Sym, "`", pos);
      }
      case '&':
      case '!':
      case '~':
      case '<':
      case '@':
      case '=':
      case '*':
      case '-': {
        advance();
        return tok(Tok::Sym, std::string(1, c), pos);
      }
      default:
        fail(std::string("unexpected character '") + c + "'", pos);
    }
  }
};

}  // namespace fit
