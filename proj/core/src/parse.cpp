#include "peq/parse.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace peq {

namespace {

struct Token {
  enum class Kind { Word, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  int line = 0;
};

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::vector<Token> tokenize(const std::string& text, const std::string& src) {
  static const char* puncts[] = {"->", ":=", "<=", ">=", "==", "!=",
                                 "<",  ">",  ";",  ":",  ",",  "+",
                                 "-",  "*",  "/",  "%",  "(",  ")", "="};
  std::vector<Token> out;
  size_t i = 0;
  int line = 1;
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < text.size() && text[i + 1] == '/')) {
      while (i < text.size() && text[i] != '\n')
        ++i;
      continue;
    }
    if (is_word_char(c)) {
      size_t start = i;
      while (i < text.size() && is_word_char(text[i]))
        ++i;
      out.push_back({Token::Kind::Word, text.substr(start, i - start), line});
      continue;
    }
    bool matched = false;
    for (const char* p : puncts) {
      size_t n = std::strlen(p);
      if (text.compare(i, n, p) == 0) {
        out.push_back({Token::Kind::Punct, p, line});
        i += n;
        matched = true;
        break;
      }
    }
    if (!matched)
      throw Error(Error::Kind::Parse, src + ":" + std::to_string(line) +
                                          ": unexpected character '" +
                                          std::string(1, c) + "'");
  }
  out.push_back({Token::Kind::End, "", line});
  return out;
}

bool all_digits(const std::string& s) {
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      return false;
  return !s.empty();
}

class ProgramParser {
public:
  ProgramParser(const std::string& text, std::string src)
      : m_src(std::move(src)), m_tokens(tokenize(text, m_src)) {}

  Program parse() {
    ProgramDraft draft;
    bool have_return = false, have_init = false, have_final = false;
    while (!at_end()) {
      if (peek(1).kind == Token::Kind::Punct && peek(1).text == "->") {
        draft.edges.push_back(parse_edge());
        continue;
      }
      const Token& head = next();
      if (head.kind != Token::Kind::Word)
        fail(head, "expected a statement");
      if (head.text == "prog") {
        draft.name = expect_word("program name");
      } else if (head.text == "param") {
        parse_name_list(draft.params);
        expect_punct(";");
        continue;
      } else if (head.text == "var") {
        parse_name_list(draft.locals);
        expect_punct(";");
        continue;
      } else if (head.text == "return") {
        draft.ret = expect_var_name();
        have_return = true;
      } else if (head.text == "init") {
        draft.init_name = expect_word("location name");
        have_init = true;
      } else if (head.text == "final") {
        draft.final_name = expect_word("location name");
        have_final = true;
      } else {
        fail(head, "unknown statement '" + head.text + "'");
      }
      expect_punct(";");
    }
    if (!have_return)
      fail(peek(0), "missing return statement");
    if (!have_init || !have_final)
      fail(peek(0), "missing init or final statement");
    return build_program(std::move(draft));
  }

private:
  const Token& peek(size_t ahead) const {
    size_t at = m_pos + ahead;
    return at < m_tokens.size() ? m_tokens[at] : m_tokens.back();
  }

  const Token& next() { return m_tokens[std::min(m_pos++, m_tokens.size() - 1)]; }

  bool at_end() const { return peek(0).kind == Token::Kind::End; }

  [[noreturn]] void fail(const Token& at, const std::string& msg) const {
    throw Error(Error::Kind::Parse,
                m_src + ":" + std::to_string(at.line) + ": " + msg);
  }

  std::string expect_word(const std::string& what) {
    const Token& t = next();
    if (t.kind != Token::Kind::Word)
      fail(t, "expected " + what);
    return t.text;
  }

  std::string expect_var_name() {
    const Token& t = next();
    if (t.kind != Token::Kind::Word ||
        std::isdigit(static_cast<unsigned char>(t.text[0])))
      fail(t, "expected a variable name");
    return t.text;
  }

  void expect_punct(const std::string& p) {
    const Token& t = next();
    if (t.kind != Token::Kind::Punct || t.text != p)
      fail(t, "expected '" + p + "'");
  }

  bool accept_punct(const std::string& p) {
    if (peek(0).kind == Token::Kind::Punct && peek(0).text == p) {
      ++m_pos;
      return true;
    }
    return false;
  }

  void parse_name_list(std::vector<std::string>& out) {
    out.push_back(expect_var_name());
    while (accept_punct(","))
      out.push_back(expect_var_name());
  }

  ProgramDraft::DraftEdge parse_edge() {
    ProgramDraft::DraftEdge e;
    e.src = expect_word("location name");
    expect_punct("->");
    e.dst = expect_word("location name");
    expect_punct(":");
    e.instr = parse_instr();
    expect_punct(";");
    return e;
  }

  Instr parse_instr() {
    const Token& head = peek(0);
    if (head.kind != Token::Kind::Word)
      fail(head, "expected an instruction");
    if (head.text == "skip") {
      ++m_pos;
      return Instr::skip();
    }
    if (head.text == "assume") {
      ++m_pos;
      ExprPtr lhs = parse_expr();
      const Token& op = next();
      if (op.kind != Token::Kind::Punct)
        fail(op, "expected a comparison operator");
      ExprPtr rhs = parse_expr();
      // normalize to expr REL 0
      if (op.text == "<=")
        return Instr::assume(Expr::sub(lhs, rhs), Rel::Le);
      if (op.text == "<")
        return Instr::assume(Expr::add(Expr::sub(lhs, rhs), Expr::constant(1)),
                             Rel::Le);
      if (op.text == ">=")
        return Instr::assume(Expr::sub(rhs, lhs), Rel::Le);
      if (op.text == ">")
        return Instr::assume(Expr::add(Expr::sub(rhs, lhs), Expr::constant(1)),
                             Rel::Le);
      if (op.text == "==" || op.text == "=")
        return Instr::assume(Expr::sub(lhs, rhs), Rel::Eq);
      if (op.text == "!=")
        return Instr::assume(Expr::sub(lhs, rhs), Rel::Ne);
      fail(op, "unknown comparison operator '" + op.text + "'");
    }
    std::string target = expect_var_name();
    expect_punct(":=");
    return Instr::assign(std::move(target), parse_expr());
  }

  ExprPtr parse_expr() {
    ExprPtr acc;
    bool negate_first = accept_punct("-");
    acc = parse_addend();
    if (negate_first)
      acc = Expr::mul(-1, acc);
    for (;;) {
      if (accept_punct("+"))
        acc = Expr::add(acc, parse_addend());
      else if (accept_punct("-"))
        acc = Expr::sub(acc, parse_addend());
      else
        return acc;
    }
  }

  ExprPtr parse_addend() {
    const Token& t = peek(0);
    if (t.kind == Token::Kind::Word && all_digits(t.text)) {
      ++m_pos;
      Int value(t.text);
      if (accept_punct("*"))
        return Expr::mul(std::move(value), parse_primary());
      return Expr::constant(std::move(value));
    }
    return parse_primary();
  }

  ExprPtr parse_primary() {
    const Token& t = peek(0);
    if (t.kind == Token::Kind::Word) {
      if (std::isdigit(static_cast<unsigned char>(t.text[0])))
        fail(t, "expected a variable name or literal");
      ++m_pos;
      return Expr::variable(t.text);
    }
    if (accept_punct("(")) {
      ExprPtr inner = parse_expr();
      if (accept_punct("/")) {
        Int d = expect_literal();
        expect_punct(")");
        return Expr::div(std::move(inner), std::move(d));
      }
      if (accept_punct("%")) {
        Int d = expect_literal();
        expect_punct(")");
        return Expr::mod(std::move(inner), std::move(d));
      }
      expect_punct(")");
      return inner;
    }
    fail(t, "expected an expression");
  }

  Int expect_literal() {
    const Token& t = next();
    if (t.kind != Token::Kind::Word || !all_digits(t.text))
      fail(t, "expected an integer literal");
    return Int(t.text);
  }

  std::string m_src;
  std::vector<Token> m_tokens;
  size_t m_pos = 0;
};

} // namespace

Program parse_program(const std::string& text, const std::string& source_name) {
  return ProgramParser(text, source_name).parse();
}

std::string read_file(const std::string& file_path) {
  std::ifstream in(file_path, std::ios::binary);
  if (!in)
    throw Error(Error::Kind::Io, "cannot open " + file_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Program load_program(const std::string& file_path) {
  return parse_program(read_file(file_path),
                       std::filesystem::path(file_path).filename().string());
}

PairManifest parse_pair_manifest(const std::string& text,
                                 const std::string& source_name) {
  PairManifest m;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos)
      line.resize(hash);
    auto strip = [](std::string s) {
      size_t b = s.find_first_not_of(" \t\r");
      size_t e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string stripped = strip(line);
    if (stripped.empty())
      continue;
    size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw Error(Error::Kind::Parse, source_name + ":" +
                                          std::to_string(lineno) +
                                          ": expected key = value");
    std::string key = strip(stripped.substr(0, eq));
    std::string value = strip(stripped.substr(eq + 1));
    if (value.empty())
      throw Error(Error::Kind::Parse, source_name + ":" +
                                          std::to_string(lineno) +
                                          ": empty value for " + key);
    if (key == "p0")
      m.p0_path = value;
    else if (key == "p1")
      m.p1_path = value;
    else if (key == "pre")
      m.pre_path = value;
    else if (key == "post")
      m.post_path = value;
    else
      throw Error(Error::Kind::Parse, source_name + ":" +
                                          std::to_string(lineno) +
                                          ": unknown key " + key);
  }
  if (m.p0_path.empty() || m.p1_path.empty())
    throw Error(Error::Kind::Parse, source_name + ": manifest needs p0 and p1");
  return m;
}

PairManifest load_pair_manifest(const std::string& file_path) {
  PairManifest m = parse_pair_manifest(
      read_file(file_path), std::filesystem::path(file_path).filename().string());
  std::filesystem::path dir = std::filesystem::path(file_path).parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative())
      p = (dir / p).string();
  };
  resolve(m.p0_path);
  resolve(m.p1_path);
  resolve(m.pre_path);
  resolve(m.post_path);
  return m;
}

} // namespace peq
