#include "logicloss/parser.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace logicloss {

namespace {

enum class Tok { Ident, LParen, RParen, Comma, Colon, Bang, Amp, Pipe, Arrow, DArrow, End };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int col;
};

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Colon: return "':'";
    case Tok::Bang: return "'!'";
    case Tok::Amp: return "'&'";
    case Tok::Pipe: return "'|'";
    case Tok::Arrow: return "'->'";
    case Tok::DArrow: return "'<->'";
    case Tok::End: return "end of input";
  }
  return "?";
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space_and_comments();
      const int line = line_, col = col_;
      if (pos_ >= text_.size()) {
        out.push_back({Tok::End, "", line, col});
        return out;
      }
      const char c = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string ident;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                text_[pos_] == '_')) {
          ident += text_[pos_];
          advance();
        }
        out.push_back({Tok::Ident, ident, line, col});
        continue;
      }
      switch (c) {
        case '(': advance(); out.push_back({Tok::LParen, "(", line, col}); continue;
        case ')': advance(); out.push_back({Tok::RParen, ")", line, col}); continue;
        case ',': advance(); out.push_back({Tok::Comma, ",", line, col}); continue;
        case ':': advance(); out.push_back({Tok::Colon, ":", line, col}); continue;
        case '!': advance(); out.push_back({Tok::Bang, "!", line, col}); continue;
        case '&': advance(); out.push_back({Tok::Amp, "&", line, col}); continue;
        case '|': advance(); out.push_back({Tok::Pipe, "|", line, col}); continue;
        case '-':
          advance();
          if (pos_ < text_.size() && text_[pos_] == '>') {
            advance();
            out.push_back({Tok::Arrow, "->", line, col});
            continue;
          }
          throw ParseError(line, col, "expected '->' after '-'");
        case '<':
          advance();
          if (pos_ + 1 < text_.size() && text_[pos_] == '-' && text_[pos_ + 1] == '>') {
            advance();
            advance();
            out.push_back({Tok::DArrow, "<->", line, col});
            continue;
          }
          throw ParseError(line, col, "expected '<->' after '<'");
        default:
          throw ParseError(line, col, std::string("unexpected character '") + c + "'");
      }
    }
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space_and_comments() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  RuleSet run() {
    RuleSet rs;
    expect_keyword("labels");
    expect(Tok::Colon);
    std::vector<std::string> names;
    names.push_back(expect(Tok::Ident).text);
    while (at(Tok::Comma)) {
      next();
      names.push_back(expect(Tok::Ident).text);
    }
    for (const auto& n : names) {
      if (n == "Gold" || n == "true" || n == "rule" || n == "over" || n == "labels")
        throw ParseError(cur().line, cur().col, "'" + n + "' is reserved and cannot be a label");
    }
    rs.labels = LabelSet(names);

    std::set<std::string> rule_names;
    while (!at(Tok::End)) {
      Rule r = parse_rule(rs.labels);
      if (!rule_names.insert(r.name).second)
        throw ParseError(cur().line, cur().col, "duplicate rule name '" + r.name + "'");
      rs.rules.push_back(std::move(r));
    }
    validate_example_arity(rs);
    return rs;
  }

 private:
  Rule parse_rule(const LabelSet& labels) {
    expect_keyword("rule");
    Rule r;
    r.name = expect(Tok::Ident).text;
    expect_keyword("over");
    expect(Tok::LParen);
    r.vars.push_back(expect(Tok::Ident).text);
    while (at(Tok::Comma)) {
      next();
      r.vars.push_back(expect(Tok::Ident).text);
    }
    expect(Tok::RParen);
    std::set<std::string> vs(r.vars.begin(), r.vars.end());
    if (vs.size() != r.vars.size())
      throw ParseError(cur().line, cur().col, "duplicate variable in rule '" + r.name + "'");
    expect(Tok::Colon);
    const Token body_start = cur();
    r.body = parse_iff(labels, vs);
    if (!is_implication_form(*r.body))
      throw ParseError(body_start.line, body_start.col,
                       "top-level connective must be an implication");
    return r;
  }

  FormulaPtr parse_iff(const LabelSet& labels, const std::set<std::string>& vars) {
    FormulaPtr lhs = parse_implies(labels, vars);
    if (at(Tok::DArrow)) {
      next();
      return make_iff(std::move(lhs), parse_iff(labels, vars));
    }
    return lhs;
  }

  FormulaPtr parse_implies(const LabelSet& labels, const std::set<std::string>& vars) {
    FormulaPtr lhs = parse_or(labels, vars);
    if (at(Tok::Arrow)) {
      next();
      return make_implies(std::move(lhs), parse_implies(labels, vars));
    }
    return lhs;
  }

  FormulaPtr parse_or(const LabelSet& labels, const std::set<std::string>& vars) {
    FormulaPtr lhs = parse_and(labels, vars);
    while (at(Tok::Pipe)) {
      next();
      lhs = make_or(std::move(lhs), parse_and(labels, vars));
    }
    return lhs;
  }

  FormulaPtr parse_and(const LabelSet& labels, const std::set<std::string>& vars) {
    FormulaPtr lhs = parse_unary(labels, vars);
    while (at(Tok::Amp)) {
      next();
      lhs = make_and(std::move(lhs), parse_unary(labels, vars));
    }
    return lhs;
  }

  FormulaPtr parse_unary(const LabelSet& labels, const std::set<std::string>& vars) {
    if (at(Tok::Bang)) {
      next();
      return make_not(parse_unary(labels, vars));
    }
    return parse_atom(labels, vars);
  }

  FormulaPtr parse_atom(const LabelSet& labels, const std::set<std::string>& vars) {
    if (at(Tok::LParen)) {
      next();
      FormulaPtr f = parse_iff(labels, vars);
      expect(Tok::RParen);
      return f;
    }
    const Token t = expect(Tok::Ident);
    if (t.text == "true") return make_top();
    Label label;
    if (t.text == "Gold") {
      label = kGoldLabel;
    } else if (auto found = labels.find(t.text)) {
      label = *found;
    } else {
      throw ParseError(t.line, t.col, "undeclared label '" + t.text + "'");
    }
    expect(Tok::LParen);
    std::vector<std::string> args;
    args.push_back(parse_var(vars));
    while (at(Tok::Comma)) {
      next();
      args.push_back(parse_var(vars));
    }
    expect(Tok::RParen);
    return make_pred(label, std::move(args));
  }

  std::string parse_var(const std::set<std::string>& vars) {
    const Token t = expect(Tok::Ident);
    if (!vars.count(t.text))
      throw ParseError(t.line, t.col, "undeclared variable '" + t.text + "'");
    return t.text;
  }

  // All predicates in a rule set must identify examples with tuples of one
  // fixed length, so model outputs bind consistently across rules.
  void validate_example_arity(const RuleSet& rs) {
    int arity = 0;
    for (const auto& r : rs.rules) {
      for (const auto& tuple : collect_arg_tuples(*r.body)) {
        const int n = static_cast<int>(tuple.size());
        if (arity == 0) arity = n;
        if (n != arity)
          throw ParseError(1, 1, "rule '" + r.name + "' mixes predicate arities (" +
                                     std::to_string(arity) + " vs " + std::to_string(n) + ")");
      }
    }
  }

  const Token& cur() const { return toks_[pos_]; }
  bool at(Tok k) const { return cur().kind == k; }
  void next() { if (pos_ + 1 < toks_.size()) ++pos_; }

  Token expect(Tok k) {
    if (!at(k))
      throw ParseError(cur().line, cur().col,
                       std::string("expected ") + tok_name(k) + ", found " + found_text());
    Token t = cur();
    next();
    return t;
  }

  void expect_keyword(const std::string& kw) {
    if (!at(Tok::Ident) || cur().text != kw)
      throw ParseError(cur().line, cur().col, "expected '" + kw + "', found " + found_text());
    next();
  }

  std::string found_text() const {
    if (at(Tok::End)) return "end of input";
    if (at(Tok::Ident)) return "'" + cur().text + "'";
    return std::string("'") + cur().text + "'";
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

RuleSet parse_rules(std::string_view text) {
  return Parser(Lexer(text).run()).run();
}

RuleSet load_rules(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open rule file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_rules(ss.str());
}

}  // namespace logicloss
